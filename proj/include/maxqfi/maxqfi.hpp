// Copyright 2026 The maxqfi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "maxqfi/chandist.hpp"
#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"
#include "maxqfi/maxqfim.hpp"
#include "maxqfi/qfim.hpp"
#include "maxqfi/scaling.hpp"
#include "maxqfi/sdp.hpp"

namespace maxqfi {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace maxqfi
