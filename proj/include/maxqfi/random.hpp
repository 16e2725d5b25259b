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

// Seeded random matrices, channels and smooth channel families for property checks.

#include <random>
#include <string>
#include <vector>

#include "maxqfi/channels.hpp"
#include "maxqfi/linalg.hpp"

namespace maxqfi::random {

template <class Rng>
ComplexMatrix ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = Complex(g(rng), g(rng));
  return m;
}

template <class Rng>
ComplexMatrix hermitian(Eigen::Index n, Rng& rng) {
  return linalg::hermitian_part(ginibre(n, n, rng));
}

/// rows x cols matrix with orthonormal columns (rows >= cols), Haar distributed.
template <class Rng>
ComplexMatrix isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(rows, cols, rng));
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(rows, cols);
  const ComplexMatrix r = qr.matrixQR().topRows(cols).template triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Complex d = r(k, k);
    if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
  }
  return q;
}

template <class Rng>
ComplexMatrix unitary(Eigen::Index n, Rng& rng) {
  return isometry(n, n, rng);
}

/// Kraus blocks of a stacked isometry V (rank * dim_out x dim_in).
inline KrausChannel channel_from_isometry(const ComplexMatrix& v, Eigen::Index dim_out, std::size_t rank) {
  std::vector<ComplexMatrix> ks;
  for (std::size_t j = 0; j < rank; ++j) ks.push_back(v.middleRows(static_cast<Eigen::Index>(j) * dim_out, dim_out));
  return KrausChannel(std::move(ks));
}

template <class Rng>
KrausChannel kraus_channel(Eigen::Index dim_in, Eigen::Index dim_out, std::size_t rank, Rng& rng) {
  const auto rows = static_cast<Eigen::Index>(rank) * dim_out;
  if (rows < dim_in) fail(ErrorCode::InvalidArgument, "kraus_channel: rank * dim_out must be >= dim_in");
  return channel_from_isometry(isometry(rows, dim_in, rng), dim_out, rank);
}

/// Smooth family with stacked isometry V(x) = exp(-i sum_k x_k G_k) V0, G_k Hermitian.
template <class Rng>
ParamChannel channel_family(Eigen::Index dim, std::size_t rank, int num_params, Rng& rng,
                            std::string name = "random-family") {
  const auto rows = static_cast<Eigen::Index>(rank) * dim;
  const ComplexMatrix v0 = isometry(rows, dim, rng);
  std::vector<ComplexMatrix> gens;
  for (int k = 0; k < num_params; ++k) gens.push_back(hermitian(rows, rng));
  std::vector<std::string> labels;
  for (int k = 0; k < num_params; ++k) labels.push_back("x" + std::to_string(k + 1));
  return ParamChannel(std::move(name), labels, dim, dim, rank,
                      [v0, gens, dim, rank](std::span<const double> x) {
                        ComplexMatrix h = ComplexMatrix::Zero(gens.front().rows(), gens.front().cols());
                        for (std::size_t k = 0; k < gens.size(); ++k) h += x[k] * gens[k];
                        return channel_from_isometry(linalg::herm_exp(h, 1.0) * v0, dim, rank);
                      },
                      ChannelKind::AnalyticBuiltin);
}

/// Random full-rank density matrix.
template <class Rng>
DensityMatrix mixed_state(Eigen::Index n, Rng& rng) {
  const ComplexMatrix g = ginibre(n, n, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix::trusted(rho);
}

}  // namespace maxqfi::random
