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

// Tabulated channel files:
//
//   { "num_params": m, "dim_in": m1, "dim_out": m2, "kraus_rank": d,
//     "param_names": [...],                      (optional)
//     "points": [ { "x": [x1, ..., xm], "kraus": [ F_1, ..., F_d ] }, ... ] }
//
// Each F_j is a list of m2 rows, each row a list of m1 complex entries [re, im].
// Requires nlohmann/json (vendor/json.hpp).

#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"

namespace maxqfi::io {

using nlohmann::json;

struct TabulatedPoint {
  RealVector x;
  std::vector<ComplexMatrix> kraus;
};

struct TabulatedData {
  int num_params = 0;
  Eigen::Index dim_in = 0;
  Eigen::Index dim_out = 0;
  std::size_t kraus_rank = 0;
  std::vector<std::string> param_names;
  std::vector<TabulatedPoint> points;
};

/// Coordinates match when they differ by at most 1e-9 max(1, |x|).
inline bool same_point(const RealVector& a, const RealVector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(a(i) - b(i)) > 1e-9 * std::max(1.0, std::abs(a(i)))) return false;
  return true;
}

inline std::string format_point(const RealVector& x) {
  std::ostringstream os;
  os.precision(15);
  os << "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << "]";
  return os.str();
}

namespace detail {

[[noreturn]] inline void schema(const std::string& where, const std::string& what) {
  fail(ErrorCode::SchemaError, where + ": " + what);
}

inline const json& field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) schema(where, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) schema(where, std::string("missing field '") + key + "'");
  return *it;
}

inline long positive_int(const json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long>() < 1) schema(where, "expected a positive integer");
  return j.get<long>();
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) schema(where, "expected a number");
  return j.get<double>();
}

inline ComplexMatrix parse_matrix(const json& j, Eigen::Index rows, Eigen::Index cols, const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    schema(where, "expected " + std::to_string(rows) + " rows");
  ComplexMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string rw = where + "[" + std::to_string(r) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      schema(rw, "expected " + std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& z = row[static_cast<std::size_t>(c)];
      const std::string zw = rw + "[" + std::to_string(c) + "]";
      if (!z.is_array() || z.size() != 2) schema(zw, "expected a complex entry [re, im]");
      m(r, c) = Complex(number(z[0], zw + "[0]"), number(z[1], zw + "[1]"));
    }
  }
  return m;
}

}  // namespace detail

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline json real_matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_to_json(const RealVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

/// Validates the schema and every Kraus list; errors name the offending field.
inline TabulatedData parse_tabulated(const json& doc) {
  using detail::field;
  TabulatedData t;
  t.num_params = static_cast<int>(detail::positive_int(field(doc, "num_params", "$"), "$.num_params"));
  t.dim_in = detail::positive_int(field(doc, "dim_in", "$"), "$.dim_in");
  t.dim_out = detail::positive_int(field(doc, "dim_out", "$"), "$.dim_out");
  t.kraus_rank = static_cast<std::size_t>(detail::positive_int(field(doc, "kraus_rank", "$"), "$.kraus_rank"));
  if (doc.contains("param_names")) {
    const json& names = doc["param_names"];
    if (!names.is_array() || static_cast<int>(names.size()) != t.num_params)
      detail::schema("$.param_names", "expected " + std::to_string(t.num_params) + " strings");
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (!names[i].is_string()) detail::schema("$.param_names[" + std::to_string(i) + "]", "expected a string");
      t.param_names.push_back(names[i].get<std::string>());
    }
  } else {
    for (int i = 0; i < t.num_params; ++i) t.param_names.push_back("x" + std::to_string(i + 1));
  }
  const json& pts = field(doc, "points", "$");
  if (!pts.is_array()) detail::schema("$.points", "expected an array");
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const std::string pw = "$.points[" + std::to_string(p) + "]";
    TabulatedPoint tp;
    const json& xs = field(pts[p], "x", pw);
    if (!xs.is_array() || static_cast<int>(xs.size()) != t.num_params)
      detail::schema(pw + ".x", "expected " + std::to_string(t.num_params) + " coordinates");
    tp.x = RealVector(t.num_params);
    for (int i = 0; i < t.num_params; ++i)
      tp.x(i) = detail::number(xs[static_cast<std::size_t>(i)], pw + ".x[" + std::to_string(i) + "]");
    const json& ks = field(pts[p], "kraus", pw);
    if (!ks.is_array() || ks.size() != t.kraus_rank)
      detail::schema(pw + ".kraus", "expected " + std::to_string(t.kraus_rank) + " Kraus operators");
    for (std::size_t k = 0; k < ks.size(); ++k)
      tp.kraus.push_back(
          detail::parse_matrix(ks[k], t.dim_out, t.dim_in, pw + ".kraus[" + std::to_string(k) + "]"));
    try {
      KrausChannel check(tp.kraus);
    } catch (const Error& e) {
      fail(e.code(), pw + ": " + e.detail());
    }
    t.points.push_back(std::move(tp));
  }
  return t;
}

inline json to_json(const TabulatedData& t) {
  json doc;
  doc["num_params"] = t.num_params;
  doc["dim_in"] = t.dim_in;
  doc["dim_out"] = t.dim_out;
  doc["kraus_rank"] = t.kraus_rank;
  doc["param_names"] = t.param_names;
  json pts = json::array();
  for (const auto& p : t.points) {
    json ks = json::array();
    for (const auto& k : p.kraus) ks.push_back(matrix_to_json(k));
    pts.push_back({{"x", vector_to_json(p.x)}, {"kraus", ks}});
  }
  doc["points"] = pts;
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::SchemaError, path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaError, path + ": malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

inline TabulatedData load_tabulated(const std::string& path) {
  const json doc = read_json_file(path);
  try {
    return parse_tabulated(doc);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SchemaError || e.code() == ErrorCode::NotCompletelyPositive)
      fail(e.code(), path + ": " + e.detail());
    throw;
  }
}

inline const TabulatedPoint* find_point(const TabulatedData& t, const RealVector& x) {
  for (const auto& p : t.points)
    if (same_point(p.x, x)) return &p;
  return nullptr;
}

/// Points from `wanted` that the table does not contain.
inline std::vector<RealVector> missing_points(const TabulatedData& t, const std::vector<RealVector>& wanted) {
  std::vector<RealVector> out;
  for (const auto& x : wanted)
    if (!find_point(t, x)) out.push_back(x);
  return out;
}

/// Wraps a table as a parameterized family; querying an absent point raises MissingPoints.
inline ParamChannel tabulated_channel(TabulatedData t, std::string name = "tabulated") {
  auto data = std::make_shared<const TabulatedData>(std::move(t));
  return ParamChannel(std::move(name), data->param_names, data->dim_in, data->dim_out, data->kraus_rank,
                      [data](std::span<const double> xs) {
                        const RealVector x = Eigen::Map<const RealVector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
                        const TabulatedPoint* p = find_point(*data, x);
                        if (!p) fail(ErrorCode::MissingPoints, "no tabulated point at x = " + format_point(x));
                        return KrausChannel(p->kraus);
                      },
                      ChannelKind::Tabulated);
}

/// Tabulates a family at the given points (used to build channel files).
inline TabulatedData tabulate(const ParamChannel& pch, const std::vector<RealVector>& points) {
  TabulatedData t;
  t.num_params = pch.num_params();
  t.dim_in = pch.dim_in();
  t.dim_out = pch.dim_out();
  t.kraus_rank = pch.rank();
  t.param_names = pch.labels();
  for (const auto& x : points) {
    if (find_point(t, x)) continue;
    t.points.push_back({x, pch.at(x).kraus()});
  }
  return t;
}

}  // namespace maxqfi::io
