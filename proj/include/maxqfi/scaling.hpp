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

// Precision scaling for N parallel channel uses. For any contraction W,
//
//   2 - 2 f_min(K^N_x, K^N_{x+dx}) <= N ||2I - K_W - K_W^H|| + N(N-1) ||I - K_W||^2,
//
// and a quadratic bound ||I - K_W|| <= dx^T Q dx then caps the QFIM of every
// N-fold probe at 8NQ, which gives the standard-quantum-limit covariance
// bound Q^{-1} / (8nN).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "maxqfi/chandist.hpp"
#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"
#include "maxqfi/qfim.hpp"

namespace maxqfi {

/// Symmetric PSD matrix with explicit axis labels. The label order need not
/// match a channel's parameter order; consumers align by name.
struct QuadraticBound {
  RealMatrix q;
  std::vector<std::string> labels;
};

inline double parallel_bound_rhs(const KrausChannel& ka, const KrausChannel& kb, const ComplexMatrix& w, int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "parallel_bound_rhs: N must be positive");
  const ComplexMatrix k = kw_matrix(ka, kb, w);
  const ComplexMatrix id = linalg::identity(k.rows());
  const double nn = static_cast<double>(n);
  const double one = linalg::op_norm(id - k);
  return nn * linalg::op_norm(2.0 * id - k - k.adjoint()) + nn * (nn - 1.0) * one * one;
}

/// W = [[cos(xi dw), i sin(xi dw)], [i sin(xi dw), cos(xi dw)]], xi = 1 / (2 sqrt(1 - eta^2)).
inline ComplexMatrix dephasing_w(double eta, double domega) {
  if (eta >= 1.0) fail(ErrorCode::EtaOne, "dephasing_w: eta = 1 is the noiseless case, xi diverges");
  if (eta < 0.0) fail(ErrorCode::ParamOutOfRange, "dephasing_w: eta must be in [0, 1)");
  const double a = domega / (2.0 * std::sqrt(1.0 - eta * eta));
  ComplexMatrix w(2, 2);
  w << std::cos(a), kI * std::sin(a), kI * std::sin(a), std::cos(a);
  return w;
}

/// The bound stated for the dephasing channel, order (eta, omega):
/// diag(sqrt(eta^2 + eta), eta sqrt(eta^2 + eta)) / (8 (1 - eta^2)).
inline QuadraticBound dephasing_q_stated(double eta) {
  if (eta >= 1.0) fail(ErrorCode::EtaOne, "dephasing_q_stated: eta = 1");
  if (eta <= 0.0) fail(ErrorCode::ParamOutOfRange, "dephasing_q_stated: eta must be in (0, 1)");
  const double s = std::sqrt(eta * eta + eta) / (8.0 * (1.0 - eta * eta));
  QuadraticBound b{RealMatrix::Zero(2, 2), {"eta", "omega"}};
  b.q(0, 0) = s;
  b.q(1, 1) = eta * s;
  return b;
}

/// A bound that holds for the dephasing W at second order, order (eta, omega):
/// sqrt(2) diag(1, eta^2) / (8 (1 - eta^2)). It follows from
/// ||I - K_W|| = sqrt((a + b)^2 + 4ab) / (8 (1 - eta^2)) + O(dx^3), a = deta^2,
/// b = eta^2 domega^2, and 4ab <= (a + b)^2.
inline QuadraticBound dephasing_q_corrected(double eta) {
  if (eta >= 1.0) fail(ErrorCode::EtaOne, "dephasing_q_corrected: eta = 1");
  if (eta <= 0.0) fail(ErrorCode::ParamOutOfRange, "dephasing_q_corrected: eta must be in (0, 1)");
  const double s = std::sqrt(2.0) / (8.0 * (1.0 - eta * eta));
  QuadraticBound b{RealMatrix::Zero(2, 2), {"eta", "omega"}};
  b.q(0, 0) = s;
  b.q(1, 1) = s * eta * eta;
  return b;
}

/// Q rearranged into the given label order.
inline RealMatrix align_bound(const QuadraticBound& b, const std::vector<std::string>& labels) {
  const auto m = static_cast<Eigen::Index>(labels.size());
  if (b.q.rows() != m || b.q.cols() != m || static_cast<Eigen::Index>(b.labels.size()) != m)
    fail(ErrorCode::DimMismatch, "QuadraticBound size does not match the parameter count");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto it = std::find(b.labels.begin(), b.labels.end(), labels[static_cast<std::size_t>(i)]);
    if (it == b.labels.end())
      fail(ErrorCode::InvalidArgument, "QuadraticBound has no axis named '" + labels[static_cast<std::size_t>(i)] + "'");
    idx[static_cast<std::size_t>(i)] = it - b.labels.begin();
  }
  RealMatrix out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = b.q(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

/// W for the pair (x, x + dx); dx is in the channel's parameter order.
using WProvider = std::function<ComplexMatrix(const RealVector& x, const RealVector& dx)>;

/// dephasing_w wired to the built-in dephasing family (order omega, eta).
inline WProvider dephasing_w_provider() {
  return [](const RealVector& x, const RealVector& dx) { return dephasing_w(x(1), dx(0)); };
}

struct QGrid {
  std::vector<RealVector> directions;  // unit vectors, channel parameter order
  std::vector<double> scales;          // step lengths, each <= 1e-2
};

/// Axis, diagonal and anti-diagonal directions at scales {1e-2, 5e-3, 2.5e-3}.
inline QGrid default_q_grid(int m) {
  QGrid g;
  for (int i = 0; i < m; ++i) g.directions.push_back(RealVector::Unit(m, i));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (double s : {1.0, -1.0}) {
        RealVector v = RealVector::Unit(m, i) + s * RealVector::Unit(m, j);
        g.directions.push_back(v / v.norm());
      }
  g.scales = {1e-2, 5e-3, 2.5e-3};
  return g;
}

struct QBoundCheck {
  bool pass = true;
  // min over the grid of (dx^T Q dx + c |dx|^3 - ||I - K_W||) / |dx|^2, c fitted per direction.
  double worst_slack = 0.0;
  // Largest fitted second-order coefficient of ||I - K_W|| - dx^T Q dx, per unit |dx|^2.
  double worst_excess = 0.0;
};

/// Checks ||I - K_W(dx)|| <= dx^T Q dx + c |dx|^3. Along each direction the
/// residual e(s) = ||I - K_W|| - s^2 v^T Q v is fitted as a s^2 + c s^3 from the
/// two smallest scales; a second-order excess a > 1e-6 max(1, v^T Q v) means the
/// quadratic form itself is too small and the check fails.
inline QBoundCheck q_bound_check(const ParamChannel& pch, const WProvider& w_provider, const RealVector& x,
                                 const QuadraticBound& q, const QGrid& grid) {
  if (x.size() != pch.num_params()) fail(ErrorCode::DimMismatch, "q_bound_check: wrong number of parameters");
  if (grid.scales.size() < 2) fail(ErrorCode::InvalidArgument, "q_bound_check: need at least two scales");
  for (double s : grid.scales)
    if (!(s > 0.0 && s <= 1e-2)) fail(ErrorCode::InvalidArgument, "q_bound_check: scales must lie in (0, 1e-2]");
  const RealMatrix qa = align_bound(q, pch.labels());
  const KrausChannel kx = pch.at(x);
  std::vector<double> scales = grid.scales;
  std::sort(scales.begin(), scales.end());

  QBoundCheck out;
  out.worst_slack = std::numeric_limits<double>::infinity();
  out.worst_excess = -std::numeric_limits<double>::infinity();
  for (const auto& v0 : grid.directions) {
    const RealVector v = v0 / v0.norm();
    const double qv = v.dot(qa * v);
    std::vector<double> e;
    for (double s : scales) {
      const RealVector dx = s * v;
      const ComplexMatrix k = kw_matrix(kx, pch.at(RealVector(x + dx)), w_provider(x, dx));
      e.push_back(linalg::op_norm(linalg::identity(k.rows()) - k) - s * s * qv);
    }
    // a s1^2 + c s1^3 = e1, a s2^2 + c s2^3 = e2
    const double s1 = scales[0], s2 = scales[1];
    const double c = (e[1] / (s2 * s2) - e[0] / (s1 * s1)) / (s2 - s1);
    const double a = e[0] / (s1 * s1) - c * s1;
    out.worst_excess = std::max(out.worst_excess, a);
    if (a > 1e-6 * std::max(1.0, qv)) out.pass = false;
    const double cpos = std::max(c, 0.0);
    for (std::size_t k = 0; k < scales.size(); ++k) {
      const double s = scales[k];
      const double slack = (cpos * s * s * s - e[k]) / (s * s);
      out.worst_slack = std::min(out.worst_slack, slack);
      if (slack < -1e-6 * std::max(1.0, qv)) out.pass = false;
    }
  }
  return out;
}

/// Q^{-1} / (8 n N), in the label order of q.
inline CovarianceMatrix sql_cov_bound(const QuadraticBound& q, int n_channels, int n_runs) {
  if (n_channels < 1 || n_runs < 1) fail(ErrorCode::InvalidArgument, "sql_cov_bound: N and n must be positive");
  Eigen::FullPivLU<RealMatrix> lu(q.q);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) fail(ErrorCode::SingularMatrix, "sql_cov_bound: Q is singular");
  const RealMatrix inv = lu.inverse();
  return 0.5 * (inv + inv.transpose()) / (8.0 * n_runs * n_channels);
}

struct ParallelCapResult {
  bool pass = true;
  double worst_ratio = 0.0;  // max over samples of lambda_max((8NQ)^{-1/2} J (8NQ)^{-1/2})
  int samples = 0;
};

/// Largest generalized eigenvalue of J relative to the cap 8NQ (Q aligned, PD).
inline double cap_ratio(const QFIMatrix& j, const RealMatrix& cap) {
  Eigen::GeneralizedSelfAdjointEigenSolver<RealMatrix> es(0.5 * (j + j.transpose()), 0.5 * (cap + cap.transpose()));
  if (es.info() != Eigen::Success) fail(ErrorCode::NotPSD, "cap_ratio: cap matrix is not positive definite");
  return es.eigenvalues().maxCoeff();
}

/// For random purified probes of the N-fold channel, checks J <= 8NQ (1 + 1e-2).
inline ParallelCapResult verify_parallel_qfim_cap(const ParamChannel& pch, const RealVector& x, const QuadraticBound& q,
                                                  int n_channels, int samples, unsigned seed = 0,
                                                  double h = kDefaultProbeStep) {
  if (n_channels < 1 || n_channels > 4) fail(ErrorCode::InvalidArgument, "verify_parallel_qfim_cap: N must be in 1..4");
  const ParamChannel par = parallel_family(pch, n_channels);
  const RealMatrix cap = 8.0 * n_channels * align_bound(q, pch.labels());
  std::mt19937_64 rng(seed);
  ParallelCapResult out;
  for (int k = 0; k < samples; ++k) {
    const QFIMatrix j = qfim_of_probe(par, x, random_purified_probe(par.dim_in(), rng), h);
    out.worst_ratio = std::max(out.worst_ratio, cap_ratio(j, cap));
  }
  out.samples = samples;
  out.pass = out.worst_ratio <= 1.0 + 1e-2;
  return out;
}

}  // namespace maxqfi
