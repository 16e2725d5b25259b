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

// J^max from the second-order behaviour of the minimal channel fidelity,
//
//   8 (1 - f_min(x, x + dx)) = dx^T J^max dx + O(|dx|^3),
//
// plus the analytic reference values, the existence and dominance checks and
// the covariance tradeoff relations that follow from J^max.
//
// Extraction grid. With per-coordinate steps s_i = h max(1, |x_i|) and
// g(dx) = 8 (1 - f_min(x, x + dx)):
//
//   J_ii = [g(+s_i e_i) + g(-s_i e_i)] / (2 s_i^2)
//   J_ij = [g(+u) + g(-u) - g(+v) - g(-v)] / (8 s_i s_j),  u = s_i e_i + s_j e_j, v = s_i e_i - s_j e_j.
//
// Averaging each displacement with its negative removes the odd orders, so
// the truncation error is O(h^2) and the Richardson step over {h, h/2} is
// (4 J(h/2) - J(h)) / 3.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "maxqfi/chandist.hpp"
#include "maxqfi/channels.hpp"
#include "maxqfi/error.hpp"
#include "maxqfi/linalg.hpp"
#include "maxqfi/qfim.hpp"

namespace maxqfi {

enum class Existence { Confirmed, Inconclusive, RefutedByDominance };

inline const char* to_string(Existence e) {
  switch (e) {
    case Existence::Confirmed: return "Confirmed";
    case Existence::Inconclusive: return "Inconclusive";
    case Existence::RefutedByDominance: return "RefutedByDominance";
  }
  return "?";
}

enum class FidelitySide { Primal, Dual };

struct ExtractionOptions {
  double h = 1e-2;
  bool richardson = true;
  FidelitySide side = FidelitySide::Dual;
  sdp::SdpOptions sdp = chandist_detail::tight_options();
};

struct DirectionRecord {
  RealVector dx;
  double f_min = 1.0;
  double gap = 0.0;
  double g = 0.0;  // 8 (1 - f_min)
  ComplexMatrix probe;
  ComplexMatrix w;
};

struct MaxQfimReport {
  QFIMatrix jmax;
  std::vector<DirectionRecord> per_direction;
  Existence existence = Existence::Inconclusive;
  double probe_spread = 0.0;  // largest trace distance between per-direction probes
  int dominance_samples = 0;
  double dominance_worst = 0.0;
  double max_fidelity_gap = 0.0;
  double clamped_eigenvalue = 0.0;  // most negative eigenvalue removed by the PSD projection
};

inline double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  return 0.5 * linalg::trace_norm(a - b);
}

/// Per-coordinate steps h max(1, |x_i|).
inline RealVector coordinate_steps(const RealVector& x, double h) {
  RealVector s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) s(i) = h * std::max(1.0, std::abs(x(i)));
  return s;
}

/// Displacements of one grid level: +-s_i e_i, then +-(s_i e_i + s_j e_j), +-(s_i e_i - s_j e_j) for i < j.
inline std::vector<RealVector> grid_level(const RealVector& steps) {
  const Eigen::Index m = steps.size();
  std::vector<RealVector> out;
  for (Eigen::Index i = 0; i < m; ++i)
    for (double sign : {1.0, -1.0}) {
      RealVector d = RealVector::Zero(m);
      d(i) = sign * steps(i);
      out.push_back(d);
    }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      for (double pair : {1.0, -1.0})
        for (double sign : {1.0, -1.0}) {
          RealVector d = RealVector::Zero(m);
          d(i) = sign * steps(i);
          d(j) = sign * pair * steps(j);
          out.push_back(d);
        }
  return out;
}

/// Every parameter point the extraction touches: x first, then the displaced points.
inline std::vector<RealVector> extraction_points(const RealVector& x, double h, bool richardson) {
  std::vector<RealVector> pts{x};
  const int levels = richardson ? 2 : 1;
  for (int l = 0; l < levels; ++l)
    for (const auto& d : grid_level(coordinate_steps(x, h * std::ldexp(1.0, -l)))) pts.push_back(x + d);
  return pts;
}

namespace maxqfim_detail {

// Assembles J from g values laid out as grid_level() orders them.
inline QFIMatrix assemble(const std::vector<double>& g, const RealVector& steps) {
  const Eigen::Index m = steps.size();
  QFIMatrix j = QFIMatrix::Zero(m, m);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m; ++i, k += 2) j(i, i) = (g[k] + g[k + 1]) / (2.0 * steps(i) * steps(i));
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index l = i + 1; l < m; ++l, k += 4) {
      const double v = (g[k] + g[k + 1] - g[k + 2] - g[k + 3]) / (8.0 * steps(i) * steps(l));
      j(i, l) = v;
      j(l, i) = v;
    }
  return j;
}

// Symmetrizes and applies the PSD policy: eigenvalues in [-1e-8 max(1, ||J||), 0) clamp to 0.
inline QFIMatrix project_psd(const QFIMatrix& j, double* clamped = nullptr) {
  const RealMatrix s = 0.5 * (j + j.transpose());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s);
  const RealVector ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev(0) < -1e-8 * scale)
    fail(ErrorCode::NegativeEigenvalue, "J^max has eigenvalue " + std::to_string(ev(0)) +
                                            " below the clamp floor; the fidelity data are inconsistent");
  if (clamped) *clamped = std::min(0.0, ev(0));
  if (ev(0) >= 0.0) return s;
  const RealMatrix out = es.eigenvectors() * ev.cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

inline void check_point(const ParamChannel& pch, const RealVector& x) {
  if (pch.num_params() < 1) fail(ErrorCode::InvalidArgument, "need at least one parameter");
  if (x.size() != pch.num_params())
    fail(ErrorCode::DimMismatch, "point has " + std::to_string(x.size()) + " coordinates, channel has " +
                                     std::to_string(pch.num_params()) + " parameters");
}

}  // namespace maxqfim_detail

/// Minimal fidelity between the channels at x and x + dx using the chosen SDP side.
inline FidelityResult fidelity_between(const KrausChannel& kx, const KrausChannel& kd, FidelitySide side,
                                       const sdp::SdpOptions& opt = chandist_detail::tight_options()) {
  FidelityResult r = side == FidelitySide::Dual ? min_fidelity_dual(kx, kd, opt) : min_fidelity_primal(kx, kd, opt);
  if (r.status == sdp::SdpStatus::Infeasible)
    fail(ErrorCode::SolverFailure, std::string("fidelity SDP reported ") + sdp::to_string(r.status));
  // A loose bracket means the solver stalled; the certified midpoint is then
  // too coarse to resolve second-order fidelity changes.
  if (r.gap > 1e-8) fail(ErrorCode::SolverFailure, "fidelity bracket " + std::to_string(r.gap) + " exceeds 1e-8");
  return r;
}

/// Largest trace distance between any two probes; Confirmed when at most 1e-4.
inline std::pair<Existence, double> probe_agreement(const std::vector<ComplexMatrix>& probes) {
  double spread = 0.0;
  for (std::size_t a = 0; a < probes.size(); ++a)
    for (std::size_t b = a + 1; b < probes.size(); ++b) spread = std::max(spread, trace_distance(probes[a], probes[b]));
  return {spread <= 1e-4 ? Existence::Confirmed : Existence::Inconclusive, spread};
}

inline MaxQfimReport extract_maxqfim(const ParamChannel& pch, const RealVector& x, const ExtractionOptions& opt = {}) {
  maxqfim_detail::check_point(pch, x);
  if (!(opt.h > 0.0)) fail(ErrorCode::InvalidArgument, "step h must be positive");
  const KrausChannel kx = pch.at(x);
  MaxQfimReport rep;
  const int levels = opt.richardson ? 2 : 1;
  std::vector<QFIMatrix> js;
  std::vector<std::vector<double>> gs;
  for (int l = 0; l < levels; ++l) {
    const RealVector steps = coordinate_steps(x, opt.h * std::ldexp(1.0, -l));
    std::vector<double> g;
    for (const auto& d : grid_level(steps)) {
      const FidelityResult r = fidelity_between(kx, pch.at(RealVector(x + d)), opt.side, opt.sdp);
      DirectionRecord rec{d, r.f_min, r.gap, 8.0 * (1.0 - r.f_min), r.probe_opt, r.w_opt};
      g.push_back(rec.g);
      rep.max_fidelity_gap = std::max(rep.max_fidelity_gap, r.gap);
      rep.per_direction.push_back(std::move(rec));
    }
    js.push_back(maxqfim_detail::assemble(g, steps));
    gs.push_back(std::move(g));
  }

  if (opt.richardson) {
    // Second-order regime check: halving the step must quarter g.
    const double gmax = *std::max_element(gs[0].begin(), gs[0].end());
    for (std::size_t k = 0; k < gs[0].size(); ++k) {
      const double big = gs[0][k], small = gs[1][k];
      if (big <= 1e-10 || big <= 1e-6 * gmax) continue;
      const double ratio = small > 0.0 ? big / small : std::numeric_limits<double>::infinity();
      if (std::abs(ratio - 4.0) > 1.0)
        fail(ErrorCode::StepTooLarge, "g(h)/g(h/2) = " + std::to_string(ratio) + " along direction " +
                                          std::to_string(k) + "; reduce h");
    }
  }

  const QFIMatrix raw = opt.richardson ? QFIMatrix((4.0 * js[1] - js[0]) / 3.0) : js[0];
  rep.jmax = maxqfim_detail::project_psd(raw, &rep.clamped_eigenvalue);
  std::vector<ComplexMatrix> probes;
  for (const auto& r : rep.per_direction) probes.push_back(r.probe);
  std::tie(rep.existence, rep.probe_spread) = probe_agreement(probes);
  return rep;
}

struct UnitaryExtraction {
  QFIMatrix jmax;
  double h_used = 0.0;  // after automatic halving
  int halvings = 0;
};

/// J^max of a unitary family from g(dx) = 4 C^2(U_x^H U_{x+dx}), evaluated on
/// the same symmetric grid with a Richardson table over `levels` step halvings.
inline UnitaryExtraction extract_maxqfim_unitary(const ParamChannel& uch, const RealVector& x, double h = 1e-2,
                                                 int levels = 4) {
  maxqfim_detail::check_point(uch, x);
  if (!uch.is_unitary_family())
    fail(ErrorCode::NotUnitaryFamily, uch.name() + " has Kraus rank " + std::to_string(uch.rank()));
  if (!(h > 0.0) || levels < 1) fail(ErrorCode::InvalidArgument, "step h must be positive and levels >= 1");
  const ComplexMatrix ux = uch.at(x)[0];

  // Keep every eigenphase arc below pi/2 so no comparison sits near the branch.
  UnitaryExtraction out;
  double hh = h;
  for (;; ++out.halvings) {
    double worst = 0.0;
    for (const auto& d : grid_level(coordinate_steps(x, hh)))
      worst = std::max(worst, eigenphase_arc(ux.adjoint() * uch.at(RealVector(x + d))[0]));
    if (worst < std::numbers::pi / 2) break;
    if (out.halvings == 20)
      fail(ErrorCode::SpreadExceedsPi, "eigenphase spread stays above pi/2 after 20 step halvings");
    hh *= 0.5;
  }
  out.h_used = hh;

  std::vector<QFIMatrix> table;
  for (int l = 0; l < levels; ++l) {
    const RealVector steps = coordinate_steps(x, hh * std::ldexp(1.0, -l));
    std::vector<double> g;
    for (const auto& d : grid_level(steps)) {
      const double c = c_angle(ux.adjoint() * uch.at(RealVector(x + d))[0]);
      g.push_back(4.0 * c * c);
    }
    table.push_back(maxqfim_detail::assemble(g, steps));
  }
  // Neville table in h^2: each column removes the next even order.
  for (int col = 1; col < levels; ++col) {
    const double f = std::ldexp(1.0, 2 * col);
    for (int l = levels - 1; l >= col; --l) table[l] = (f * table[l] - table[l - 1]) / (f - 1.0);
  }
  out.jmax = maxqfim_detail::project_psd(table[static_cast<std::size_t>(levels - 1)]);
  return out;
}

/// diag(eta^2, 1/(1 - eta^2)) in the order (omega, eta).
inline QFIMatrix analytic_dephasing_jmax(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) fail(ErrorCode::ParamOutOfRange, "analytic_dephasing_jmax: eta must lie in (0, 1)");
  QFIMatrix j = QFIMatrix::Zero(2, 2);
  j(0, 0) = eta * eta;
  j(1, 1) = 1.0 / (1.0 - eta * eta);
  return j;
}

/// J^max of exp(-i (x1 sigma_x + x2 sigma_y) T).
inline QFIMatrix analytic_two_param_jmax(double x1, double x2, double t) {
  const double r2 = x1 * x1 + x2 * x2;
  if (r2 == 0.0) fail(ErrorCode::OriginSingularity, "analytic_two_param_jmax: undefined at x = 0");
  const double r = std::sqrt(r2);
  const double s2 = std::pow(std::sin(r * t), 2) / r2;
  QFIMatrix j(2, 2);
  j(0, 0) = 4.0 * (x1 * x1 * t * t / r2 + (x2 * x2 / r2) * s2);
  j(1, 1) = 4.0 * (x2 * x2 * t * t / r2 + (x1 * x1 / r2) * s2);
  j(0, 1) = j(1, 0) = 4.0 * (x1 * x2 / r2) * (t * t - s2);
  return j;
}

struct ExistenceReport {
  Existence verdict = Existence::Inconclusive;
  double max_trace_distance = 0.0;
  std::vector<ComplexMatrix> probes;  // optimal rho^S per direction
  ComplexMatrix consensus;            // mean of the probes
};

/// Axis and pairwise-diagonal displacements plus `random` seeded unit directions, all of length ~h.
inline std::vector<RealVector> default_directions(const RealVector& x, double h = 1e-2, int random = 3,
                                                  unsigned seed = 0) {
  const Eigen::Index m = x.size();
  const RealVector s = coordinate_steps(x, h);
  std::vector<RealVector> out;
  for (Eigen::Index i = 0; i < m; ++i) {
    RealVector d = RealVector::Zero(m);
    d(i) = s(i);
    out.push_back(d);
  }
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j)
      for (double pair : {1.0, -1.0}) {
        RealVector d = RealVector::Zero(m);
        d(i) = s(i);
        d(j) = pair * s(j);
        out.push_back(d);
      }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < random; ++k) {
    RealVector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = g(rng);
    out.push_back(s.cwiseProduct(v / v.norm()));
  }
  return out;
}

inline ExistenceReport existence_diagnostics(const ParamChannel& pch, const RealVector& x,
                                             const std::vector<RealVector>& directions) {
  maxqfim_detail::check_point(pch, x);
  const std::size_t m = static_cast<std::size_t>(pch.num_params());
  if (directions.size() < m * (m + 1) / 2)
    fail(ErrorCode::InvalidArgument, "existence_diagnostics: need at least m(m+1)/2 directions");
  const KrausChannel kx = pch.at(x);
  ExistenceReport rep;
  for (const auto& d : directions) {
    if (d.size() != x.size() || d.norm() == 0.0)
      fail(ErrorCode::InvalidArgument, "existence_diagnostics: directions must be nonzero m-vectors");
    rep.probes.push_back(fidelity_between(kx, pch.at(RealVector(x + d)), FidelitySide::Dual).probe_opt);
  }
  std::tie(rep.verdict, rep.max_trace_distance) = probe_agreement(rep.probes);
  rep.consensus = ComplexMatrix::Zero(pch.dim_in(), pch.dim_in());
  for (const auto& p : rep.probes) rep.consensus += p / static_cast<double>(rep.probes.size());
  return rep;
}

/// Purification (sqrt(rho) (x) I)|Omega> of rho on system (x) ancilla, dim_A = dim.
inline DensityMatrix purify(const ComplexMatrix& rho) {
  const Eigen::Index d = rho.rows();
  const ComplexMatrix r = linalg::psd_sqrt(rho);
  ComplexVector v(d * d);
  for (Eigen::Index s = 0; s < d; ++s)
    for (Eigen::Index a = 0; a < d; ++a) v(s * d + a) = r(s, a);
  return DensityMatrix::pure(v);
}

struct DominanceResult {
  double worst_min_eigenvalue = 0.0;
  bool pass = true;
  int samples = 0;
};

/// min over Haar-random purified probes of lambda_min(J^max - J(probe)).
inline DominanceResult verify_dominance(const QFIMatrix& jmax, const ParamChannel& pch, const RealVector& x,
                                        int samples = 200, double h = kDefaultProbeStep, unsigned seed = 0) {
  maxqfim_detail::check_point(pch, x);
  if (jmax.rows() != pch.num_params() || jmax.cols() != pch.num_params())
    fail(ErrorCode::DimMismatch, "verify_dominance: J^max has the wrong size");
  std::mt19937_64 rng(seed);
  DominanceResult out;
  out.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const DensityMatrix probe = random_purified_probe(pch.dim_in(), rng);
    const QFIMatrix j = qfim_of_probe(pch, x, probe, h);
    out.worst_min_eigenvalue = std::min(out.worst_min_eigenvalue, linalg::min_eigenvalue(RealMatrix(jmax - j)));
  }
  out.samples = samples;
  if (samples == 0) out.worst_min_eigenvalue = 0.0;
  out.pass = out.worst_min_eigenvalue >= -1e-6 * std::max(1.0, linalg::max_eigenvalue(jmax));
  return out;
}

namespace maxqfim_detail {

inline RealMatrix checked_inverse(const RealMatrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() == 0) fail(ErrorCode::DimMismatch, std::string(who) + ": matrix must be square");
  Eigen::FullPivLU<RealMatrix> lu(a);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  lu.setThreshold(1e-12);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300 * scale)
    fail(ErrorCode::SingularMatrix, std::string(who) + ": matrix is singular");
  return lu.inverse();
}

}  // namespace maxqfim_detail

struct GillMassarResult {
  double lhs = 0.0;
  bool satisfied = false;
};

/// lhs = Tr[J^-1 Cov^-1] / n against the separable-measurement limit dim - 1.
inline GillMassarResult gill_massar_check(const QFIMatrix& jmax, const CovarianceMatrix& cov, int n, int dim) {
  if (n < 1 || dim < 2) fail(ErrorCode::InvalidArgument, "gill_massar_check: need n >= 1 and dim >= 2");
  if (jmax.rows() != cov.rows()) fail(ErrorCode::DimMismatch, "gill_massar_check: J and Cov differ in size");
  const RealMatrix ji = maxqfim_detail::checked_inverse(jmax, "gill_massar_check(J)");
  const RealMatrix ci = maxqfim_detail::checked_inverse(cov, "gill_massar_check(Cov)");
  GillMassarResult r;
  r.lhs = (ji * ci).trace() / static_cast<double>(n);
  r.satisfied = r.lhs <= static_cast<double>(dim - 1) + 1e-9;
  return r;
}

struct TradeoffBounds {
  double var_product_bound = 0.0;  // lower bound on Cov_11 Cov_22
  double det_bound = 0.0;          // lower bound on det Cov
  RealVector per_param_bounds;     // lower bounds on Cov_11, Cov_22
};

inline TradeoffBounds tradeoff_bounds(const QFIMatrix& jmax, int n) {
  if (jmax.rows() != 2 || jmax.cols() != 2) fail(ErrorCode::DimMismatch, "tradeoff_bounds: J must be 2 x 2");
  if (n < 1) fail(ErrorCode::InvalidArgument, "tradeoff_bounds: n must be positive");
  const double det = jmax(0, 0) * jmax(1, 1) - jmax(0, 1) * jmax(1, 0);
  if (!(det > 1e-12 * std::max(1.0, jmax.cwiseAbs().maxCoeff() * jmax.cwiseAbs().maxCoeff())))
    fail(ErrorCode::SingularMatrix, "tradeoff_bounds: J is singular");
  const double nn = static_cast<double>(n);
  TradeoffBounds b;
  b.var_product_bound = 1.0 / (nn * nn * det);
  b.det_bound = b.var_product_bound;
  b.per_param_bounds = RealVector(2);
  b.per_param_bounds << jmax(1, 1) / (nn * det), jmax(0, 0) / (nn * det);
  return b;
}

/// True when cov respects every bound in b (relative slack tol).
inline bool tradeoff_holds(const TradeoffBounds& b, const CovarianceMatrix& cov, double tol = 1e-9) {
  const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
  return cov(0, 0) * cov(1, 1) >= b.var_product_bound * (1.0 - tol) && det >= b.det_bound * (1.0 - tol) &&
         cov(0, 0) >= b.per_param_bounds(0) * (1.0 - tol) && cov(1, 1) >= b.per_param_bounds(1) * (1.0 - tol);
}

}  // namespace maxqfi
