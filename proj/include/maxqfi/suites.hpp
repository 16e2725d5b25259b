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

// Property suites shared by `qfim verify` and the acceptance runner. Each
// suite returns a verdict plus a JSON object of the metrics it measured.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxqfi/chandist.hpp"
#include "maxqfi/channels.hpp"
#include "maxqfi/maxqfim.hpp"
#include "maxqfi/qfim.hpp"
#include "maxqfi/random.hpp"
#include "maxqfi/scaling.hpp"

namespace maxqfi::suites {

using nlohmann::json;

struct SuiteResult {
  std::string name;
  bool pass = true;
  json details = json::object();
  double seconds = 0.0;
};

namespace detail {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline RealVector vec2(double a, double b) {
  RealVector v(2);
  v << a, b;
  return v;
}

/// Largest entrywise relative error; entries with |want| below `abs_floor` are compared absolutely.
inline double entry_error(const RealMatrix& got, const RealMatrix& want, double abs_floor = 1e-12) {
  double e = 0.0;
  for (Eigen::Index i = 0; i < want.rows(); ++i)
    for (Eigen::Index j = 0; j < want.cols(); ++j) {
      const double w = want(i, j);
      const double d = std::abs(got(i, j) - w);
      e = std::max(e, std::abs(w) > abs_floor ? d / std::abs(w) : d);
    }
  return e;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct OracleOptions {
  std::vector<double> etas{0.2, 0.5, 0.8};
  std::vector<double> omegas{0.0, 0.3, 1.0};
  std::vector<double> rotation_coords{0.3, 0.7};
  double rotation_t = 1.0;
  double rel_tol = 1e-4;
  double offdiag_tol = 1e-5;
  double unitary_tol = 1e-10;
};

/// extract_maxqfim against the closed forms of both built-ins, plus the eigen-angle path.
inline SuiteResult oracle_suite(const OracleOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"oracle"};
  const ParamChannel deph = dephasing_family();
  double deph_diag = 0.0, deph_off = 0.0;
  for (double eta : o.etas)
    for (double omega : o.omegas) {
      const QFIMatrix j = extract_maxqfim(deph, detail::vec2(omega, eta)).jmax;
      const QFIMatrix want = analytic_dephasing_jmax(eta);
      deph_diag = std::max({deph_diag, std::abs(j(0, 0) / want(0, 0) - 1.0), std::abs(j(1, 1) / want(1, 1) - 1.0)});
      deph_off = std::max({deph_off, std::abs(j(0, 1)), std::abs(j(1, 0))});
    }
  const ParamChannel rot = two_param_rotation_family(o.rotation_t);
  double rot_sdp = 0.0, rot_unitary = 0.0;
  for (double x1 : o.rotation_coords)
    for (double x2 : o.rotation_coords) {
      const RealVector x = detail::vec2(x1, x2);
      const QFIMatrix want = analytic_two_param_jmax(x1, x2, o.rotation_t);
      rot_sdp = std::max(rot_sdp, detail::entry_error(extract_maxqfim(rot, x).jmax, want));
      rot_unitary = std::max(rot_unitary, detail::entry_error(extract_maxqfim_unitary(rot, x).jmax, want));
    }
  r.pass = deph_diag <= o.rel_tol && deph_off <= o.offdiag_tol && rot_sdp <= o.rel_tol && rot_unitary <= o.unitary_tol;
  r.details = {{"dephasing_max_rel_diag_error", deph_diag},
               {"dephasing_max_abs_offdiag", deph_off},
               {"rotation_sdp_max_rel_error", rot_sdp},
               {"rotation_unitary_max_rel_error", rot_unitary}};
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------

struct DualityOptions {
  int random_channels = 20;
  double tol = 1e-8;
  unsigned seed = 0;
};

/// Primal and dual fidelity SDPs on both built-ins and random rank-2 qubit pairs.
inline SuiteResult duality_suite(const DualityOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"duality"};
  std::vector<std::pair<KrausChannel, KrausChannel>> corpus;
  const ParamChannel deph = dephasing_family();
  for (double eta : {0.2, 0.5, 0.8})
    for (double omega : {0.0, 0.3, 1.0}) {
      const RealVector x = detail::vec2(omega, eta);
      for (const RealVector& d : {detail::vec2(0.05, 0.0), detail::vec2(0.0, 0.05), detail::vec2(0.3, -0.1)})
        corpus.emplace_back(deph.at(x), deph.at(RealVector(x + d)));
    }
  const ParamChannel rot = two_param_rotation_family(1.0);
  for (double x1 : {0.3, 0.7})
    for (double x2 : {0.3, 0.7}) {
      const RealVector x = detail::vec2(x1, x2);
      for (const RealVector& d : {detail::vec2(0.05, 0.0), detail::vec2(0.0, 0.05)})
        corpus.emplace_back(rot.at(x), rot.at(RealVector(x + d)));
    }
  std::mt19937_64 rng(o.seed);
  for (int k = 0; k < o.random_channels; ++k) {
    KrausChannel a = random::kraus_channel(2, 2, 2, rng);
    KrausChannel b = random::kraus_channel(2, 2, 2, rng);
    corpus.emplace_back(std::move(a), std::move(b));
  }

  double worst_gap = 0.0, worst_agreement = 0.0;
  for (const auto& [a, b] : corpus) {
    const FidelityResult p = min_fidelity_primal(a, b);
    const FidelityResult d = min_fidelity_dual(a, b);
    worst_gap = std::max({worst_gap, p.gap, d.gap});
    worst_agreement = std::max(worst_agreement, std::abs(p.f_min - d.f_min));
  }
  r.pass = worst_gap <= o.tol && worst_agreement <= o.tol;
  r.details = {{"instances", corpus.size()}, {"max_bracket_gap", worst_gap}, {"max_primal_dual_difference", worst_agreement}};
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------

struct DominanceOptions {
  int samples = 200;
  unsigned seed = 0;
};

/// J^max against Haar-random purified probes for each built-in.
inline SuiteResult dominance_suite(const DominanceOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"dominance"};
  struct Case {
    const char* name;
    ParamChannel ch;
    RealVector x;
  };
  const std::vector<Case> cases{{"dephasing", dephasing_family(), detail::vec2(0.3, 0.5)},
                                {"two-param-rotation", two_param_rotation_family(1.0), detail::vec2(0.7, 0.3)}};
  for (const auto& c : cases) {
    const QFIMatrix jmax = extract_maxqfim(c.ch, c.x).jmax;
    const DominanceResult d = verify_dominance(jmax, c.ch, c.x, o.samples, kDefaultProbeStep, o.seed);
    r.pass = r.pass && d.pass;
    r.details[c.name] = {{"samples", d.samples}, {"worst_min_eigenvalue", d.worst_min_eigenvalue}, {"pass", d.pass}};
  }
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------

struct BuresOptions {
  int families = 10;
  double step = 1e-2;
  double ratio_tol = 0.3;  // relative deviation allowed around 8
  int candidate_directions = 4;
  unsigned seed = 0;
};

/// For random smooth qubit state families rho_x = (K_x (x) I)(probe), the
/// residual |8 (1 - F) - dx^T J dx| must shrink by 8 when dx halves.
inline SuiteResult bures_suite(const BuresOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"bures"};
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  json ratios = json::array();
  double worst = 0.0;
  for (int k = 0; k < o.families; ++k) {
    const ParamChannel fam = random::channel_family(2, 2, 2, rng);
    const DensityMatrix probe = random::mixed_state(4, rng);
    RealVector x(2);
    x << 0.1 * g(rng), 0.1 * g(rng);
    const QFIMatrix j = qfim_of_probe(fam, x, probe);
    // The cubic term of the residual is proportional to d/ds v^T J(x + s v) v.
    // Along a direction where that derivative nearly vanishes the quartic term
    // dominates and the ratio tends to 16, so take the steepest of a few candidates.
    RealVector v(2);
    double best = -1.0;
    for (int c = 0; c < o.candidate_directions; ++c) {
      RealVector u(2);
      u << g(rng), g(rng);
      u.normalize();
      const double dj = u.dot((qfim_of_probe(fam, RealVector(x + 1e-3 * u), probe) -
                               qfim_of_probe(fam, RealVector(x - 1e-3 * u), probe)) * u) / 2e-3;
      const double score = std::abs(dj) / u.dot(j * u);
      if (score > best) {
        best = score;
        v = u;
      }
    }
    const DensityMatrix rho = DensityMatrix::trusted(extended_output(fam, x, probe.matrix()));
    auto residual = [&](double s) {
      const RealVector dx = s * v;
      const DensityMatrix rho2 = DensityMatrix::trusted(extended_output(fam, RealVector(x + dx), probe.matrix()));
      return std::abs(8.0 * (1.0 - fidelity(rho, rho2)) - dx.dot(j * dx));
    };
    const double ratio = residual(o.step) / residual(0.5 * o.step);
    ratios.push_back(ratio);
    worst = std::max(worst, std::abs(ratio / 8.0 - 1.0));
  }
  r.pass = worst <= o.ratio_tol;
  r.details = {{"ratios", ratios}, {"worst_relative_deviation_from_8", worst}};
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------

enum class QChoice { Stated, Corrected };

struct ParallelOptions {
  QChoice q = QChoice::Corrected;
  std::vector<double> etas{0.3, 0.5, 0.8};
  std::vector<int> ns{1, 2, 3, 4};
  int samples = 50;
  unsigned seed = 0;
};

inline QuadraticBound dephasing_q(QChoice c, double eta) {
  return c == QChoice::Stated ? dephasing_q_stated(eta) : dephasing_q_corrected(eta);
}

/// q_bound_check and the N-fold QFIM cap J <= 8 N Q for the dephasing built-in.
inline SuiteResult parallel_suite(const ParallelOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"parallel"};
  r.details["q"] = o.q == QChoice::Stated ? "stated" : "corrected";
  const ParamChannel deph = dephasing_family();
  json per_eta = json::array();
  for (double eta : o.etas) {
    const RealVector x = detail::vec2(0.0, eta);
    const QuadraticBound q = dephasing_q(o.q, eta);
    const QBoundCheck qb = q_bound_check(deph, dephasing_w_provider(), x, q, default_q_grid(2));
    json caps = json::array();
    bool caps_ok = true;
    for (int n : o.ns) {
      const ParallelCapResult c = verify_parallel_qfim_cap(deph, x, q, n, o.samples, o.seed);
      caps_ok = caps_ok && c.pass;
      caps.push_back({{"N", n}, {"worst_ratio", c.worst_ratio}, {"pass", c.pass}});
    }
    r.pass = r.pass && qb.pass && caps_ok;
    per_eta.push_back({{"eta", eta},
                       {"q_bound_pass", qb.pass},
                       {"q_bound_worst_excess", qb.worst_excess},
                       {"q_bound_worst_slack", qb.worst_slack},
                       {"caps", caps}});
  }
  r.details["per_eta"] = per_eta;
  r.seconds = sw.seconds();
  return r;
}

// ---------------------------------------------------------------------------

struct TradeoffOptions {
  int samples = 100;
  int n = 1;
  unsigned seed = 0;
};

/// Gill-Massar values at Cov = J^-1/n and 2 J^-1/n, and the bounds over random admissible covariances.
inline SuiteResult tradeoff_suite(const TradeoffOptions& o = {}) {
  detail::Stopwatch sw;
  SuiteResult r{"tradeoff"};
  const QFIMatrix jmax = analytic_two_param_jmax(0.7, 0.3, 1.0);
  const CovarianceMatrix c1 = crb(jmax, o.n);
  const GillMassarResult at_crb = gill_massar_check(jmax, c1, o.n, 2);
  const GillMassarResult at_twice = gill_massar_check(jmax, CovarianceMatrix(2.0 * c1), o.n, 2);
  const bool gm_ok = std::abs(at_crb.lhs - 2.0) <= 1e-9 && !at_crb.satisfied && std::abs(at_twice.lhs - 1.0) <= 1e-9 &&
                     at_twice.satisfied;
  const TradeoffBounds b = tradeoff_bounds(jmax, o.n);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> g(0.0, 1.0);
  int held = 0;
  for (int k = 0; k < o.samples; ++k) {
    RealMatrix a(2, 2);
    a << g(rng), g(rng), g(rng), g(rng);
    const CovarianceMatrix cov = c1 + 0.1 * a * a.transpose();
    held += tradeoff_holds(b, cov) ? 1 : 0;
  }
  r.pass = gm_ok && held == o.samples;
  r.details = {{"gill_massar_lhs_at_crb", at_crb.lhs},
               {"gill_massar_lhs_at_twice_crb", at_twice.lhs},
               {"bounds_held", held},
               {"samples", o.samples}};
  r.seconds = sw.seconds();
  return r;
}

}  // namespace maxqfi::suites
