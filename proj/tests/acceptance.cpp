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

// Acceptance runner: one PASS/FAIL line per criterion, followed by the
// measured metrics. Exits 0 when every criterion passes or every failing
// criterion was named with --allow-fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxqfi/io.hpp"
#include "maxqfi/maxqfi.hpp"
#include "maxqfi/suites.hpp"

namespace {

using namespace maxqfi;
using nlohmann::json;
using suites::detail::vec2;

struct Outcome {
  bool pass = false;
  json details = json::object();
};

struct Criterion {
  int id;
  const char* title;
  double budget_s;  // 0 means unbounded
  std::function<Outcome()> run;
};

Outcome dephasing_grid() {
  Outcome o;
  const ParamChannel deph = dephasing_family();
  double rel = 0.0, off = 0.0;
  for (double eta : {0.2, 0.5, 0.8})
    for (double omega : {0.0, 0.3, 1.0}) {
      const QFIMatrix j = extract_maxqfim(deph, vec2(omega, eta)).jmax;
      const QFIMatrix want = analytic_dephasing_jmax(eta);
      for (int i = 0; i < 2; ++i) rel = std::max(rel, std::abs(j(i, i) / want(i, i) - 1.0));
      off = std::max({off, std::abs(j(0, 1)), std::abs(j(1, 0))});
    }
  o.pass = rel <= 1e-4 && off <= 1e-5;
  o.details = {{"max_rel_diag_error", rel}, {"max_abs_offdiag", off}};
  return o;
}

Outcome probe_recovery() {
  Outcome o{true};
  const ParamChannel deph = dephasing_family();
  double worst = 0.0;
  json verdicts = json::array();
  for (double eta : {0.2, 0.5, 0.8}) {
    const RealVector x = vec2(0.3, eta);
    for (const auto& d : extract_maxqfim(deph, x).per_direction)
      worst = std::max(worst, std::abs(d.probe(0, 0).real() - 0.5));
    const ExistenceReport e = existence_diagnostics(deph, x, default_directions(x));
    for (const auto& p : e.probes) worst = std::max(worst, std::abs(p(0, 0).real() - 0.5));
    verdicts.push_back(to_string(e.verdict));
    o.pass = o.pass && e.verdict == Existence::Confirmed;
  }
  o.pass = o.pass && worst <= 1e-4;
  o.details = {{"max_abs_rho11_minus_half", worst}, {"existence", verdicts}};
  return o;
}

Outcome two_param_unitary() {
  Outcome o;
  const ParamChannel rot = two_param_rotation_family(1.0);
  double unitary = 0.0, sdp = 0.0, probe = 0.0;
  for (double x1 : {0.3, 0.7})
    for (double x2 : {0.3, 0.7}) {
      const RealVector x = vec2(x1, x2);
      const QFIMatrix want = analytic_two_param_jmax(x1, x2, 1.0);
      unitary = std::max(unitary, (extract_maxqfim_unitary(rot, x).jmax - want).cwiseAbs().maxCoeff());
      sdp = std::max(sdp, suites::detail::entry_error(extract_maxqfim(rot, x).jmax, want));
      probe = std::max(probe, suites::detail::entry_error(qfim_of_probe(rot, x, maximally_entangled(2)), want));
    }
  o.pass = unitary <= 1e-10 && sdp <= 1e-3 && probe <= 1e-4;
  o.details = {{"unitary_max_abs_error", unitary}, {"sdp_max_rel_error", sdp}, {"entangled_probe_max_rel_error", probe}};
  return o;
}

Outcome from_suite(const suites::SuiteResult& r) { return {r.pass, r.details}; }

Outcome sql_machinery() {
  const suites::SuiteResult par = suites::parallel_suite({.q = suites::QChoice::Stated});
  Outcome o{par.pass, par.details};
  const CovarianceMatrix cov = sql_cov_bound(dephasing_q_stated(0.5), 10, 1);
  RealMatrix want = RealMatrix::Zero(2, 2);
  want(0, 0) = 0.08660;
  want(1, 1) = 0.17321;
  const double err = (cov - want).cwiseAbs().maxCoeff();
  o.pass = o.pass && err <= 1e-4;
  o.details["sql_cov_bound"] = {{"labels", dephasing_q_stated(0.5).labels},
                                {"rows", io::real_matrix_to_json(cov)},
                                {"max_abs_error", err}};
  return o;
}

Outcome single_parameter() {
  Outcome o;
  double err = 0.0;
  for (double t : {1.0, 2.0})
    err = std::max(err, std::abs(extract_maxqfim_unitary(z_rotation_family(t), RealVector::Constant(1, 0.4)).jmax(0, 0) -
                                 t * t));
  // The phase entry of the dephasing J^max tends to the noiseless value T^2 = 1.
  const double limit = analytic_dephasing_jmax(1.0 - 1e-9)(0, 0);
  o.pass = err <= 1e-8 && std::abs(limit - 1.0) <= 1e-8;
  o.details = {{"max_abs_error", err}, {"dephasing_phase_entry_near_eta_one", limit}};
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> allowed;
  for (int k = 1; k < argc; ++k) {
    const std::string a = argv[k];
    if (a == "--allow-fail" && k + 1 < argc) {
      allowed.insert(std::atoi(argv[++k]));
    } else {
      std::fprintf(stderr, "usage: %s [--allow-fail ID]...\n", argv[0]);
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "dephasing J^max on the (eta, omega) grid", 10.0, dephasing_grid},
      {2, "optimal probe recovery and existence", 0.0, probe_recovery},
      {3, "two-parameter unitary J^max", 20.0, two_param_unitary},
      {4, "primal-dual agreement", 0.0, [] { return from_suite(suites::duality_suite()); }},
      {5, "dominance over random purified probes", 60.0, [] { return from_suite(suites::dominance_suite()); }},
      {6, "Bures-QFIM consistency", 0.0, [] { return from_suite(suites::bures_suite()); }},
      {7, "SQL machinery with the stated Q", 120.0, sql_machinery},
      {8, "tradeoff checkers", 0.0, [] { return from_suite(suites::tradeoff_suite()); }},
      {9, "single-parameter sanity", 0.0, single_parameter},
  };

  int unexpected = 0;
  std::vector<int> failed;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const Error& e) {
      o.pass = false;
      o.details = {{"error", e.what()}};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = c.budget_s == 0.0 || secs < c.budget_s;
    const bool pass = o.pass && in_budget;
    o.details["seconds"] = secs;
    if (!in_budget) o.details["budget_seconds"] = c.budget_s;
    std::printf("criterion %d: %s  (%s, %.2f s)\n", c.id, pass ? "PASS" : "FAIL", c.title, secs);
    std::printf("  %s\n", o.details.dump().c_str());
    std::fflush(stdout);
    if (!pass) {
      failed.push_back(c.id);
      if (!allowed.count(c.id)) ++unexpected;
    }
  }
  std::printf("summary: %zu/%zu PASS", criteria.size() - failed.size(), criteria.size());
  if (!failed.empty()) {
    std::printf("; FAIL:");
    for (int id : failed) std::printf(" %d%s", id, allowed.count(id) ? " (allowed)" : "");
  }
  std::printf("\n");
  return unexpected == 0 ? 0 : 1;
}
