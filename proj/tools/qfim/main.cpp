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

// qfim: command-line front end for maximal QFIM extraction, SQL bounds and
// the verification suites. Reports are JSON; exit codes are
// 0 success, 1 verification failure, 2 input error, 3 solver failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxqfi/io.hpp"
#include "maxqfi/maxqfi.hpp"
#include "maxqfi/suites.hpp"

namespace {

using maxqfi::ErrorCode;
using maxqfi::fail;
using nlohmann::json;

enum Exit { kOk = 0, kVerifyFailed = 1, kInputError = 2, kSolverError = 3 };

struct RunConfig {
  std::string command;
  std::string builtin;
  std::string file;
  std::string x_csv;
  std::string params;
  double h = 1e-2;
  std::string richardson = "on";
  bool verify = false;
  int samples = -1;  // -1 selects the per-command default
  int big_n = 1;
  int small_n = 1;
  unsigned seed = 0;
  std::string out;
  std::string suite = "all";
  std::string q = "stated";
  std::string points;

  bool use_richardson() const { return richardson == "on"; }

  json echo() const {
    json j = {{"command", command}, {"h", h},         {"richardson", richardson}, {"verify", verify},
              {"N", big_n},         {"n", small_n},   {"seed", seed}};
    if (!builtin.empty()) j["builtin"] = builtin;
    if (!file.empty()) j["file"] = file;
    if (!x_csv.empty()) j["x"] = x_csv;
    if (!params.empty()) j["params"] = params;
    if (samples >= 0) j["samples"] = samples;
    if (command == "verify") j["suite"] = suite;
    if (command == "sql" || command == "verify") j["q"] = q;
    if (!points.empty()) j["points"] = points;
    return j;
  }
};

// ---------------------------------------------------------------------------
// Argument parsing helpers

std::map<std::string, double> parse_params(const std::string& s) {
  std::map<std::string, double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorCode::InvalidArgument, "--params: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    try {
      std::size_t used = 0;
      const double v = std::stod(item.substr(eq + 1), &used);
      if (used != item.size() - eq - 1) throw std::invalid_argument(item);
      out[key] = v;
    } catch (const std::logic_error&) {
      fail(ErrorCode::InvalidArgument, "--params: '" + item.substr(eq + 1) + "' is not a number");
    }
  }
  return out;
}

maxqfi::RealVector parse_csv(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      fail(ErrorCode::InvalidArgument, "--x: '" + item + "' is not a number");
    }
  }
  if (v.empty()) fail(ErrorCode::InvalidArgument, "--x: no coordinates given");
  return Eigen::Map<maxqfi::RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double take(std::map<std::string, double>& p, const std::string& key, std::optional<double> fallback) {
  const auto it = p.find(key);
  if (it == p.end()) {
    if (!fallback) fail(ErrorCode::InvalidArgument, "--params: missing required key '" + key + "'");
    return *fallback;
  }
  const double v = it->second;
  p.erase(it);
  return v;
}

void reject_leftovers(const std::map<std::string, double>& p) {
  if (!p.empty()) fail(ErrorCode::InvalidArgument, "--params: unknown key '" + p.begin()->first + "'");
}

// ---------------------------------------------------------------------------
// Channel resolution

struct Resolved {
  maxqfi::ParamChannel channel;
  maxqfi::RealVector x;
  std::optional<maxqfi::io::TabulatedData> table;
};

Resolved resolve_builtin(const RunConfig& cfg) {
  auto p = parse_params(cfg.params);
  if (cfg.builtin == "dephasing") {
    const double omega = take(p, "omega", 0.0);
    const double eta = take(p, "eta", std::nullopt);
    reject_leftovers(p);
    maxqfi::RealVector x(2);
    x << omega, eta;
    return {maxqfi::dephasing_family(), x, std::nullopt};
  }
  if (cfg.builtin == "two-param-rotation") {
    const double x1 = take(p, "x1", std::nullopt);
    const double x2 = take(p, "x2", std::nullopt);
    const double t = take(p, "T", 1.0);
    reject_leftovers(p);
    maxqfi::RealVector x(2);
    x << x1, x2;
    return {maxqfi::two_param_rotation_family(t), x, std::nullopt};
  }
  fail(ErrorCode::InvalidArgument, "unknown builtin '" + cfg.builtin + "'");
}

Resolved resolve(const RunConfig& cfg) {
  if (!cfg.builtin.empty() && !cfg.file.empty()) fail(ErrorCode::InvalidArgument, "give either --builtin or --file");
  if (!cfg.builtin.empty()) {
    if (!cfg.x_csv.empty()) fail(ErrorCode::InvalidArgument, "--x applies to --file channels; use --params for builtins");
    return resolve_builtin(cfg);
  }
  if (cfg.file.empty()) fail(ErrorCode::InvalidArgument, "select a channel with --builtin or --file");
  if (!cfg.params.empty()) fail(ErrorCode::InvalidArgument, "--params applies to builtins; use --x for --file channels");
  if (cfg.x_csv.empty()) fail(ErrorCode::InvalidArgument, "--file channels need --x");
  maxqfi::io::TabulatedData data = maxqfi::io::load_tabulated(cfg.file);
  const maxqfi::RealVector x = parse_csv(cfg.x_csv);
  if (x.size() != data.num_params)
    fail(ErrorCode::DimMismatch, "--x has " + std::to_string(x.size()) + " coordinates, file declares num_params = " +
                                     std::to_string(data.num_params));
  maxqfi::ParamChannel ch = maxqfi::io::tabulated_channel(data, cfg.file);
  return {std::move(ch), x, std::move(data)};
}

json labeled(const maxqfi::RealMatrix& m, const std::vector<std::string>& labels) {
  return {{"labels", labels}, {"rows", maxqfi::io::real_matrix_to_json(m)}};
}

json points_json(const std::vector<maxqfi::RealVector>& pts) {
  json a = json::array();
  for (const auto& p : pts) a.push_back(maxqfi::io::vector_to_json(p));
  return a;
}

// Points visited by verify_dominance: x +/- s e_i and x +/- s/2 e_i with s = 1e-3 max(1, |x_i|).
std::vector<maxqfi::RealVector> dominance_points(const maxqfi::RealVector& x) {
  std::vector<maxqfi::RealVector> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = maxqfi::kDefaultProbeStep * std::max(1.0, std::abs(x(i)));
    for (double f : {1.0, -1.0, 0.5, -0.5}) {
      maxqfi::RealVector y = x;
      y(i) += f * s;
      out.push_back(y);
    }
  }
  return out;
}

std::vector<maxqfi::RealVector> required_points(const RunConfig& cfg, const maxqfi::RealVector& x) {
  std::vector<maxqfi::RealVector> pts = maxqfi::extraction_points(x, cfg.h, cfg.use_richardson());
  if (cfg.verify)
    for (auto& p : dominance_points(x)) pts.push_back(std::move(p));
  std::vector<maxqfi::RealVector> unique;
  for (auto& p : pts) {
    bool seen = false;
    for (const auto& u : unique) seen = seen || maxqfi::io::same_point(u, p);
    if (!seen) unique.push_back(std::move(p));
  }
  return unique;
}

// ---------------------------------------------------------------------------
// Commands

json cmd_plan(const RunConfig& cfg) {
  if (!cfg.builtin.empty())
    fail(ErrorCode::BuiltinSelected, "plan is only needed for tabulated channels; builtins are evaluated directly");
  if (cfg.file.empty()) fail(ErrorCode::InvalidArgument, "plan needs --file");
  if (cfg.x_csv.empty()) fail(ErrorCode::InvalidArgument, "plan needs --x");
  const maxqfi::io::TabulatedData data = maxqfi::io::load_tabulated(cfg.file);
  const maxqfi::RealVector x = parse_csv(cfg.x_csv);
  if (x.size() != data.num_params)
    fail(ErrorCode::DimMismatch, "--x has " + std::to_string(x.size()) + " coordinates, file declares num_params = " +
                                     std::to_string(data.num_params));
  const auto pts = required_points(cfg, x);
  return {{"labels", data.param_names},
          {"count", pts.size()},
          {"points", points_json(pts)},
          {"missing", points_json(maxqfi::io::missing_points(data, pts))}};
}

json cmd_tabulate(const RunConfig& cfg) {
  if (cfg.builtin.empty()) fail(ErrorCode::InvalidArgument, "tabulate needs --builtin");
  if (cfg.points.empty()) fail(ErrorCode::InvalidArgument, "tabulate needs --points (a plan report)");
  const Resolved r = resolve_builtin(cfg);
  json plan = maxqfi::io::read_json_file(cfg.points);
  if (plan.contains("result")) plan = plan["result"];
  if (!plan.contains("points") || !plan["points"].is_array())
    fail(ErrorCode::SchemaError, cfg.points + ": $.points must be an array");
  std::vector<maxqfi::RealVector> pts;
  for (std::size_t k = 0; k < plan["points"].size(); ++k) {
    const json& p = plan["points"][k];
    const std::string where = "$.points[" + std::to_string(k) + "]";
    if (!p.is_array() || static_cast<int>(p.size()) != r.channel.num_params())
      fail(ErrorCode::SchemaError, cfg.points + ": " + where + " must hold " + std::to_string(r.channel.num_params()) +
                                       " numbers");
    maxqfi::RealVector v(r.channel.num_params());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!p[i].is_number()) fail(ErrorCode::SchemaError, cfg.points + ": " + where + "[" + std::to_string(i) + "] is not a number");
      v(static_cast<Eigen::Index>(i)) = p[i].get<double>();
    }
    pts.push_back(std::move(v));
  }
  return maxqfi::io::to_json(maxqfi::io::tabulate(r.channel, pts));
}

json cmd_max(const RunConfig& cfg, bool& verification_failed) {
  const Resolved r = resolve(cfg);
  const auto& labels = r.channel.labels();
  json rep;
  if (r.table) {
    const auto missing = maxqfi::io::missing_points(*r.table, required_points(cfg, r.x));
    if (!missing.empty()) {
      std::string msg = std::to_string(missing.size()) + " required point(s) absent from " + cfg.file + ":";
      for (const auto& p : missing) msg += " " + maxqfi::io::format_point(p);
      fail(ErrorCode::MissingPoints, msg);
    }
  }

  maxqfi::QFIMatrix jmax;
  // The eigen-angle path adapts its step, so it is only used for builtins
  // whose evaluator accepts any x; tables go through the planned grid.
  if (r.channel.is_unitary_family() && !r.table) {
    const maxqfi::UnitaryExtraction u = maxqfi::extract_maxqfim_unitary(r.channel, r.x, cfg.h);
    jmax = u.jmax;
    rep["method"] = "eigen-angle";
    rep["diagnostics"] = {{"h_used", u.h_used}, {"halvings", u.halvings}};
  } else {
    maxqfi::ExtractionOptions opt;
    opt.h = cfg.h;
    opt.richardson = cfg.use_richardson();
    const maxqfi::MaxQfimReport m = maxqfi::extract_maxqfim(r.channel, r.x, opt);
    jmax = m.jmax;
    json dirs = json::array();
    for (const auto& d : m.per_direction)
      dirs.push_back({{"dx", maxqfi::io::vector_to_json(d.dx)}, {"f_min", d.f_min}, {"bracket_gap", d.gap}, {"g", d.g}});
    rep["method"] = "fidelity-sdp";
    rep["diagnostics"] = {{"max_fidelity_gap", m.max_fidelity_gap},
                          {"clamped_eigenvalue", m.clamped_eigenvalue},
                          {"probe_spread", m.probe_spread},
                          {"directions", dirs}};
    if (r.table) {
      rep["existence"] = {{"verdict", maxqfi::to_string(m.existence)},
                          {"max_trace_distance", m.probe_spread},
                          {"source", "extraction-grid"}};
    }
  }
  rep["jmax"] = labeled(jmax, labels);
  rep["x"] = maxqfi::io::vector_to_json(r.x);

  if (!r.table) {
    const auto dirs = maxqfi::default_directions(r.x, cfg.h, 3, cfg.seed);
    const maxqfi::ExistenceReport e = maxqfi::existence_diagnostics(r.channel, r.x, dirs);
    rep["existence"] = {{"verdict", maxqfi::to_string(e.verdict)},
                        {"max_trace_distance", e.max_trace_distance},
                        {"probe", maxqfi::io::matrix_to_json(e.consensus)},
                        {"source", "axis-diagonal-random"}};
  }

  if (cfg.verify) {
    const int samples = cfg.samples >= 0 ? cfg.samples : 200;
    const maxqfi::DominanceResult d =
        maxqfi::verify_dominance(jmax, r.channel, r.x, samples, maxqfi::kDefaultProbeStep, cfg.seed);
    rep["dominance"] = {{"samples", d.samples}, {"worst_min_eigenvalue", d.worst_min_eigenvalue}, {"pass", d.pass}};
    if (!d.pass) {
      rep["existence"]["verdict"] = maxqfi::to_string(maxqfi::Existence::RefutedByDominance);
      verification_failed = true;
    }
  }
  return rep;
}

json cmd_sql(const RunConfig& cfg) {
  if (!cfg.file.empty()) fail(ErrorCode::UnsupportedChannel, "sql needs a W provider; only the dephasing builtin has one");
  if (cfg.builtin != "dephasing")
    fail(cfg.builtin.empty() ? ErrorCode::InvalidArgument : ErrorCode::UnsupportedChannel,
         "sql supports --builtin dephasing only");
  const Resolved r = resolve_builtin(cfg);
  const double eta = r.x(1);
  if (cfg.big_n < 1 || cfg.small_n < 1) fail(ErrorCode::InvalidArgument, "--N and --n must be positive");
  const maxqfi::QuadraticBound q =
      cfg.q == "corrected" ? maxqfi::dephasing_q_corrected(eta) : maxqfi::dephasing_q_stated(eta);
  json rep;
  rep["q_source"] = cfg.q;
  rep["Q"] = labeled(q.q, q.labels);
  rep["cov_bound"] = labeled(maxqfi::sql_cov_bound(q, cfg.big_n, cfg.small_n), q.labels);
  const maxqfi::QBoundCheck qb =
      maxqfi::q_bound_check(r.channel, maxqfi::dephasing_w_provider(), r.x, q, maxqfi::default_q_grid(2));
  rep["q_bound_check"] = {{"pass", qb.pass}, {"worst_excess", qb.worst_excess}, {"worst_slack", qb.worst_slack}};
  if (cfg.big_n <= 4) {
    const int samples = cfg.samples >= 0 ? cfg.samples : 50;
    const maxqfi::ParallelCapResult c =
        maxqfi::verify_parallel_qfim_cap(r.channel, r.x, q, cfg.big_n, samples, cfg.seed);
    rep["parallel_cap"] = {{"N", cfg.big_n}, {"samples", c.samples}, {"worst_ratio", c.worst_ratio}, {"pass", c.pass}};
  }
  return rep;
}

json cmd_verify(const RunConfig& cfg, bool& verification_failed) {
  namespace s = maxqfi::suites;
  const std::vector<std::string> all{"oracle", "duality", "dominance", "bures", "parallel", "tradeoff"};
  std::vector<std::string> chosen;
  if (cfg.suite == "all") {
    chosen = all;
  } else {
    std::stringstream ss(cfg.suite);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) chosen.push_back(item);
  }
  json out;
  if (!cfg.file.empty()) {
    const maxqfi::io::TabulatedData data = maxqfi::io::load_tabulated(cfg.file);
    out["file_check"] = {{"file", cfg.file}, {"num_params", data.num_params}, {"points", data.points.size()}};
  }
  json suites = json::array();
  for (const auto& name : chosen) {
    s::SuiteResult r;
    if (name == "oracle") {
      r = s::oracle_suite();
    } else if (name == "duality") {
      s::DualityOptions o;
      o.seed = cfg.seed;
      r = s::duality_suite(o);
    } else if (name == "dominance") {
      s::DominanceOptions o;
      o.seed = cfg.seed;
      if (cfg.samples >= 0) o.samples = cfg.samples;
      r = s::dominance_suite(o);
    } else if (name == "bures") {
      s::BuresOptions o;
      o.seed = cfg.seed;
      r = s::bures_suite(o);
    } else if (name == "parallel") {
      s::ParallelOptions o;
      o.seed = cfg.seed;
      o.q = cfg.q == "stated" ? s::QChoice::Stated : s::QChoice::Corrected;
      if (cfg.samples >= 0) o.samples = cfg.samples;
      r = s::parallel_suite(o);
    } else if (name == "tradeoff") {
      s::TradeoffOptions o;
      o.seed = cfg.seed;
      if (cfg.samples >= 0) o.samples = cfg.samples;
      r = s::tradeoff_suite(o);
    } else {
      fail(ErrorCode::InvalidArgument, "unknown suite '" + name + "'");
    }
    verification_failed = verification_failed || !r.pass;
    suites.push_back({{"name", r.name}, {"pass", r.pass}, {"details", r.details}});
  }
  out["suites"] = suites;
  out["pass"] = !verification_failed;
  return out;
}

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoConvergence:
    case ErrorCode::SolverFailure:
    case ErrorCode::StepTooLarge:
    case ErrorCode::NegativeEigenvalue:
    case ErrorCode::BranchAmbiguity:
    case ErrorCode::SpreadExceedsPi:
    case ErrorCode::SingularMatrix:
    case ErrorCode::SingularQFIM:
    case ErrorCode::NotPSD:
      return kSolverError;
    default:
      return kInputError;
  }
}

void add_channel_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--builtin", cfg.builtin, "Built-in family")->check(CLI::IsMember({"dephasing", "two-param-rotation"}));
  sub->add_option("--file", cfg.file, "Tabulated channel JSON");
  sub->add_option("--x", cfg.x_csv, "Parameter point for --file channels (comma separated)");
  sub->add_option("--params", cfg.params, "Builtin parameters k=v,... (dephasing: omega, eta; rotation: x1, x2, T)");
}

void add_common_options(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  sub->add_option("--out", cfg.out, "Write the report here instead of stdout");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{"qfim: maximal quantum Fisher information of parameterized channels"};
  // --h is the extraction step, so help is long-form only.
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(maxqfi::kVersion));

  auto* plan = app.add_subcommand("plan", "List the parameter points a tabulated channel must provide");
  auto* tab = app.add_subcommand("tabulate", "Evaluate a builtin at the points of a plan and write a channel file");
  auto* max = app.add_subcommand("max", "Compute J^max");
  auto* sql = app.add_subcommand("sql", "Standard-quantum-limit bound for the dephasing builtin");
  auto* verify = app.add_subcommand("verify", "Run the property suites");

  for (auto* sub : {plan, max}) {
    add_channel_options(sub, cfg);
    sub->add_option("--h", cfg.h, "Extraction step")->capture_default_str();
    sub->add_option("--richardson", cfg.richardson, "Richardson extrapolation")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    sub->add_flag("--verify", cfg.verify, "Check dominance against random probes");
  }
  max->add_option("--samples", cfg.samples, "Dominance samples (default 200)");
  tab->add_option("--builtin", cfg.builtin, "Built-in family")
      ->required()
      ->check(CLI::IsMember({"dephasing", "two-param-rotation"}));
  tab->add_option("--params", cfg.params, "Builtin parameters k=v,...");
  tab->add_option("--points", cfg.points, "Plan report whose points to evaluate")->required();
  add_channel_options(sql, cfg);
  sql->add_option("--N", cfg.big_n, "Parallel channel uses")->capture_default_str();
  sql->add_option("--n", cfg.small_n, "Repetitions")->capture_default_str();
  sql->add_option("--samples", cfg.samples, "Probe samples for the parallel cap (default 50)");
  sql->add_option("--q", cfg.q, "Quadratic bound: stated or corrected")->check(CLI::IsMember({"stated", "corrected"}));
  verify->add_option("--suite", cfg.suite, "all or a comma list of: oracle, duality, dominance, bures, parallel, tradeoff")
      ->capture_default_str();
  verify->add_option("--samples", cfg.samples, "Override sample counts");
  verify->add_option("--file", cfg.file, "Also validate this channel file against the schema");
  verify->add_option("--q", cfg.q, "Quadratic bound for the parallel suite (default corrected)")
      ->check(CLI::IsMember({"stated", "corrected"}));
  for (auto* sub : {plan, tab, max, sql, verify}) add_common_options(sub, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }
  if (verify->parsed() && verify->count("--q") == 0) cfg.q = "corrected";
  cfg.command = app.get_subcommands().front()->get_name();

  const auto start = std::chrono::steady_clock::now();
  bool verification_failed = false;
  json result;
  try {
    if (cfg.command == "plan") {
      result = cmd_plan(cfg);
    } else if (cfg.command == "tabulate") {
      result = cmd_tabulate(cfg);
    } else if (cfg.command == "max") {
      result = cmd_max(cfg, verification_failed);
    } else if (cfg.command == "sql") {
      result = cmd_sql(cfg);
    } else {
      result = cmd_verify(cfg, verification_failed);
    }
  } catch (const maxqfi::Error& e) {
    std::cerr << "qfim " << cfg.command << ": " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qfim " << cfg.command << ": " << e.what() << "\n";
    return kSolverError;
  }

  json doc;
  if (cfg.command == "tabulate") {
    doc = std::move(result);
  } else {
    doc = {{"tool", "qfim"}, {"version", maxqfi::kVersion}, {"config", cfg.echo()}, {"result", std::move(result)}};
    doc["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  const std::string text = doc.dump(2) + "\n";
  if (cfg.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(cfg.out);
    if (!f) {
      std::cerr << "qfim: cannot write " << cfg.out << "\n";
      return kInputError;
    }
    f << text;
  }
  return verification_failed ? kVerifyFailed : kOk;
}
