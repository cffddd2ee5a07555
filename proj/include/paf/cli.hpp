// Copyright 2026 The paf-retrieval Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "paf/experiments.hpp"
#include "paf/image_io.hpp"
#include "paf/results_io.hpp"
#include "paf/theory.hpp"

namespace paf {

/// Flag values for one subcommand. Defaults follow the reference protocol:
/// alpha = 1 (eps = b), 50 power iterations, mu = 2.5 for traces, mu = 1 and
/// T = 2500 for success rates.
struct CliOptions {
  std::size_t n = 128;
  double ratio = 4.5;
  std::string ratios = "1:6:0.25";
  std::size_t trials = 1;
  std::string solvers = "paf";
  double alpha = 1.0;
  double mu = 2.5;
  double mu_wf = 0.2;
  std::size_t max_iters = 2500;
  double tol = 1e-10;
  std::optional<double> noise_sigma;
  std::string field = "complex";
  std::size_t masks = 20;
  std::uint64_t seed = 1;
  std::string out = "paf_out";
  std::size_t threads = 0;
  std::size_t power_iters = 50;
  std::string image;
  double alpha_min = 0.37;
  double alpha_max = 29.0;
  std::size_t points = 100;
  std::size_t samples = 1000;
  std::size_t expectation_samples = 1000000;
  std::string checks = "all";
};

inline CliOptions cli_defaults(std::string_view subcommand) {
  CliOptions o;
  if (subcommand == "success-rate") {
    o.trials = 100;
    o.solvers = "paf,af,wf";
    o.mu = 1.0;
    o.tol = 1e-5;
  } else if (subcommand == "recover-image") {
    o.mu = 1.0;
    o.n = 0;
  } else if (subcommand == "validate") {
    o.n = 64;
    o.ratio = 50.0;
    o.alpha = 0.826;
  }
  return o;
}

/// Parses "a:b:step" (inclusive of b up to rounding) or a single value.
inline std::vector<double> parse_ratios(const std::string& text) {
  auto num = [&](const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument("bad ratio value '" + s + "' in '" + text + "'");
    return v;
  };
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(p);
  if (parts.size() == 1) return {num(parts[0])};
  if (parts.size() != 3) throw std::invalid_argument("ratios must be 'a:b:step' or a single value, got '" + text + "'");
  const double a = num(parts[0]), b = num(parts[1]), step = num(parts[2]);
  if (!(step > 0.0) || b < a) throw std::invalid_argument("ratios '" + text + "': need step > 0 and b >= a");
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  for (std::size_t i = 0; i < count; ++i) out.push_back(a + static_cast<double>(i) * step);
  return out;
}

/// Builds solver configs from a comma list. paf with alpha = 0 becomes af.
inline std::vector<SolverConfig> parse_solvers(const CliOptions& o, std::vector<std::string>& warnings,
                                               const GradientRegistry& registry = default_registry()) {
  std::vector<SolverConfig> out;
  std::stringstream ss(o.solvers);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (name == "paf") {
      if (o.alpha == 0.0) {
        warnings.emplace_back("alpha = 0 with paf is plain amplitude flow; running af");
        out.push_back(SolverConfig::af(o.mu));
      } else {
        out.push_back(SolverConfig::paf(o.alpha, o.mu));
      }
    } else if (name == "af") {
      out.push_back(SolverConfig::af(o.mu));
    } else if (name == "wf") {
      out.push_back(SolverConfig::wf(o.mu_wf));
    } else if (registry.contains(name)) {
      auto c = SolverConfig::plugin(name, o.mu);
      c.epsilon = EpsilonPolicy::scaled(o.alpha);
      out.push_back(c);
    } else {
      throw std::invalid_argument("unknown solver '" + name + "'");
    }
    out.back().max_iterations = o.max_iters;
    out.back().tolerance = o.tol;
    out.back().seed = o.seed;
  }
  if (out.empty()) throw std::invalid_argument("no solvers given");
  return out;
}

inline ExperimentPlan plan_from_options(const CliOptions& o, ExperimentKind kind, std::vector<std::string>& warnings) {
  ExperimentPlan plan;
  plan.experiment = kind;
  plan.n = o.n;
  plan.ratios = kind == ExperimentKind::success_rate ? parse_ratios(o.ratios) : std::vector<double>{o.ratio};
  plan.trials = o.trials;
  plan.solvers = parse_solvers(o, warnings);
  plan.noise_sigma = o.noise_sigma;
  plan.field = field_from_string(o.field);
  plan.master_seed = o.seed;
  plan.power_iterations = o.power_iters;
  plan.threads = o.threads;
  plan.validate();
  return plan;
}

inline nlohmann::json options_json(const CliOptions& o) {
  nlohmann::json j{{"n", o.n},         {"ratio", o.ratio},       {"ratios", o.ratios},
                   {"trials", o.trials}, {"solvers", o.solvers}, {"alpha", o.alpha},
                   {"mu", o.mu},       {"mu_wf", o.mu_wf},       {"max_iters", o.max_iters},
                   {"tol", o.tol},     {"field", o.field},       {"masks", o.masks},
                   {"seed", o.seed},   {"power_iters", o.power_iters}};
  j["noise_sigma"] = o.noise_sigma ? nlohmann::json(*o.noise_sigma) : nlohmann::json(nullptr);
  return j;
}

/// Every per-trial seed of a plan, for the manifest.
inline nlohmann::json trial_seeds_json(std::uint64_t master, std::size_t count) {
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t t = 0; t < count; ++t) {
    arr.push_back({{"trial", t},
                   {"truth", seed_schedule(master, t, SeedRole::truth)},
                   {"operator", seed_schedule(master, t, SeedRole::op)},
                   {"noise", seed_schedule(master, t, SeedRole::noise)},
                   {"init", seed_schedule(master, t, SeedRole::init)}});
  }
  return arr;
}

namespace detail {

inline std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os << std::setprecision(prec) << v;
  return os.str();
}

inline int cmd_converge(const CliOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto plan = plan_from_options(o, ExperimentKind::converge, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  const auto runs = run_convergence(plan);
  ResultSet rs;
  nlohmann::json summary = nlohmann::json::array();
  std::size_t failures = 0;
  double worst = 0.0;
  for (const auto& r : runs) {
    nlohmann::json row{{"solver", r.solver}, {"trial", r.trial}};
    if (r.trace) {
      std::ostringstream csv;
      write_trace_csv(csv, *r.trace);
      rs.files["trace_" + r.solver + "_" + std::to_string(r.trial) + ".csv"] = csv.str();
      const double e = r.trace->final_relative_error().value_or(std::nan(""));
      row["final_rel_err"] = e;
      row["iterations"] = r.trace->iterations_used;
      row["converged"] = r.trace->converged;
      worst = std::max(worst, e);
    } else {
      row["error"] = *r.error;
      ++failures;
    }
    summary.push_back(row);
  }
  rs.files["summary.json"] = summary.dump(2) + "\n";
  rs.manifest = make_manifest("converge", options_json(o), o.seed);
  rs.manifest["trial_seeds"] = trial_seeds_json(o.seed, plan.trials);
  rs.manifest["truth"] = "fresh unit-norm Gaussian signal per trial";
  if (!warnings.empty()) rs.manifest["warnings"] = warnings;
  write_results(o.out, rs);
  out << "converge: " << runs.size() << " runs, " << failures << " failed, worst final relative error "
      << fmt(worst) << ", results in " << o.out << '\n';
  return 0;
}

inline int cmd_success_rate(const CliOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto plan = plan_from_options(o, ExperimentKind::success_rate, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  const auto table = run_success_rate(plan);
  ResultSet rs;
  rs.files["trials.csv"] = success_trials_csv(table);
  std::ostringstream agg;
  agg << "solver,ratio,successes,trials,success_rate\n";
  for (const auto& r : table.rows)
    agg << r.solver << ',' << format_double(r.ratio) << ',' << r.successes << ',' << r.trials << ','
        << format_double(r.success_rate()) << '\n';
  rs.files["success_table.csv"] = agg.str();
  rs.files["success_table.json"] = success_table_json(table).dump(2) + "\n";
  rs.manifest = make_manifest("success-rate", options_json(o), o.seed);
  rs.manifest["trial_seeds"] = trial_seeds_json(o.seed, plan.ratios.size() * plan.trials);
  rs.manifest["trial_index"] = "global trial = ratio_index * trials + trial";
  rs.manifest["truth"] = "fresh unit-norm Gaussian signal per trial";
  if (!warnings.empty()) rs.manifest["warnings"] = warnings;
  write_results(o.out, rs);
  out << "success-rate: " << table.rows.size() << " rows over " << plan.ratios.size() << " ratios x "
      << plan.trials << " trials, results in " << o.out << '\n';
  return 0;
}

inline int cmd_recover_image(const CliOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  CliOptions single = o;
  single.solvers = o.solvers.find(',') == std::string::npos ? o.solvers : o.solvers.substr(0, o.solvers.find(','));
  const auto cfgs = parse_solvers(single, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  const Image img = o.image.empty() ? synthetic_gradient_image(64, 64, 3) : read_image(o.image);
  const auto rep = run_image_recovery(img, o.masks, cfgs.front(), o.seed, o.power_iters, o.threads);
  Image rec = img;
  for (std::size_t c = 0; c < rec.num_channels(); ++c)
    for (std::size_t p = 0; p < rec.pixels(); ++p)
      rec.channels[c][p] = std::clamp(rep.channels[c].recovered[p].real(), 0.0, 1.0);
  if (rec.maxval == 0) rec.maxval = 255;
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);
  const std::string ext = rec.num_channels() == 1 ? ".pgm" : ".ppm";
  write_image((dir / ("recovered" + ext)).string(), rec);
  ResultSet rs;
  rs.files["image_report.json"] = rep.to_json().dump(2) + "\n";
  nlohmann::json params = options_json(o);
  params["image"] = o.image.empty() ? "synthetic 64x64x3 gradient" : o.image;
  rs.manifest = make_manifest("recover-image", params, o.seed);
  rs.manifest["operator_seed"] = seed_schedule(o.seed, 0, SeedRole::op);
  nlohmann::json init_seeds = nlohmann::json::array();
  for (std::size_t c = 0; c < img.num_channels(); ++c) init_seeds.push_back(seed_schedule(o.seed, c, SeedRole::init));
  rs.manifest["init_seeds"] = init_seeds;
  rs.manifest["extra_files"] = {"recovered" + ext};
  write_results(o.out, rs);
  double worst = 0.0;
  for (const auto& c : rep.channels) worst = std::max(worst, c.relative_error);
  out << "recover-image: " << rep.channels.size() << " channels, L = " << o.masks << ", worst relative error "
      << fmt(worst) << ", results in " << o.out << '\n';
  return 0;
}

inline int cmd_beta_curve(const CliOptions& o, std::ostream& out, std::ostream&) {
  const auto grid = log_grid(o.alpha_min, o.alpha_max, o.points);
  std::ostringstream csv;
  csv << "alpha,beta,phi1,phi2\n";
  double best_a = 0.0, best_b = -1.0, min_b = std::numeric_limits<double>::infinity();
  for (double a : grid) {
    const auto c = theory_constants(a);
    csv << format_double(a) << ',' << format_double(c.beta_alpha) << ',' << format_double(c.phi1) << ','
        << format_double(c.phi2) << '\n';
    if (c.beta_alpha > best_b) {
      best_b = c.beta_alpha;
      best_a = a;
    }
    min_b = std::min(min_b, c.beta_alpha);
  }
  ResultSet rs;
  rs.files["beta_curve.csv"] = csv.str();
  nlohmann::json params{{"alpha_min", o.alpha_min}, {"alpha_max", o.alpha_max}, {"points", o.points}};
  rs.manifest = make_manifest("beta-curve", params, o.seed);
  write_results(o.out, rs);
  out << "beta-curve: " << grid.size() << " points, max beta " << fmt(best_b, 6) << " at alpha " << fmt(best_a)
      << ", min beta " << fmt(min_b, 4) << ", results in " << o.out << '\n';
  return 0;
}

inline int cmd_validate(const CliOptions& o, std::ostream& out, std::ostream& err) {
  const Field field = field_from_string(o.field);
  const std::size_t m = measurement_count(o.n, o.ratio);
  const bool all = o.checks == "all";
  auto want = [&](const char* name) { return all || o.checks.find(name) != std::string::npos; };
  nlohmann::json reports = nlohmann::json::array();
  bool pass = true;
  auto keep = [&](const Report& r) {
    for (const auto& w : r.warnings) err << "warning: " << r.name << ": " << w << '\n';
    out << r.name << ": " << (r.pass ? "pass" : "FAIL") << '\n';
    pass = pass && r.pass;
    reports.push_back(r.to_json());
  };
  if (want("smoothness"))
    keep(validate_smoothness(o.n, m, o.alpha, o.samples, o.seed, field, o.threads).report(o.n, m, o.alpha, o.seed));
  if (want("curvature"))
    keep(validate_curvature(o.n, m, o.alpha, o.samples, o.seed, field, o.threads).report(o.n, m, o.alpha, o.seed));
  if (want("hessian"))
    keep(validate_hessian_bound(o.n, m, o.alpha, o.seed, std::nullopt, field).report(o.n, m, o.alpha, o.seed));
  if (want("expectations"))
    for (double s : {0.0, 0.3, 0.7}) keep(appendix_expectations(s, o.expectation_samples, o.seed).report(o.seed));
  if (reports.empty()) throw std::invalid_argument("--checks selected nothing: '" + o.checks + "'");
  ResultSet rs;
  rs.files["validate.json"] = reports.dump(2) + "\n";
  nlohmann::json params = options_json(o);
  params["samples"] = o.samples;
  params["expectation_samples"] = o.expectation_samples;
  params["checks"] = o.checks;
  rs.manifest = make_manifest("validate", params, o.seed);
  write_results(o.out, rs);
  out << "validate: " << reports.size() << " reports, " << (pass ? "all pass" : "some FAIL") << ", results in "
      << o.out << '\n';
  return pass ? 0 : 3;
}

}  // namespace detail

/// Command-line entry point. Returns 0 on success, 2 on usage errors, 1 on
/// runtime errors and 3 when a validation check fails.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perturbed amplitude flow phase retrieval benchmarks", "paf"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    CliOptions opts;
    CLI::App* app = nullptr;
  };
  std::vector<Sub> subs{
      {"converge", "relative error traces for each solver", cli_defaults("converge")},
      {"success-rate", "success rate against the oversampling ratio m/n", cli_defaults("success-rate")},
      {"recover-image", "coded diffraction recovery of an image, channel by channel", cli_defaults("recover-image")},
      {"beta-curve", "curvature constant beta over a log grid of alpha", cli_defaults("beta-curve")},
      {"validate", "Monte-Carlo checks of the local smoothness and curvature bounds", cli_defaults("validate")},
  };
  const std::vector<std::string> fields{"real", "complex"};

  for (auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    s.app = sub;
    CliOptions& o = s.opts;
    const std::string name = s.name;
    sub->add_option("--seed", o.seed, "master seed")->capture_default_str();
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    if (name == "beta-curve") {
      sub->add_option("--alpha-min", o.alpha_min)->capture_default_str()->check(CLI::PositiveNumber);
      sub->add_option("--alpha-max", o.alpha_max)->capture_default_str()->check(CLI::PositiveNumber);
      sub->add_option("--points", o.points)->capture_default_str()->check(CLI::PositiveNumber);
      continue;
    }
    sub->add_option("--alpha", o.alpha, "eps = sqrt(alpha) b")->capture_default_str()->check(CLI::NonNegativeNumber);
    sub->add_option("--field", o.field)->capture_default_str()->check(CLI::IsMember(fields));
    sub->add_option("--threads", o.threads, "worker threads (0 = hardware)")->capture_default_str();
    if (name == "validate") {
      sub->add_option("--n", o.n)->capture_default_str()->check(CLI::PositiveNumber);
      sub->add_option("--ratio", o.ratio, "m/n")->capture_default_str()->check(CLI::PositiveNumber);
      sub->add_option("--samples", o.samples)->capture_default_str()->check(CLI::PositiveNumber);
      sub->add_option("--expectation-samples", o.expectation_samples)->capture_default_str();
      sub->add_option("--checks", o.checks, "all or a list of smoothness,curvature,hessian,expectations")
          ->capture_default_str();
      continue;
    }
    sub->add_option("--solvers", o.solvers, "comma list of paf, af, wf or plugin names")->capture_default_str();
    sub->add_option("--mu", o.mu, "step size for amplitude-type solvers")->capture_default_str();
    sub->add_option("--mu-wf", o.mu_wf, "step size for wf, in units of 1/||x||^2")->capture_default_str();
    sub->add_option("--max-iters", o.max_iters, "iteration budget T")->capture_default_str();
    sub->add_option("--tol", o.tol, "stop once relative error <= tol")->capture_default_str();
    sub->add_option("--power-iters", o.power_iters)->capture_default_str();
    if (name == "recover-image") {
      sub->add_option("--image", o.image, "PGM/PPM file (default: synthetic 64x64 RGB)");
      sub->add_option("--masks", o.masks, "number of octanary masks L")->capture_default_str()->check(
          CLI::PositiveNumber);
      continue;
    }
    sub->add_option("--n", o.n)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--trials", o.trials)->capture_default_str()->check(CLI::PositiveNumber);
    sub->add_option("--noise-sigma", o.noise_sigma, "additive noise std on magnitudes");
    if (name == "converge")
      sub->add_option("--ratio", o.ratio, "m/n")->capture_default_str()->check(CLI::PositiveNumber);
    else
      sub->add_option("--ratios", o.ratios, "a:b:step")->capture_default_str();
  }

  if (argc <= 1) {
    err << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  for (auto& s : subs) {
    if (!s.app->parsed()) continue;
    const std::string name = s.name;
    try {
      if (name == "converge") return detail::cmd_converge(s.opts, out, err);
      if (name == "success-rate") return detail::cmd_success_rate(s.opts, out, err);
      if (name == "recover-image") return detail::cmd_recover_image(s.opts, out, err);
      if (name == "beta-curve") return detail::cmd_beta_curve(s.opts, out, err);
      return detail::cmd_validate(s.opts, out, err);
    } catch (const std::invalid_argument& e) {
      err << "paf " << name << ": " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      err << "paf " << name << ": " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"paf"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace paf
