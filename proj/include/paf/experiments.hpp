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
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paf/image_io.hpp"
#include "paf/initializer.hpp"
#include "paf/measurements.hpp"
#include "paf/parallel.hpp"
#include "paf/rng.hpp"
#include "paf/solvers.hpp"

namespace paf {

/// Independent random streams consumed by one trial.
enum class SeedRole { truth, op, noise, init };

inline std::string_view to_string(SeedRole r) {
  switch (r) {
    case SeedRole::truth: return "truth";
    case SeedRole::op: return "operator";
    case SeedRole::noise: return "noise";
    case SeedRole::init: return "init";
  }
  return "?";
}

inline std::uint64_t seed_schedule(std::uint64_t master_seed, std::uint64_t trial, SeedRole role) {
  return derive_seed(master_seed, trial, to_string(role));
}

enum class ExperimentKind { converge, success_rate, image, beta_curve, validate };

struct ExperimentPlan {
  ExperimentKind experiment = ExperimentKind::converge;
  std::size_t n = 128;
  std::vector<double> ratios{4.5};
  std::size_t trials = 1;
  std::vector<SolverConfig> solvers;
  std::optional<double> noise_sigma;
  Field field = Field::complex;
  std::uint64_t master_seed = 1;
  std::size_t power_iterations = 50;
  std::size_t threads = 0;

  void validate() const {
    if (n < 1) throw std::invalid_argument("ExperimentPlan: n must be >= 1");
    if (trials < 1) throw std::invalid_argument("ExperimentPlan: trials must be >= 1");
    if (ratios.empty()) throw std::invalid_argument("ExperimentPlan: ratios must be nonempty");
    for (double r : ratios)
      if (!(r > 0.0)) throw std::invalid_argument("ExperimentPlan: ratios must be positive");
    if (solvers.empty()) throw std::invalid_argument("ExperimentPlan: no solvers configured");
    for (const auto& s : solvers) s.validate();
  }
};

inline std::size_t measurement_count(std::size_t n, double ratio) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
}

/// Everything a trial's solvers share: truth, operator, data and start point.
struct TrialInstance {
  std::uint64_t trial = 0;
  Signal x;
  MeasurementOperator op;
  PhaselessData data;
  Signal z0;
};

/// Builds the instance for global trial index `trial`: unit-norm Gaussian
/// truth, fresh Gaussian operator, |Ax| (+ noise), spectral initial point.
inline TrialInstance make_trial(const ExperimentPlan& plan, double ratio, std::uint64_t trial) {
  const std::size_t m = measurement_count(plan.n, ratio);
  Rng truth_rng(seed_schedule(plan.master_seed, trial, SeedRole::truth));
  Signal x(truth_rng.unit_vector(plan.n, plan.field), plan.field);
  auto op = sample_gaussian(m, plan.n, plan.field, seed_schedule(plan.master_seed, trial, SeedRole::op));
  auto data = magnitudes(op, x);
  if (plan.noise_sigma && *plan.noise_sigma > 0.0)
    data = add_noise(data, *plan.noise_sigma, seed_schedule(plan.master_seed, trial, SeedRole::noise));
  InitConfig init;
  init.power_iterations = plan.power_iterations;
  init.seed = seed_schedule(plan.master_seed, trial, SeedRole::init);
  Signal z0 = spectral_init(op, data, init);
  return {trial, std::move(x), std::move(op), std::move(data), std::move(z0)};
}

/// Solver config with its nominal step converted to the instance's units.
inline SolverConfig scaled_config(const SolverConfig& cfg, const MeasurementOperator& op, const PhaselessData& data) {
  SolverConfig out = cfg;
  out.step_size = scaled_step_size(cfg.kind, cfg.step_size, op, data);
  return out;
}

struct SolverRun {
  std::string solver;
  std::uint64_t trial = 0;
  std::optional<SolveTrace> trace;
  std::optional<std::string> error;
};

/// Convergence traces: per trial, every solver runs on the same instance with
/// the truth supplied. Solver failures are recorded and the run continues.
inline std::vector<SolverRun> run_convergence(const ExperimentPlan& plan,
                                              const GradientRegistry& registry = default_registry()) {
  plan.validate();
  if (plan.ratios.size() != 1) throw std::invalid_argument("run_convergence: exactly one ratio expected");
  const std::size_t ns = plan.solvers.size();
  std::vector<SolverRun> runs(plan.trials * ns);
  parallel_for(plan.trials, [&](std::size_t t) {
    const TrialInstance inst = make_trial(plan, plan.ratios.front(), t);
    for (std::size_t s = 0; s < ns; ++s) {
      SolverRun& run = runs[t * ns + s];
      run.solver = plan.solvers[s].label();
      run.trial = t;
      try {
        run.trace = solve(inst.op, inst.data, inst.z0, scaled_config(plan.solvers[s], inst.op, inst.data), inst.x,
                          registry);
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  }, plan.threads);
  return runs;
}

struct TrialOutcome {
  std::string solver;
  double ratio = 0.0;
  std::uint64_t trial = 0;  // index within the ratio
  bool success = false;
  double final_rel_err = std::numeric_limits<double>::quiet_NaN();
  std::size_t iters = 0;
};

struct SuccessRow {
  std::string solver;
  double ratio = 0.0;
  std::size_t successes = 0;
  std::size_t trials = 0;
  [[nodiscard]] double success_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
  }
};

struct SuccessTable {
  std::vector<SuccessRow> rows;
  std::vector<TrialOutcome> outcomes;
  double threshold = 1e-5;

  [[nodiscard]] const SuccessRow& row(const std::string& solver, double ratio) const {
    for (const auto& r : rows)
      if (r.solver == solver && std::abs(r.ratio - ratio) < 1e-12) return r;
    throw std::out_of_range("SuccessTable: no row for " + solver);
  }
};

/// Success-rate sweep. A trial succeeds iff the final relative error is at
/// most 1e-5; divergence counts as failure. At each (ratio, trial) all solvers
/// see the identical instance.
inline SuccessTable run_success_rate(const ExperimentPlan& plan, const GradientRegistry& registry = default_registry()) {
  plan.validate();
  constexpr double kThreshold = 1e-5;
  const std::size_t nr = plan.ratios.size(), ns = plan.solvers.size();
  std::vector<TrialOutcome> outcomes(nr * plan.trials * ns);
  parallel_for(nr * plan.trials, [&](std::size_t item) {
    const std::size_t ri = item / plan.trials, t = item % plan.trials;
    const double ratio = plan.ratios[ri];
    const TrialInstance inst = make_trial(plan, ratio, item);
    for (std::size_t s = 0; s < ns; ++s) {
      TrialOutcome& o = outcomes[item * ns + s];
      o.solver = plan.solvers[s].label();
      o.ratio = ratio;
      o.trial = t;
      try {
        SolverConfig cfg = scaled_config(plan.solvers[s], inst.op, inst.data);
        cfg.tolerance = std::min(cfg.tolerance, kThreshold);
        const SolveTrace tr = solve(inst.op, inst.data, inst.z0, cfg, inst.x, registry);
        o.final_rel_err = tr.final_relative_error().value_or(std::numeric_limits<double>::quiet_NaN());
        o.iters = tr.iterations_used;
        o.success = o.final_rel_err <= kThreshold;
      } catch (const DivergenceError& e) {
        o.iters = e.iteration();
        o.success = false;
      }
    }
  }, plan.threads);

  SuccessTable table;
  table.threshold = kThreshold;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t ri = 0; ri < nr; ++ri) {
      SuccessRow row{plan.solvers[s].label(), plan.ratios[ri], 0, plan.trials};
      for (std::size_t t = 0; t < plan.trials; ++t)
        if (outcomes[(ri * plan.trials + t) * ns + s].success) ++row.successes;
      table.rows.push_back(row);
    }
  }
  table.outcomes = std::move(outcomes);
  return table;
}

struct ChannelResult {
  double relative_error = 0.0;
  std::size_t iterations = 0;
  std::optional<std::size_t> iterations_to_1e5;
  std::optional<std::size_t> iterations_to_1e10;
  Signal recovered;  // phase-aligned to the truth
};

struct ImageReport {
  std::size_t width = 0, height = 0, masks = 0;
  std::uint64_t seed = 0;
  std::vector<ChannelResult> channels;
  nlohmann::json operator_descriptor;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j{{"width", width}, {"height", height}, {"L", masks}, {"seed", seed},
                     {"operator", operator_descriptor}};
    j["channels"] = nlohmann::json::array();
    for (const auto& c : channels) {
      nlohmann::json cj{{"relative_error", c.relative_error}, {"iterations", c.iterations}};
      cj["iterations_to_1e-5"] = c.iterations_to_1e5 ? nlohmann::json(*c.iterations_to_1e5) : nlohmann::json(nullptr);
      cj["iterations_to_1e-10"] =
          c.iterations_to_1e10 ? nlohmann::json(*c.iterations_to_1e10) : nlohmann::json(nullptr);
      j["channels"].push_back(cj);
    }
    return j;
  }
};

/// Coded-diffraction recovery of every channel with one shared set of L
/// octanary masks (2-D unitary DFT over the image grid).
inline ImageReport run_image_recovery(const Image& image, std::size_t L, const SolverConfig& cfg, std::uint64_t seed,
                                      std::size_t power_iterations = 50, std::size_t threads = 0,
                                      const GradientRegistry& registry = default_registry()) {
  if (L < 1) throw std::invalid_argument("run_image_recovery: L must be >= 1");
  if (image.num_channels() == 0 || image.pixels() == 0) throw std::invalid_argument("run_image_recovery: empty image");
  cfg.validate();
  const auto op = sample_octanary_masks(image.height, image.width, L, seed_schedule(seed, 0, SeedRole::op));
  ImageReport rep;
  rep.width = image.width;
  rep.height = image.height;
  rep.masks = L;
  rep.seed = seed;
  rep.operator_descriptor = op.descriptor();
  rep.channels.resize(image.num_channels());
  parallel_for(image.num_channels(), [&](std::size_t c) {
    CVector xv(static_cast<Eigen::Index>(image.pixels()));
    for (std::size_t p = 0; p < image.pixels(); ++p) xv[static_cast<Eigen::Index>(p)] = image.channels[c][p];
    const Signal x(std::move(xv), Field::complex);
    const auto data = magnitudes(op, x);
    InitConfig init;
    init.power_iterations = power_iterations;
    init.seed = seed_schedule(seed, c, SeedRole::init);
    const Signal z0 = spectral_init(op, data, init);
    const SolveTrace tr = solve(op, data, z0, scaled_config(cfg, op, data), x, registry);
    ChannelResult& out = rep.channels[c];
    out.relative_error = *tr.final_relative_error();
    out.iterations = tr.iterations_used;
    out.iterations_to_1e5 = tr.iterations_to(1e-5);
    out.iterations_to_1e10 = tr.iterations_to(1e-10);
    const cplx ph = phase_align(tr.final_signal, x);
    out.recovered = Signal(tr.final_signal.values() * std::conj(ph), Field::complex);
  }, threads);
  return rep;
}

inline ImageReport run_image_recovery(const std::string& image_path, std::size_t L, const SolverConfig& cfg,
                                      std::uint64_t seed, std::size_t power_iterations = 50, std::size_t threads = 0) {
  return run_image_recovery(read_image(image_path), L, cfg, seed, power_iterations, threads);
}

/// Per-trial CSV `solver,ratio,trial,success,final_rel_err,iters`.
inline std::string success_trials_csv(const SuccessTable& table) {
  std::ostringstream os;
  os << "solver,ratio,trial,success,final_rel_err,iters\n";
  for (const auto& o : table.outcomes)
    os << o.solver << ',' << detail::format_double(o.ratio) << ',' << o.trial << ',' << (o.success ? 1 : 0) << ','
       << detail::format_double(o.final_rel_err) << ',' << o.iters << '\n';
  return os.str();
}

inline std::vector<TrialOutcome> read_success_trials_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "solver,ratio,trial,success,final_rel_err,iters")
    throw std::runtime_error("read_success_trials_csv: missing or unexpected header");
  std::vector<TrialOutcome> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 6) throw std::runtime_error("read_success_trials_csv: bad row '" + line + "'");
    TrialOutcome o;
    o.solver = cols[0];
    o.ratio = std::stod(cols[1]);
    o.trial = std::stoull(cols[2]);
    o.success = cols[3] == "1";
    o.final_rel_err = std::stod(cols[4]);
    o.iters = std::stoull(cols[5]);
    out.push_back(o);
  }
  return out;
}

inline nlohmann::json success_table_json(const SuccessTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : table.rows)
    rows.push_back({{"solver", r.solver}, {"ratio", r.ratio}, {"successes", r.successes}, {"trials", r.trials},
                    {"success_rate", r.success_rate()}});
  return {{"threshold", table.threshold}, {"rows", rows}};
}

}  // namespace paf
