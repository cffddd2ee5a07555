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

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "paf/measurements.hpp"
#include "paf/objective.hpp"
#include "paf/signal.hpp"

namespace paf {

enum class SolverKind { paf, af, wf, plugin };

inline std::string_view to_string(SolverKind k) {
  switch (k) {
    case SolverKind::paf: return "paf";
    case SolverKind::af: return "af";
    case SolverKind::wf: return "wf";
    case SolverKind::plugin: return "plugin";
  }
  return "?";
}

struct SolverConfig {
  SolverKind kind = SolverKind::paf;
  std::string plugin_name;  // kind == plugin
  EpsilonPolicy epsilon = EpsilonPolicy::scaled(1.0);
  double step_size = 1.0;
  std::size_t max_iterations = 2500;
  // Relative error when the truth is supplied, otherwise relative step
  // ||z_{k+1} - z_k|| / ||z_k||. Zero disables the step criterion.
  double tolerance = 1e-5;
  std::uint64_t seed = 0;

  static SolverConfig paf(double alpha, double mu) {
    SolverConfig c;
    c.epsilon = EpsilonPolicy::scaled(alpha);
    c.step_size = mu;
    return c;
  }
  static SolverConfig af(double mu) {
    SolverConfig c;
    c.kind = SolverKind::af;
    c.epsilon = EpsilonPolicy::scaled(0.0);
    c.step_size = mu;
    return c;
  }
  static SolverConfig wf(double mu) {
    SolverConfig c;
    c.kind = SolverKind::wf;
    c.step_size = mu;
    return c;
  }
  static SolverConfig plugin(std::string name, double mu) {
    SolverConfig c;
    c.kind = SolverKind::plugin;
    c.plugin_name = std::move(name);
    c.step_size = mu;
    return c;
  }

  [[nodiscard]] std::string label() const {
    return kind == SolverKind::plugin ? plugin_name : std::string(to_string(kind));
  }

  void validate() const {
    if (!(step_size > 0.0)) throw std::invalid_argument("SolverConfig: step size must be > 0");
    if (max_iterations < 1) throw std::invalid_argument("SolverConfig: max_iterations must be >= 1");
    if (!(tolerance >= 0.0)) throw std::invalid_argument("SolverConfig: tolerance must be >= 0");
    if (kind == SolverKind::af &&
        !(epsilon.mode == EpsilonPolicy::Mode::scaled_b && epsilon.alpha == 0.0))
      throw std::invalid_argument("SolverConfig: af requires eps = 0 (alpha = 0)");
    if (kind == SolverKind::plugin && plugin_name.empty())
      throw std::invalid_argument("SolverConfig: plugin kind without a plugin name");
  }
};

struct TraceRecord {
  std::size_t k = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::optional<double> rel_err;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  Signal final_signal;
  bool converged = false;
  std::size_t iterations_used = 0;

  [[nodiscard]] std::optional<double> final_relative_error() const {
    return records.empty() ? std::nullopt : records.back().rel_err;
  }
  /// First k with rel_err <= threshold.
  [[nodiscard]] std::optional<std::size_t> iterations_to(double threshold) const {
    for (const auto& r : records)
      if (r.rel_err && *r.rel_err <= threshold) return r.k;
    return std::nullopt;
  }
};

/// Raised when the iteration produces a non-finite value or the loss blows up.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error("diverged at iteration " + std::to_string(iteration) + ": " + what),
        iteration_(iteration) {}
  [[nodiscard]] std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

using GradientFn = std::function<Signal(const MeasurementOperator&, const PhaselessData&, const Signal&)>;
using LossFn = std::function<double(const MeasurementOperator&, const PhaselessData&, const Signal&)>;

/// Named external gradient rules (truncated / reweighted variants live here
/// rather than in the library).
class GradientRegistry {
 public:
  struct Entry {
    GradientFn gradient;
    LossFn loss;  // optional; traces fall back to the perturbed amplitude loss
  };

  void register_plugin(const std::string& name, GradientFn gradient, LossFn loss = {}) {
    if (name.empty()) throw std::invalid_argument("register_plugin: empty name");
    if (!gradient) throw std::invalid_argument("register_plugin: empty gradient function");
    std::unique_lock lock(mutex_);
    if (entries_.count(name) != 0) throw std::invalid_argument("register_plugin: '" + name + "' already registered");
    entries_.emplace(name, Entry{std::move(gradient), std::move(loss)});
  }

  [[nodiscard]] const Entry& find(const std::string& name) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("unknown plugin '" + name + "'");
    return it->second;  // entries are never erased, so the reference stays valid
  }

  [[nodiscard]] bool contains(const std::string& name) const {
    std::shared_lock lock(mutex_);
    return entries_.count(name) != 0;
  }

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::string, Entry> entries_;
};

inline GradientRegistry& default_registry() {
  static GradientRegistry registry;
  return registry;
}

inline void register_plugin(const std::string& name, GradientFn gradient, LossFn loss = {}) {
  default_registry().register_plugin(name, std::move(gradient), std::move(loss));
}

/// Step size in the operator's own units for a nominal step mu.
///
/// Amplitude-type gradients scale with the Gram scale c of the operator
/// (E[(1/m) A^* A] = c I), so they use mu / c. The intensity gradient is cubic
/// in the measurements and uses mu / (c^2 ||x||^2), with ||x||^2 estimated as
/// sum b^2 / (m c).
inline double scaled_step_size(SolverKind kind, double mu, const MeasurementOperator& op,
                               const PhaselessData& data) {
  const double c = op.gram_scale();
  if (kind != SolverKind::wf) return mu / c;
  const double norm2 = data.b.squaredNorm() / (static_cast<double>(data.size()) * c);
  if (!(norm2 > 0.0)) throw std::invalid_argument("scaled_step_size: all measurements are zero");
  return mu / (c * c * norm2);
}

/// Gradient descent z_{k+1} = z_k - mu grad f(z_k).
///
/// Record k = 0 holds the initial point. With `truth` the relative error is
/// recorded every iteration and the run stops once it reaches the tolerance.
inline SolveTrace solve(const MeasurementOperator& op, const PhaselessData& data, const Signal& z0,
                        const SolverConfig& cfg, const std::optional<Signal>& truth = std::nullopt,
                        const GradientRegistry& registry = default_registry()) {
  cfg.validate();
  if (z0.size() != op.n() || data.size() != op.m()) throw std::invalid_argument("solve: dimension mismatch");
  if (z0.norm() == 0.0) throw std::invalid_argument("solve: initial point has zero norm");
  if (truth && truth->size() != op.n()) throw std::invalid_argument("solve: truth has wrong length");

  const GradientRegistry::Entry* plugin = cfg.kind == SolverKind::plugin ? &registry.find(cfg.plugin_name) : nullptr;
  RVector eps;
  if (cfg.kind != SolverKind::wf) eps = resolve_epsilon(cfg.epsilon, data);

  auto evaluate = [&](const Signal& z) -> LossAndGradient {
    switch (cfg.kind) {
      case SolverKind::paf:
      case SolverKind::af: return paf_evaluate(op, data, eps, z);
      case SolverKind::wf: return {wf_loss(op, data, z), wf_gradient(op, data, z)};
      case SolverKind::plugin:
        return {plugin->loss ? plugin->loss(op, data, z) : paf_loss(op, data, eps, z), plugin->gradient(op, data, z)};
    }
    throw std::logic_error("unreachable");
  };
  auto rel = [&](const Signal& z) -> std::optional<double> {
    if (!truth) return std::nullopt;
    // Compare in the truth's field so real truths accept complex iterates.
    if (z.field() != truth->field()) return relative_error(Signal(z.values(), Field::complex),
                                                           Signal(truth->values(), Field::complex));
    return relative_error(z, *truth);
  };

  SolveTrace trace;
  Signal z = z0;
  LossAndGradient eval = evaluate(z);
  if (!std::isfinite(eval.loss) || !eval.gradient.values().allFinite())
    throw DivergenceError(0, "non-finite loss or gradient at the initial point");
  const double initial_loss = eval.loss;
  trace.records.push_back({0, eval.loss, eval.gradient.norm(), rel(z)});
  if (truth && *trace.records.back().rel_err <= cfg.tolerance) {
    trace.converged = true;
    trace.final_signal = z;
    return trace;
  }

  std::size_t k = 0;
  while (k < cfg.max_iterations) {
    ++k;
    const CVector step = cfg.step_size * eval.gradient.values();
    const double znorm = z.norm();
    Signal next(z.values() - step, eval.gradient.field() == Field::real && z.field() == Field::real
                                        ? Field::real : Field::complex);
    z = std::move(next);
    eval = evaluate(z);
    if (!std::isfinite(eval.loss) || !eval.gradient.values().allFinite())
      throw DivergenceError(k, "non-finite loss or gradient");
    if (initial_loss > 0.0 && eval.loss > 1e6 * initial_loss)
      throw DivergenceError(k, "loss exceeded 1e6 x initial loss");
    trace.records.push_back({k, eval.loss, eval.gradient.norm(), rel(z)});
    if (truth) {
      if (*trace.records.back().rel_err <= cfg.tolerance) {
        trace.converged = true;
        break;
      }
    } else if (cfg.tolerance > 0.0 && step.norm() <= cfg.tolerance * znorm) {
      trace.converged = true;
      break;
    }
  }
  trace.iterations_used = k;
  trace.final_signal = z;
  return trace;
}

namespace detail {
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// CSV with header `k,loss,grad_norm,rel_err`; rel_err empty without truth.
inline void write_trace_csv(std::ostream& os, const SolveTrace& trace) {
  os << "k,loss,grad_norm,rel_err\n";
  for (const auto& r : trace.records) {
    os << r.k << ',' << detail::format_double(r.loss) << ',' << detail::format_double(r.grad_norm) << ',';
    if (r.rel_err) os << detail::format_double(*r.rel_err);
    os << '\n';
  }
}

inline std::vector<TraceRecord> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "k,loss,grad_norm,rel_err")
    throw std::runtime_error("read_trace_csv: missing or unexpected header");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() == 3) cols.emplace_back();
    if (cols.size() != 4) throw std::runtime_error("read_trace_csv: line " + std::to_string(lineno) + " has bad arity");
    TraceRecord r;
    r.k = std::stoull(cols[0]);
    r.loss = std::stod(cols[1]);
    r.grad_norm = std::stod(cols[2]);
    if (!cols[3].empty()) r.rel_err = std::stod(cols[3]);
    out.push_back(r);
  }
  return out;
}

}  // namespace paf
