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
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paf/measurements.hpp"
#include "paf/objective.hpp"
#include "paf/parallel.hpp"
#include "paf/rng.hpp"
#include "paf/signal.hpp"

namespace paf {

// ---------------------------------------------------------------------------
// Convergence constants
// ---------------------------------------------------------------------------

/// Explicit constants of the local convergence analysis for eps = sqrt(alpha) b
/// on the neighbourhood of radius rho, with concentration slack delta.
struct TheoryConstants {
  double alpha = 0.0;
  double rho = 0.1;
  double delta = 0.001;
  double U1 = 0.0, U2 = 0.0, L1 = 0.0, L2 = 0.0;
  double phi_tilde = 0.0;  // 9/(128 L2) - 1575/(32 U2); the rho = 1/10 instance
  double phi1 = 0.0, phi2 = 0.0;
  double beta_alpha = 0.0;  // (phi1 + phi2)/4 - delta
  double mu_theory = 0.0;   // beta_alpha / 1.001^2
  std::vector<std::string> warnings;
};

inline TheoryConstants theory_constants(double alpha, double rho = 0.1, double delta = 0.001) {
  if (!(alpha > 0.0)) throw std::invalid_argument("theory_constants: alpha must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("theory_constants: rho must lie in (0, 1)");
  TheoryConstants c;
  c.alpha = alpha;
  c.rho = rho;
  c.delta = delta;

  // Upper/lower bounds on the denominators d_j over the two index groups.
  c.U1 = 2.0 * alpha + 2.0 + 3.0 * rho + 1.5 * rho * rho;
  c.U2 = (2.0 * alpha + 2.0) / (rho * rho) + 1.5 + 3.0 / rho;
  const double s = std::sqrt((1.0 - rho) * (1.0 - rho) + alpha);
  c.L1 = s * (s + std::sqrt(1.0 + alpha)) / (rho * rho);
  c.L2 = alpha + std::sqrt(alpha * (1.0 + alpha));

  c.phi1 = (1.0 - 6.0 * rho) / (4.0 * c.U1) - 1.0 / (16.0 * c.L1) - delta / 4.0;
  const double q = 63.0 / (128.0 * c.U2 * rho * rho) - 9.0 / (128.0 * c.L2);
  const double lin = 3.0 / (4.0 * c.U2 * rho);
  const double phi = lin * lin / q;
  c.phi2 = 9.0 / (32.0 * c.U2 * rho * rho) + 1.0 / (2.0 * c.U2) - 3.0 / (32.0 * c.L2) - phi - delta / 4.0;
  c.phi_tilde = 9.0 / (128.0 * c.L2) - 1575.0 / (32.0 * c.U2);

  c.beta_alpha = (c.phi1 + c.phi2) / 4.0 - delta;
  c.mu_theory = c.beta_alpha / (1.001 * 1.001);

  if (!(q > 0.0)) c.warnings.emplace_back("quadratic coefficient in the second index group is not positive");
  if (rho != 0.1)
    c.warnings.emplace_back("closed forms U1 = 2a + 463/200 etc. and phi_tilde are the rho = 1/10 instance");
  if (alpha < 0.37 || alpha > 29.0) c.warnings.emplace_back("alpha outside [0.37, 29]; positivity not guaranteed");
  return c;
}

/// beta_alpha via the expanded rho = 1/10 closed form
/// 1/(40U1) + 229/(32U2) - 1/(64L1) - 3/(128L2) + 225/(16 U2^2 phi_tilde) - 9 delta/8.
/// Independent of theory_constants(); used to cross-check it.
inline double beta_alpha_closed_form(double alpha, double delta = 0.001) {
  const double U1 = 2.0 * alpha + 463.0 / 200.0;
  const double U2 = 200.0 * alpha + 463.0 / 2.0;
  const double L1 = 100.0 * alpha + 81.0 + 100.0 * std::sqrt((alpha + 1.0) * (alpha + 0.81));
  const double L2 = alpha + std::sqrt(alpha * (1.0 + alpha));
  const double pt = 9.0 / (128.0 * L2) - 1575.0 / (32.0 * U2);
  return 1.0 / (40.0 * U1) + 229.0 / (32.0 * U2) - 1.0 / (64.0 * L1) - 3.0 / (128.0 * L2) +
         225.0 / (16.0 * U2 * U2 * pt) - 9.0 * delta / 8.0;
}

struct BetaRow {
  double alpha;
  double beta;
};

inline std::vector<BetaRow> beta_curve(const std::vector<double>& alphas) {
  std::vector<BetaRow> rows;
  rows.reserve(alphas.size());
  for (double a : alphas) rows.push_back({a, theory_constants(a).beta_alpha});
  return rows;
}

/// `points` log-spaced values from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0 && hi >= lo) || points == 0) throw std::invalid_argument("log_grid: bad range");
  std::vector<double> out(points);
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------
// Empirical validators
// ---------------------------------------------------------------------------

/// Common JSON shape: {name, parameters, estimates, standard_errors, bounds, pass}.
struct Report {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json estimates = nlohmann::json::object();
  nlohmann::json standard_errors = nlohmann::json::object();
  nlohmann::json bounds = nlohmann::json::object();
  std::vector<std::string> warnings;
  bool pass = false;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j{{"name", name},
                     {"parameters", parameters},
                     {"estimates", estimates},
                     {"standard_errors", standard_errors},
                     {"bounds", bounds},
                     {"pass", pass}};
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
  }
};

/// A Gaussian phase retrieval instance with unit-norm truth and eps = sqrt(alpha) b.
struct ValidationInstance {
  Signal x;
  MeasurementOperator op;
  PhaselessData data;
  RVector eps;
};

inline ValidationInstance make_validation_instance(std::size_t n, std::size_t m, Field field, double alpha,
                                                   std::uint64_t seed) {
  Rng truth_rng(derive_seed(seed, 0, "truth"));
  Signal x(truth_rng.unit_vector(n, field), field);
  auto op = sample_gaussian(m, n, field, derive_seed(seed, 0, "operator"));
  auto data = magnitudes(op, x);
  RVector eps = resolve_epsilon(EpsilonPolicy::scaled(alpha), data);
  return {std::move(x), std::move(op), std::move(data), std::move(eps)};
}

/// Draws z = x + r u with u uniform on the unit sphere and r uniform on
/// (0, radius ||x||]; every such z lies in the neighbourhood dist(z, x) <= radius ||x||.
inline Signal sample_neighborhood(const Signal& x, double radius, Rng& rng) {
  const CVector u = rng.unit_vector(x.size(), x.field());
  const double r = radius * x.norm() * (1.0 - rng.uniform());  // (0, radius ||x||]
  return Signal(x.values() + r * u, x.field());
}

struct SmoothnessReport {
  double max_ratio = 0.0;
  std::size_t violations = 0;
  std::size_t samples = 0;
  double threshold = 1.1;
  [[nodiscard]] bool pass() const { return violations == 0 && max_ratio <= threshold; }
  [[nodiscard]] Report report(std::size_t n, std::size_t m, double alpha, std::uint64_t seed) const {
    Report r{"smoothness"};
    r.parameters = {{"n", n}, {"m", m}, {"alpha", alpha}, {"samples", samples}, {"seed", seed}};
    r.estimates = {{"max_ratio", max_ratio}, {"violations", violations}};
    r.bounds = {{"max_ratio", threshold}};
    r.pass = pass();
    return r;
  }
};

/// max over z in the 1/10-neighbourhood of ||grad f_eps(z)|| / dist(z, x).
inline SmoothnessReport validate_smoothness(std::size_t n, std::size_t m, double alpha, std::size_t samples,
                                            std::uint64_t seed, Field field = Field::complex,
                                            std::size_t threads = 0) {
  if (n < 2 || m < n) throw std::invalid_argument("validate_smoothness: need m >= n >= 2");
  const auto inst = make_validation_instance(n, m, field, alpha, seed);
  std::vector<double> ratios(samples);
  parallel_for(samples, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i, "sample"));
    const Signal z = sample_neighborhood(inst.x, 0.1, rng);
    const double d = dist(z, inst.x);
    ratios[i] = paf_gradient(inst.op, inst.data, inst.eps, z).norm() / d;
  }, threads);
  SmoothnessReport rep;
  rep.samples = samples;
  for (double r : ratios) {
    rep.max_ratio = std::max(rep.max_ratio, r);
    if (r > rep.threshold) ++rep.violations;
  }
  return rep;
}

struct CurvatureReport {
  double min_ratio = std::numeric_limits<double>::infinity();
  double argmin_dist = 0.0;
  double beta_alpha = 0.0;
  std::size_t samples = 0;
  std::vector<std::string> warnings;
  [[nodiscard]] bool pass() const { return std::isfinite(min_ratio) && min_ratio >= beta_alpha; }
  [[nodiscard]] Report report(std::size_t n, std::size_t m, double alpha, std::uint64_t seed) const {
    Report r{"curvature"};
    r.parameters = {{"n", n}, {"m", m}, {"alpha", alpha}, {"samples", samples}, {"seed", seed}};
    r.estimates = {{"min_ratio", min_ratio}, {"argmin_dist", argmin_dist}};
    r.bounds = {{"beta_alpha", beta_alpha}};
    r.warnings = warnings;
    r.pass = pass();
    return r;
  }
};

/// min over z in the 1/10-neighbourhood of Re<grad f_eps(z), z - e^{i phi} x> / dist^2(z, x).
inline CurvatureReport validate_curvature(std::size_t n, std::size_t m, double alpha, std::size_t samples,
                                          std::uint64_t seed, Field field = Field::complex,
                                          std::size_t threads = 0) {
  if (m < n || n < 1) throw std::invalid_argument("validate_curvature: need m >= n >= 1");
  CurvatureReport rep;
  if (alpha < 0.37 || alpha > 29.0)
    rep.warnings.emplace_back("alpha outside [0.37, 29]: the curvature bound is not guaranteed there");
  rep.beta_alpha = theory_constants(alpha).beta_alpha;
  rep.samples = samples;
  const auto inst = make_validation_instance(n, m, field, alpha, seed);
  std::vector<double> ratios(samples), dists(samples);
  parallel_for(samples, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i, "sample"));
    const Signal z = sample_neighborhood(inst.x, 0.1, rng);
    const AlignedPair ap = align(z, inst.x);
    const CVector h = z.values() - ap.phase * inst.x.values();
    const Signal g = paf_gradient(inst.op, inst.data, inst.eps, z);
    ratios[i] = g.values().dot(h).real() / (ap.distance * ap.distance);
    dists[i] = ap.distance;
  }, threads);
  for (std::size_t i = 0; i < samples; ++i) {
    if (ratios[i] < rep.min_ratio) {
      rep.min_ratio = ratios[i];
      rep.argmin_dist = dists[i];
    }
  }
  return rep;
}

struct HessianReport {
  double norm_estimate = 0.0;
  double bound = 0.0;
  double slack = 1.02;
  [[nodiscard]] bool pass() const { return norm_estimate <= bound * slack; }
  [[nodiscard]] Report report(std::size_t n, std::size_t m, double alpha, std::uint64_t seed) const {
    Report r{"hessian_bound"};
    r.parameters = {{"n", n}, {"m", m}, {"alpha", alpha}, {"seed", seed}};
    r.estimates = {{"norm_estimate", norm_estimate}};
    r.bounds = {{"bound", bound}, {"slack", slack}};
    r.pass = pass();
    return r;
  }
};

inline double hessian_norm_bound(double alpha) { return 2.0 * std::sqrt((1.0 + alpha) / alpha); }

/// Operator-norm estimate of the curvature matrix at z by 100 power
/// iterations, taking |v^* H v| since the matrix may be indefinite. Without z,
/// a point of the 1/10-neighbourhood is sampled.
inline HessianReport validate_hessian_bound(std::size_t n, std::size_t m, double alpha, std::uint64_t seed,
                                            const std::optional<Signal>& z = std::nullopt,
                                            Field field = Field::complex) {
  if (!(alpha > 0.0)) throw std::invalid_argument("validate_hessian_bound: alpha must be > 0");
  const auto inst = make_validation_instance(n, m, field, alpha, seed);
  Signal point;
  if (z) {
    if (z->size() != n) throw std::invalid_argument("validate_hessian_bound: z has wrong length");
    point = *z;
  } else {
    Rng rng(derive_seed(seed, 0, "sample"));
    point = sample_neighborhood(inst.x, 0.1, rng);
  }
  const RVector c = hessian_weights(inst.op, inst.data, inst.eps, point);
  auto apply_h = [&](const CVector& v) -> CVector {
    return inst.op.adjoint(c.cast<cplx>().cwiseProduct(inst.op.apply(v))) / static_cast<double>(m);
  };
  Rng rng(derive_seed(seed, 1, "power"));
  CVector v = rng.unit_vector(n, field);
  HessianReport rep;
  rep.bound = hessian_norm_bound(alpha);
  for (int it = 0; it < 100; ++it) {
    const CVector hv = apply_h(v);
    rep.norm_estimate = std::max(rep.norm_estimate, std::abs(v.dot(hv)));
    const double nh = hv.norm();
    if (nh == 0.0) break;
    v = hv / nh;
  }
  return rep;
}

/// Spread of (1/m) sum_j |a_j^* u|^2 over random unit u (plus the probe e_1).
struct ConcentrationReport {
  double min_mean = std::numeric_limits<double>::infinity();
  double max_mean = 0.0;
  std::size_t probes = 0;
};

inline ConcentrationReport concentration_check(std::size_t n, std::size_t m, Field field, std::size_t trials,
                                               std::uint64_t seed) {
  const auto op = sample_gaussian(m, n, field, derive_seed(seed, 0, "operator"));
  ConcentrationReport rep;
  auto probe = [&](const CVector& u) {
    const double mean = op.apply(u).squaredNorm() / static_cast<double>(m);
    rep.min_mean = std::min(rep.min_mean, mean);
    rep.max_mean = std::max(rep.max_mean, mean);
    ++rep.probes;
  };
  probe(Signal::basis(n, 0, field).values());
  Rng rng(derive_seed(seed, 0, "probe"));
  for (std::size_t t = 0; t < trials; ++t) probe(rng.unit_vector(n, field));
  return rep;
}

/// Monte-Carlo estimates of the two-dimensional Gaussian expectations with
/// x = e1, h = sigma e1 + sqrt(1 - sigma^2) e2, split on the event
/// |a^* x| > |a^* h| ("gt") and its complement ("le").
struct ExpectationReport {
  struct Estimate {
    double mean = 0.0;
    double se = 0.0;
  };
  double sigma = 0.0;
  std::size_t samples = 0;
  Estimate re_gt, re_le;          // E Re(h^* a a^* x) I
  Estimate ax2_gt, ax2_le;        // E |a^* x|^2 I
  Estimate ratio_gt, ratio_le;    // E Re(h^* a a^* x)^2 / |a^* x|^2 I
  Estimate re_diff, re_sum;       // paired gt - le and gt + le

  struct Check {
    std::string name;
    double lo, hi, value, se;
    [[nodiscard]] bool pass() const { return value >= lo - 3.0 * se && value <= hi + 3.0 * se; }
  };

  /// Interval checks at 3 standard errors. The Re-halves are tested as
  /// equal with total sigma.
  [[nodiscard]] std::vector<Check> checks() const {
    const double s2 = sigma * sigma;
    return {
        {"ax2_gt in [1/2, 3/4]", 0.5, 0.75, ax2_gt.mean, ax2_gt.se},
        {"ax2_le in [1/4, 1/2]", 0.25, 0.5, ax2_le.mean, ax2_le.se},
        {"ratio_gt in [1/8 + 7s^2/32, 1/4 + s^2/4]", 0.125 + 7.0 * s2 / 32.0, 0.25 + s2 / 4.0, ratio_gt.mean,
         ratio_gt.se},
        {"ratio_le in [1/4 + s^2/4, 3/8 + 9s^2/32]", 0.25 + s2 / 4.0, 0.375 + 9.0 * s2 / 32.0, ratio_le.mean,
         ratio_le.se},
        {"re_gt - re_le = 0", 0.0, 0.0, re_diff.mean, re_diff.se},
        {"re_gt + re_le = sigma", sigma, sigma, re_sum.mean, re_sum.se},
    };
  }

  [[nodiscard]] Report report(std::uint64_t seed) const {
    Report r{"appendix_expectations"};
    r.parameters = {{"sigma", sigma}, {"samples", samples}, {"seed", seed}};
    auto put = [&](const char* key, const Estimate& e) {
      r.estimates[key] = e.mean;
      r.standard_errors[key] = e.se;
    };
    put("re_gt", re_gt);
    put("re_le", re_le);
    put("ax2_gt", ax2_gt);
    put("ax2_le", ax2_le);
    put("ratio_gt", ratio_gt);
    put("ratio_le", ratio_le);
    put("re_diff", re_diff);
    put("re_sum", re_sum);
    r.pass = true;
    for (const auto& c : checks()) {
      r.bounds[c.name] = {c.lo, c.hi};
      r.pass = r.pass && c.pass();
    }
    // Symmetry gives equal halves summing to Re(h^* x) = sigma; re_diff and
    // re_sum test exactly that.
    r.warnings.emplace_back("halves of E Re(h^* a a^* x) tested as sigma/2 each (total sigma)");
    return r;
  }
};

inline ExpectationReport appendix_expectations(double sigma, std::size_t samples, std::uint64_t seed) {
  if (!(std::abs(sigma) < 1.0)) throw std::invalid_argument("appendix_expectations: |sigma| must be < 1");
  if (samples < 2) throw std::invalid_argument("appendix_expectations: need at least 2 samples");
  const double tau = std::sqrt(1.0 - sigma * sigma);
  struct Acc {
    double sum = 0.0, sum2 = 0.0;
    void add(double v) { sum += v; sum2 += v * v; }
    [[nodiscard]] ExpectationReport::Estimate finish(std::size_t n) const {
      const double dn = static_cast<double>(n);
      const double mean = sum / dn;
      const double var = std::max(0.0, (sum2 - dn * mean * mean) / (dn - 1.0));
      return {mean, std::sqrt(var / dn)};
    }
  };
  Acc re_gt, re_le, ax2_gt, ax2_le, ratio_gt, ratio_le, diff, total;
  Rng rng(seed);
  for (std::size_t i = 0; i < samples; ++i) {
    const cplx a1 = rng.gaussian(Field::complex);
    const cplx a2 = rng.gaussian(Field::complex);
    const cplx ax = std::conj(a1);                        // a^* x
    const cplx ah = std::conj(a1) * sigma + std::conj(a2) * tau;  // a^* h
    const double re = (std::conj(ah) * ax).real();        // Re(h^* a a^* x)
    const double ax2 = std::norm(ax);
    const double ratio = ax2 > 0.0 ? re * re / ax2 : 0.0;
    const bool gt = std::abs(ax) > std::abs(ah);
    re_gt.add(gt ? re : 0.0);
    re_le.add(gt ? 0.0 : re);
    ax2_gt.add(gt ? ax2 : 0.0);
    ax2_le.add(gt ? 0.0 : ax2);
    ratio_gt.add(gt ? ratio : 0.0);
    ratio_le.add(gt ? 0.0 : ratio);
    diff.add(gt ? re : -re);
    total.add(re);
  }
  ExpectationReport rep;
  rep.sigma = sigma;
  rep.samples = samples;
  rep.re_gt = re_gt.finish(samples);
  rep.re_le = re_le.finish(samples);
  rep.ax2_gt = ax2_gt.finish(samples);
  rep.ax2_le = ax2_le.finish(samples);
  rep.ratio_gt = ratio_gt.finish(samples);
  rep.ratio_le = ratio_le.finish(samples);
  rep.re_diff = diff.finish(samples);
  rep.re_sum = total.finish(samples);
  return rep;
}

}  // namespace paf
