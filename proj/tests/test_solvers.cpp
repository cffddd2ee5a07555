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

#include <catch_amalgamated.hpp>

#include <sstream>

#include "test_support.hpp"

using namespace paf;
using namespace paf::testing;
using Catch::Approx;

namespace {

Signal spectral(const Instance& inst, std::uint64_t seed) {
  InitConfig cfg;
  cfg.seed = seed;
  return spectral_init(inst.op, inst.data, cfg);
}

}  // namespace

TEST_CASE("config validation and defaults") {
  const auto c = SolverConfig{};
  CHECK(c.max_iterations == 2500);
  CHECK(c.kind == SolverKind::paf);
  CHECK(c.epsilon.alpha == 1.0);
  auto bad = SolverConfig::paf(1.0, 0.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  auto af = SolverConfig::af(1.0);
  af.epsilon = EpsilonPolicy::scaled(1.0);
  CHECK_THROWS_AS(af.validate(), std::invalid_argument);
  auto t0 = SolverConfig::wf(0.1);
  t0.max_iterations = 0;
  CHECK_THROWS_AS(t0.validate(), std::invalid_argument);
  CHECK(SolverConfig::plugin("x", 1.0).label() == "x");
  CHECK(SolverConfig::af(1.0).label() == "af");
}

TEST_CASE("starting at the truth converges at k = 0") {
  const auto inst = gaussian_instance(16, 80, Field::complex, 1);
  const auto tr = solve(inst.op, inst.data, inst.x, SolverConfig::paf(1.0, 1.0), inst.x);
  CHECK(tr.converged);
  CHECK(tr.iterations_used == 0);
  REQUIRE(tr.records.size() == 1);
  CHECK(*tr.records[0].rel_err == 0.0);
}

TEST_CASE("noiseless truth is stationary for every built-in kind") {
  const auto inst = gaussian_instance(12, 72, Field::complex, 2);
  const Signal xs = inst.x.scaled(std::polar(1.0, 1.1));
  const RVector e1 = resolve_epsilon(EpsilonPolicy::scaled(1.0), inst.data);
  CHECK(paf_gradient(inst.op, inst.data, e1, xs).norm() <= 1e-10);
  CHECK(paf_gradient(inst.op, inst.data, RVector::Zero(72), xs).norm() <= 1e-10);
  CHECK(wf_gradient(inst.op, inst.data, xs).norm() <= 1e-10);
}

TEST_CASE("paf recovers a complex signal from the spectral start") {
  const auto inst = gaussian_instance(64, 384, Field::complex, 3);
  auto cfg = SolverConfig::paf(1.0, 2.5);
  cfg.tolerance = 1e-10;
  const auto tr = solve(inst.op, inst.data, spectral(inst, 4), cfg, inst.x);
  CHECK(tr.converged);
  CHECK(*tr.final_relative_error() <= 1e-10);
  CHECK(tr.iterations_used <= cfg.max_iterations);
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    REQUIRE(tr.records[i].k == tr.records[i - 1].k + 1);
    REQUIRE(std::isfinite(tr.records[i].loss));
    REQUIRE(std::isfinite(tr.records[i].grad_norm));
  }
  CHECK(tr.iterations_to(1e-5) <= tr.iterations_to(1e-10));
}

TEST_CASE("solve is deterministic") {
  const auto inst = gaussian_instance(24, 120, Field::real, 5);
  const Signal z0 = spectral(inst, 6);
  auto cfg = SolverConfig::paf(1.0, 1.0);
  cfg.max_iterations = 50;
  const auto a = solve(inst.op, inst.data, z0, cfg, inst.x), b = solve(inst.op, inst.data, z0, cfg, inst.x);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(a.records[i].loss == b.records[i].loss);
  CHECK(a.final_signal == b.final_signal);
  CHECK(a.final_signal.field() == Field::real);
}

TEST_CASE("step criterion without truth") {
  const auto inst = gaussian_instance(16, 96, Field::complex, 7);
  auto cfg = SolverConfig::paf(1.0, 1.0);
  cfg.tolerance = 1e-9;
  const auto tr = solve(inst.op, inst.data, spectral(inst, 8), cfg);
  CHECK(tr.converged);
  CHECK(!tr.records.back().rel_err);
  CHECK(relative_error(tr.final_signal, inst.x) < 1e-6);
}

TEST_CASE("divergence raises with the iteration index") {
  const auto inst = gaussian_instance(16, 64, Field::complex, 9);
  auto cfg = SolverConfig::wf(1e3);
  try {
    (void)solve(inst.op, inst.data, spectral(inst, 10), cfg, inst.x);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() >= 1);
    CHECK(std::string(e.what()).find("diverged at iteration") != std::string::npos);
  }
  CHECK_THROWS_AS(solve(inst.op, inst.data, Signal::zeros(16, Field::complex), SolverConfig::paf(1.0, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("loss is nonincreasing under the theoretical step") {
  const double alpha = 0.826;
  const auto inst = gaussian_instance(16, 800, Field::complex, 11);
  Rng rng(12);
  const Signal z0(inst.x.values() + 0.05 * rng.unit_vector(16, Field::complex), Field::complex);
  auto cfg = SolverConfig::paf(alpha, theory_constants(alpha).mu_theory);
  cfg.max_iterations = 100;
  cfg.tolerance = 0.0;
  const auto tr = solve(inst.op, inst.data, z0, cfg, inst.x);
  for (std::size_t i = 1; i < tr.records.size(); ++i) CHECK(tr.records[i].loss <= tr.records[i - 1].loss + 1e-12);
}

TEST_CASE("plugin dispatch") {
  GradientRegistry reg;
  reg.register_plugin("wf2", [](const MeasurementOperator& op, const PhaselessData& d, const Signal& z) {
    return wf_gradient(op, d, z);
  }, [](const MeasurementOperator& op, const PhaselessData& d, const Signal& z) { return wf_loss(op, d, z); });
  reg.register_plugin("zero", [](const MeasurementOperator&, const PhaselessData&, const Signal& z) {
    return Signal::zeros(z.size(), z.field());
  });
  CHECK_THROWS_AS(reg.register_plugin("zero", [](const MeasurementOperator&, const PhaselessData&,
                                                 const Signal& z) { return z; }),
                  std::invalid_argument);
  CHECK(reg.contains("wf2"));
  CHECK(!reg.contains("taf"));

  const auto inst = gaussian_instance(16, 96, Field::complex, 13);
  const Signal z0 = spectral(inst, 14);
  const double mu = scaled_step_size(SolverKind::wf, 0.2, inst.op, inst.data);
  auto wf = SolverConfig::wf(mu);
  wf.max_iterations = 200;
  auto wf2 = SolverConfig::plugin("wf2", mu);
  wf2.max_iterations = 200;
  const auto a = solve(inst.op, inst.data, z0, wf, inst.x, reg);
  const auto b = solve(inst.op, inst.data, z0, wf2, inst.x, reg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].loss == b.records[i].loss);
    CHECK(a.records[i].grad_norm == b.records[i].grad_norm);
    CHECK(a.records[i].rel_err == b.records[i].rel_err);
  }

  auto zero = SolverConfig::plugin("zero", 1.0);
  zero.max_iterations = 30;
  zero.tolerance = 0.0;
  const auto z = solve(inst.op, inst.data, z0, zero, std::nullopt, reg);
  CHECK(z.iterations_used == 30);
  CHECK(z.final_signal == z0);

  CHECK_THROWS_AS(solve(inst.op, inst.data, z0, SolverConfig::plugin("missing", 1.0), std::nullopt, reg),
                  std::invalid_argument);
}

TEST_CASE("step scaling across operator kinds") {
  const auto g = gaussian_instance(8, 40, Field::complex, 15);
  CHECK(scaled_step_size(SolverKind::paf, 2.5, g.op, g.data) == 2.5);
  const double nb = g.data.b.squaredNorm() / 40.0;
  CHECK(scaled_step_size(SolverKind::wf, 0.2, g.op, g.data) == Approx(0.2 / nb));
  const auto c = cdp_instance(16, 4, 16);
  CHECK(scaled_step_size(SolverKind::paf, 1.0, c.op, c.data) == Approx(16.0));
}

TEST_CASE("trace csv round trip") {
  const auto inst = gaussian_instance(8, 48, Field::complex, 17);
  auto cfg = SolverConfig::paf(1.0, 1.0);
  cfg.max_iterations = 20;
  const auto tr = solve(inst.op, inst.data, spectral(inst, 18), cfg, inst.x);
  std::stringstream ss;
  write_trace_csv(ss, tr);
  CHECK(ss.str().rfind("k,loss,grad_norm,rel_err\n", 0) == 0);
  const auto back = read_trace_csv(ss);
  REQUIRE(back.size() == tr.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].k == tr.records[i].k);
    CHECK(back[i].loss == tr.records[i].loss);
    CHECK(back[i].grad_norm == tr.records[i].grad_norm);
    CHECK(back[i].rel_err == tr.records[i].rel_err);
  }
  const auto plain = solve(inst.op, inst.data, spectral(inst, 18), cfg);
  std::stringstream s2;
  write_trace_csv(s2, plain);
  const auto back2 = read_trace_csv(s2);
  CHECK(!back2.front().rel_err);
  std::stringstream junk("nope\n");
  CHECK_THROWS(read_trace_csv(junk));
}
