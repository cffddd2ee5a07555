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
#include <unordered_set>

#include "test_support.hpp"

using namespace paf;
using Catch::Approx;

namespace {

ExperimentPlan small_plan() {
  ExperimentPlan p;
  p.n = 16;
  p.ratios = {6.0};
  p.trials = 4;
  p.solvers = {SolverConfig::paf(1.0, 1.0)};
  p.master_seed = 77;
  p.threads = 1;
  return p;
}

}  // namespace

TEST_CASE("seed schedule is collision free over 1e6 probes") {
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(1000000);
  const SeedRole roles[] = {SeedRole::truth, SeedRole::op, SeedRole::noise, SeedRole::init};
  for (std::uint64_t t = 0; t < 250000; ++t)
    for (SeedRole r : roles) seen.insert(seed_schedule(5, t, r));
  CHECK(seen.size() == 1000000);
  CHECK(seed_schedule(5, 3, SeedRole::op) == seed_schedule(5, 3, SeedRole::op));
  CHECK(seed_schedule(5, 0, SeedRole::op) != seed_schedule(5, 1, SeedRole::op));
  CHECK(seed_schedule(5, 0, SeedRole::op) != seed_schedule(6, 0, SeedRole::op));
}

TEST_CASE("plan validation") {
  auto p = small_plan();
  p.trials = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = small_plan();
  p.ratios.clear();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = small_plan();
  p.solvers.clear();
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK(measurement_count(128, 4.5) == 576);
}

TEST_CASE("trial instances are paired and reproducible") {
  const auto p = small_plan();
  const auto a = make_trial(p, 6.0, 3), b = make_trial(p, 6.0, 3), c = make_trial(p, 6.0, 4);
  CHECK(a.x == b.x);
  CHECK(a.op.rows() == b.op.rows());
  CHECK(a.data.b == b.data.b);
  CHECK(a.z0 == b.z0);
  CHECK(!(a.x == c.x));
  CHECK(a.x.norm() == Approx(1.0).epsilon(1e-14));
  CHECK(a.op.m() == 96);
}

TEST_CASE("convergence runs share instances across solvers") {
  auto p = small_plan();
  p.trials = 2;
  p.solvers = {SolverConfig::paf(1.0, 2.5), SolverConfig::paf(1.0, 2.5)};
  for (auto& s : p.solvers) s.tolerance = 1e-10;
  const auto runs = run_convergence(p);
  REQUIRE(runs.size() == 4);
  for (std::size_t t = 0; t < 2; ++t) {
    const auto& r0 = runs[2 * t];
    const auto& r1 = runs[2 * t + 1];
    REQUIRE(r0.trace);
    REQUIRE(r1.trace);
    CHECK(r0.trace->records.size() == r1.trace->records.size());
    CHECK(r0.trace->final_signal == r1.trace->final_signal);
    CHECK(*r0.trace->final_relative_error() <= 1e-10);
  }
}

TEST_CASE("convergence records solver failures and keeps going") {
  GradientRegistry& reg = default_registry();
  if (!reg.contains("throws"))
    reg.register_plugin("throws", [](const MeasurementOperator&, const PhaselessData&, const Signal&) -> Signal {
      throw std::runtime_error("boom");
    });
  auto p = small_plan();
  p.trials = 1;
  p.solvers = {SolverConfig::plugin("throws", 1.0), SolverConfig::paf(1.0, 1.0)};
  const auto runs = run_convergence(p);
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].error);
  CHECK(runs[1].trace);
}

TEST_CASE("noisy traces plateau between 0 and 1") {
  auto p = small_plan();
  p.n = 32;
  p.ratios = {4.5};
  p.trials = 1;
  p.noise_sigma = std::sqrt(0.1);
  p.solvers = {SolverConfig::paf(1.0, 2.5)};
  p.solvers[0].max_iterations = 300;
  const auto runs = run_convergence(p);
  REQUIRE(runs[0].trace);
  const double e = *runs[0].trace->final_relative_error();
  CHECK(e > 0.0);
  CHECK(e < 1.0);
}

TEST_CASE("success rate table") {
  auto p = small_plan();
  p.ratios = {1.0, 6.0};
  p.trials = 6;
  p.solvers = {SolverConfig::paf(1.0, 1.0), SolverConfig::af(1.0)};
  const auto t1 = run_success_rate(p);
  REQUIRE(t1.rows.size() == 4);
  REQUIRE(t1.outcomes.size() == 24);
  for (const auto& r : t1.rows) {
    CHECK(r.successes <= r.trials);
    CHECK(r.success_rate() >= 0.0);
    CHECK(r.success_rate() <= 1.0);
  }
  CHECK(t1.row("paf", 1.0).successes == 0);
  CHECK(t1.row("af", 1.0).successes == 0);
  CHECK(t1.row("paf", 6.0).success_rate() >= t1.row("paf", 1.0).success_rate());
  CHECK(t1.row("paf", 6.0).success_rate() >= 0.8);

  // thread count does not change results
  p.threads = 3;
  const auto t3 = run_success_rate(p);
  for (std::size_t i = 0; i < t1.outcomes.size(); ++i) {
    CHECK(t1.outcomes[i].iters == t3.outcomes[i].iters);
    CHECK(t1.outcomes[i].success == t3.outcomes[i].success);
  }

  std::stringstream csv(success_trials_csv(t1));
  const auto back = read_success_trials_csv(csv);
  REQUIRE(back.size() == t1.outcomes.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].solver == t1.outcomes[i].solver);
    CHECK(back[i].success == t1.outcomes[i].success);
    CHECK(back[i].iters == t1.outcomes[i].iters);
    CHECK(back[i].ratio == t1.outcomes[i].ratio);
  }
  const auto j = success_table_json(t1);
  CHECK(j["rows"].size() == 4);
}

TEST_CASE("raising the iteration budget never lowers success") {
  auto p = small_plan();
  p.ratios = {3.0, 4.0};
  p.trials = 8;
  p.solvers = {SolverConfig::paf(1.0, 1.0)};
  p.solvers[0].max_iterations = 30;
  const auto lo = run_success_rate(p);
  p.solvers[0].max_iterations = 300;
  const auto hi = run_success_rate(p);
  for (std::size_t i = 0; i < lo.rows.size(); ++i) CHECK(hi.rows[i].successes >= lo.rows[i].successes);
}

TEST_CASE("image recovery on small grayscale and RGB inputs") {
  auto cfg = SolverConfig::paf(1.0, 1.0);
  cfg.tolerance = 1e-10;
  const Image gray = synthetic_gradient_image(16, 16, 1);
  const auto rep = run_image_recovery(gray, 6, cfg, 3);
  REQUIRE(rep.channels.size() == 1);
  CHECK(rep.channels[0].relative_error <= 1e-10);
  CHECK(rep.channels[0].iterations_to_1e5);
  CHECK(rep.channels[0].iterations_to_1e10);

  const auto rep20 = run_image_recovery(gray, 20, cfg, 3);
  CHECK(*rep20.channels[0].iterations_to_1e10 < *rep.channels[0].iterations_to_1e10);

  const auto rgb = run_image_recovery(synthetic_gradient_image(8, 12, 3), 6, cfg, 4);
  CHECK(rgb.channels.size() == 3);
  const auto j = rgb.to_json();
  CHECK(j["channels"].size() == 3);
  CHECK(j["L"] == 6);

  CHECK_THROWS_AS(run_image_recovery(gray, 0, cfg, 3), std::invalid_argument);
  CHECK_THROWS(run_image_recovery(std::string("/nonexistent/image.pgm"), 6, cfg, 3));
}
