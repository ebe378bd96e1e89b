// Copyright 2026 The Paireval Authors.
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

#include "paireval/simulate.h"

#include <algorithm>

#include "gtest/gtest.h"
#include "json.hpp"
#include "oracles.h"

namespace paireval {
namespace {

SimulationSpec Small(uint64_t seed) {
  SimulationSpec spec;
  spec.true_elos = {{"a", 1800}, {"b", 2000}, {"c", 2200}};
  spec.rater_noise = {{"r1", 0.0}, {"r2", 0.1}};
  spec.answers = 600;
  spec.seed = seed;
  spec.images = 20;
  spec.golden.threshold = 20;
  return spec;
}

TEST(SimulateTest, DeterministicGivenSpec) {
  SimulationResult a = Simulate(Small(3));
  SimulationResult b = Simulate(Small(3));
  EXPECT_EQ(a.answers, b.answers);
  EXPECT_EQ(a.fit, b.fit);
  SimulationResult c = Simulate(Small(4));
  EXPECT_NE(a.answers, c.answers);
}

TEST(SimulateTest, CountsAndRefits) {
  SimulationSpec spec = Small(1);
  spec.scheduler.refresh_every = 50;
  SimulationResult r = Simulate(spec);
  EXPECT_EQ(r.report.answers, 600);
  EXPECT_EQ(r.questions.size(), 600u);
  EXPECT_EQ(r.report.refits, 12);
  int golden = 0;
  for (const auto& q : r.questions) golden += q.golden;
  EXPECT_EQ(golden, r.report.golden_answers);
  EXPECT_TRUE(r.report.ranks_exact);
  EXPECT_LT(r.report.max_abs_diff, 60);
}

TEST(SimulateTest, NoisyRatersGetBlocked) {
  SimulationSpec spec = Small(2);
  spec.rater_noise.push_back({"coin", 1.0});
  spec.golden.threshold = 3;
  spec.golden.rate = 0.3;
  SimulationResult r = Simulate(spec);
  const auto& blocked = r.report.blocked_raters;
  EXPECT_NE(std::find(blocked.begin(), blocked.end(), "coin"), blocked.end());
  EXPECT_EQ(std::find(blocked.begin(), blocked.end(), "r1"), blocked.end());
}

TEST(SimulateTest, Errors) {
  SimulationSpec spec = Small(1);
  spec.answers = 0;
  EXPECT_THROW(Simulate(spec), Error);
  spec = Small(1);
  spec.rater_noise = {{"coin", 1.0}};
  spec.golden.rate = 1.0;
  spec.golden.threshold = 1;
  try {
    Simulate(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "all_raters_blocked");
  }
}

TEST(SimulateTest, SpecFromJson) {
  auto spec = SimulationSpecFromJson(nlohmann::json::parse(R"({
    "methods": [{"id": "a", "elo": 1900}, {"id": "b", "elo": 2100}],
    "raters": [{"id": "r", "noise": 0.05}],
    "answers": 100, "seed": 9, "images": 30,
    "golden": {"rate": 0.2}})"));
  EXPECT_EQ(spec.true_elos.size(), 2u);
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_DOUBLE_EQ(spec.golden.rate, 0.2);
  EXPECT_THROW(SimulationSpecFromJson(nlohmann::json::parse(
                   R"({"methods": [], "raters": [], "answers": 1, "images": 5})")),
               Error);
  auto report = ToJson(Simulate(spec).report);
  EXPECT_TRUE(report.contains("max_abs_diff"));
  EXPECT_EQ(report["rows"].size(), 2u);
}

TEST(SimulateTest, SyntheticRecovery) {
  oracles::Check c = oracles::SyntheticRecoverySuite({1, 2, 3, 4, 5});
  EXPECT_TRUE(c.pass) << c.detail;
}

TEST(SimulateTest, IntervalCalibration) {
  oracles::Check c = oracles::CalibrationSuite(20, 100);
  EXPECT_TRUE(c.pass) << c.detail;
}

}  // namespace
}  // namespace paireval
