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

#include "paireval/study_config.h"

#include <fstream>

#include "gtest/gtest.h"
#include "json.hpp"

namespace paireval {
namespace {

using nlohmann::json;

json Minimal() {
  return json::parse(R"({
    "name": "s",
    "methods": ["jpegli-q90-yuv444", {"id": "mozjpeg-q80-yuv420", "bpp": 1.4}],
    "images": [{"id": "a", "width": 10, "height": 20}]
  })");
}

std::vector<std::string> Problems(const json& doc) {
  try {
    ValidateStudyConfig(doc);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

TEST(StudyConfigTest, FillsDefaults) {
  StudyConfig c = ValidateStudyConfig(Minimal());
  EXPECT_EQ(c.methods.size(), 2u);
  EXPECT_FALSE(c.methods[0].mean_bpp.has_value());
  EXPECT_DOUBLE_EQ(*c.methods[1].mean_bpp, 1.4);
  EXPECT_DOUBLE_EQ(c.golden.rate, 0.1);
  EXPECT_EQ(c.golden.threshold, 3);
  EXPECT_DOUBLE_EQ(c.fitter.priors.elo_mean, 2000.0);
  EXPECT_DOUBLE_EQ(c.fitter.priors.elo_sd, 800.0);
  EXPECT_DOUBLE_EQ(c.fitter.priors.noise_alpha, 1.0);
  EXPECT_DOUBLE_EQ(c.fitter.priors.noise_beta, 9.0);
  EXPECT_DOUBLE_EQ(c.fitter.golden_gap, 800.0);
  EXPECT_EQ(c.MethodIds(),
            (std::vector<std::string>{"jpegli-q90-yuv444", "mozjpeg-q80-yuv420"}));
  EXPECT_NE(c.FindMethod("mozjpeg-q80-yuv420"), nullptr);
  EXPECT_EQ(c.FindMethod("nope"), nullptr);
}

TEST(StudyConfigTest, ReportsEveryProblemAtOnce) {
  json doc = Minimal();
  doc["methods"].push_back("jpegli-q90-yuv444");
  doc["golden"] = {{"threshold", 0}, {"rate", 1.5}};
  doc["scheduler"] = {{"refresh_every", 0}};
  doc["fitter"] = {{"elo_sd", -1}};
  auto problems = Problems(doc);
  ASSERT_GE(problems.size(), 5u);
  auto has = [&](const std::string& needle) {
    for (const auto& p : problems) {
      if (p.find(needle) != std::string::npos) return true;
    }
    return false;
  };
  EXPECT_TRUE(has("duplicate method id"));
  EXPECT_TRUE(has("threshold"));
  EXPECT_TRUE(has("rate"));
  EXPECT_TRUE(has("refresh_every"));
  EXPECT_TRUE(has("elo_sd"));
}

TEST(StudyConfigTest, RejectsEmptyMethodSet) {
  json doc = Minimal();
  doc["methods"] = json::array();
  auto problems = Problems(doc);
  ASSERT_EQ(problems.size(), 1u);
  EXPECT_NE(problems[0].find("empty method set"), std::string::npos);
}

TEST(StudyConfigTest, RejectsUnknownKeysAndBadIds) {
  json doc = Minimal();
  doc["golden"] = {{"rat", 0.2}};
  doc["methods"].push_back("jpegli-q900-yuv444");
  EXPECT_EQ(Problems(doc).size(), 2u);
}

TEST(StudyConfigTest, ConfigErrorKind) {
  json doc = Minimal();
  doc["images"][0]["width"] = 0;
  try {
    ValidateStudyConfig(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "config");
  }
}

TEST(StudyConfigTest, JsonRoundTrip) {
  json doc = Minimal();
  doc["golden"] = {{"rate", 0.2}, {"threshold", 4}};
  doc["service"] = {{"lease_seconds", 30}, {"log_path", "x.jsonl"}};
  StudyConfig a = ValidateStudyConfig(doc);
  StudyConfig b = ValidateStudyConfig(ToJson(a));
  EXPECT_EQ(a.methods, b.methods);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.golden, b.golden);
  EXPECT_EQ(a.scheduler, b.scheduler);
  EXPECT_EQ(a.fitter, b.fitter);
  EXPECT_EQ(a.service, b.service);
  EXPECT_EQ(a.service.lease_ms, 30000);
}

TEST(StudyConfigTest, LoadsShippedFixture) {
  StudyConfig c =
      LoadStudyConfig(std::string(PAIREVAL_FIXTURES) + "/study_appendix_a.json");
  EXPECT_EQ(c.methods.size(), 31u);
  for (const auto& m : c.methods) EXPECT_TRUE(m.mean_bpp.has_value()) << m.id;
}

TEST(StudyConfigTest, MissingFileIsIoError) {
  try {
    LoadStudyConfig("/nonexistent/study.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), "io");
  }
}

}  // namespace
}  // namespace paireval
