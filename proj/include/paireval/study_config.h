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

// Study configuration: the methods under test, the image corpus, golden
// question parameters and scheduler/fitter settings. The on-disk form is a
// JSON document; see docs/study_config.md for the schema.

#ifndef PAIREVAL_STUDY_CONFIG_H_
#define PAIREVAL_STUDY_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"

namespace paireval {

struct Priors {
  double elo_mean = 2000.0;
  double elo_sd = 800.0;
  double noise_alpha = 1.0;
  double noise_beta = 9.0;

  bool operator==(const Priors&) const = default;
};

struct FitterSettings {
  Priors priors;
  // Upper bound for the per-rater noise.
  double noise_max = 1.0;
  // Elo gap assumed between ORIGINAL and HEAVY_DEGRADED in golden questions.
  double golden_gap = 800.0;
  // Gradient infinity-norm at which the optimizer stops.
  double gradient_tolerance = 1e-6;
  int max_iterations = 10000;
  double interval_level = 0.99;

  bool operator==(const FitterSettings&) const = default;
};

struct GoldenSettings {
  double rate = 0.1;        // Fraction of golden questions.
  int threshold = 3;        // Wrong goldens before a rater is blocked.
  int heavy_quality = 50;   // JPEG quality of the heavily degraded side.

  bool operator==(const GoldenSettings&) const = default;
};

struct SchedulerSettings {
  int refresh_every = 50;   // Answers between refits.
  int repeat_window = 10;   // Per-rater image repeat window.
  uint64_t seed = 1;

  bool operator==(const SchedulerSettings&) const = default;
};

struct ServiceSettings {
  int64_t lease_ms = 10 * 60 * 1000;
  std::string log_path = "study_log.jsonl";
  // Where encoded variants live. Placeholders: {method}, {image}, {quality}.
  std::string variant_path_template = "corpus/{method}/{image}.jpeg";
  std::string golden_path_template = "corpus/golden-q{quality}/{image}.jpeg";

  bool operator==(const ServiceSettings&) const = default;
};

struct StudyConfig {
  std::string name;
  std::vector<Method> methods;
  std::vector<ImageRef> images;
  // Optional per-encoder quality grid; empty means 1..100.
  std::map<std::string, std::vector<int>> quality_grid;
  GoldenSettings golden;
  SchedulerSettings scheduler;
  FitterSettings fitter;
  ServiceSettings service;

  const Method* FindMethod(std::string_view id) const;
  std::vector<std::string> MethodIds() const;
};

// Validation failure carrying every problem found, one per entry.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Parses and normalizes a study description, filling documented defaults.
// Throws ConfigError listing all problems (duplicate method ids, empty method
// set, golden threshold < 1, ...).
StudyConfig ValidateStudyConfig(const nlohmann::json& doc);

StudyConfig LoadStudyConfig(const std::string& path);

nlohmann::json ToJson(const StudyConfig& config);

}  // namespace paireval

#endif  // PAIREVAL_STUDY_CONFIG_H_
