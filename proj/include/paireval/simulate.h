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

// Synthetic studies: raters with known noise answer scheduler-issued
// questions by sampling the observed-choice model around known true Elos.

#ifndef PAIREVAL_SIMULATE_H_
#define PAIREVAL_SIMULATE_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"
#include "paireval/study_config.h"

namespace paireval {

struct SimulationSpec {
  std::vector<std::pair<std::string, double>> true_elos;
  std::vector<std::pair<std::string, double>> rater_noise;
  int answers = 0;
  uint64_t seed = 1;
  int images = 49;
  GoldenSettings golden;
  SchedulerSettings scheduler;
  FitterSettings fitter;
};

// {"methods": [{"id", "elo"}...], "raters": [{"id", "noise"}...],
//  "answers", "seed", "images", "golden": {...}, "scheduler": {...},
//  "fitter": {...}}. Throws ConfigError.
SimulationSpec SimulationSpecFromJson(const nlohmann::json& doc);

struct RecoveryRow {
  std::string method;
  double true_elo = 0.0;
  double fitted_elo = 0.0;  // Shifted onto the true scale.
  double p99_low = 0.0;
  double p99_high = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryRow> rows;
  double translation = 0.0;
  double max_abs_diff = 0.0;
  double spearman = 0.0;
  // Every pair with distinct true Elos is ordered the same way by the fit.
  bool ranks_exact = false;
  int answers = 0;
  int golden_answers = 0;
  int refits = 0;
  std::vector<std::string> blocked_raters;
};

struct SimulationResult {
  std::vector<Question> questions;  // questions[i] is answered by answers[i].
  std::vector<Answer> answers;
  EloFit fit;
  RecoveryReport report;
};

// Deterministic given the spec. Refits run synchronously whenever the
// scheduler asks for one. Throws Error{"config"} for n < 1 or fewer than two
// methods and Error{"all_raters_blocked"}.
SimulationResult Simulate(const SimulationSpec& spec);

nlohmann::json ToJson(const RecoveryReport& report);

}  // namespace paireval

#endif  // PAIREVAL_SIMULATE_H_
