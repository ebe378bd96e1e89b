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

// Chooses what each rater sees next: the most informative method pair under
// the current fit, seeded golden questions, and gating of unreliable raters.

#ifndef PAIREVAL_SCHEDULER_H_
#define PAIREVAL_SCHEDULER_H_

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "paireval/domain.h"
#include "paireval/study_config.h"

namespace paireval {

struct SchedulerState {
  std::vector<std::string> methods;
  std::vector<std::string> images;

  EloFit current_fit;
  // Keyed by (smaller id, larger id); symmetric by construction.
  std::map<std::pair<std::string, std::string>, int> pair_counts;
  std::map<std::string, RaterState> rater_states;

  double golden_rate = 0.1;
  int golden_threshold = 3;
  int heavy_quality = 50;
  int refresh_every = 50;
  int repeat_window = 10;
  uint64_t rng_seed = 1;

  std::map<std::string, Question> issued;
  std::set<std::string> answered;
  // Per rater: questions issued so far and the most recent images shown.
  std::map<std::string, int> questions_issued;
  std::map<std::string, std::deque<std::string>> recent_images;

  int total_answers = 0;
  int answers_since_refresh = 0;
  int refits_triggered = 0;

  bool operator==(const SchedulerState&) const = default;
};

// Fit used before any answers exist: every method at the prior mean with the
// prior standard deviation.
EloFit PriorFit(const std::vector<std::string>& methods, const Priors& priors,
                double level = 0.99);

SchedulerState InitialSchedulerState(const StudyConfig& config);

// Var(a - b) * p * (1 - p) with p the fitted win probability. Var(a - b) is
// taken from the fit's covariance when present, else sd_a^2 + sd_b^2.
// Larger is more informative. Throws Error{"unknown_method"}.
double PairScore(const std::string& a, const std::string& b,
                 const EloFit& fit);

// Method pair with the highest PairScore; ties go to the pair with fewer
// answers, then to the lexicographically smallest (a, b).
std::pair<std::string, std::string> BestPair(const SchedulerState& state);

// The question `rater` would be issued now. Pure: identical state, seed and
// rater give an identical question. Throws Error{"blocked_rater"} and
// Error{"no_eligible_image"} (every image shown within the repeat window).
Question NextQuestion(const std::string& rater, const SchedulerState& state,
                      int64_t now = 0);

// Registers `question` as issued.
void IssueQuestion(SchedulerState& state, const Question& question);

struct RecordResult {
  Judgment judgment;
  bool refit_due = false;
  bool newly_blocked = false;
};

// Throws Error{"unknown_question"}, Error{"duplicate_answer"} or
// Error{"rater_mismatch"}.
RecordResult RecordAnswer(SchedulerState& state, const Answer& answer);

void InstallFit(SchedulerState& state, EloFit fit);

}  // namespace paireval

#endif  // PAIREVAL_SCHEDULER_H_
