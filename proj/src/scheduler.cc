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

#include "paireval/scheduler.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "paireval/elo_fit.h"
#include "paireval/elo_model.h"

namespace paireval {
namespace {

uint64_t SplitMix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for the n-th question of a rater; independent of everything else in
// the state so replays reproduce the same draws.
uint64_t QuestionSeed(uint64_t seed, const std::string& rater, int n) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : rater) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return SplitMix(SplitMix(seed ^ h) + static_cast<uint64_t>(n));
}

std::pair<std::string, std::string> PairKey(const std::string& a,
                                            const std::string& b) {
  return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

EloFit PriorFit(const std::vector<std::string>& methods, const Priors& priors,
                double level) {
  EloFit fit;
  double half = NormalQuantile(0.5 * (1.0 + level)) * priors.elo_sd;
  for (const auto& m : methods) {
    fit.estimates.push_back({m, priors.elo_mean, priors.elo_mean - half,
                             priors.elo_mean + half, priors.elo_sd});
  }
  fit.intervals = true;
  fit.components.assign(methods.size(), 0);
  for (size_t i = 0; i < methods.size(); ++i) {
    fit.components[i] = static_cast<int>(i);
  }
  fit.unconstrained = methods;
  return fit;
}

SchedulerState InitialSchedulerState(const StudyConfig& config) {
  SchedulerState state;
  state.methods = config.MethodIds();
  for (const auto& img : config.images) state.images.push_back(img.id);
  state.current_fit =
      PriorFit(state.methods, config.fitter.priors, config.fitter.interval_level);
  state.golden_rate = config.golden.rate;
  state.golden_threshold = config.golden.threshold;
  state.heavy_quality = config.golden.heavy_quality;
  state.refresh_every = config.scheduler.refresh_every;
  state.repeat_window = config.scheduler.repeat_window;
  state.rng_seed = config.scheduler.seed;
  return state;
}

double PairScore(const std::string& a, const std::string& b,
                 const EloFit& fit) {
  const EloEstimate* ea = fit.Find(a);
  const EloEstimate* eb = fit.Find(b);
  if (ea == nullptr || eb == nullptr) {
    throw Error("unknown_method",
                "unknown method \"" + (ea == nullptr ? a : b) + "\"");
  }
  double p = WinProbability(ea->elo, eb->elo);
  double var = ea->sd * ea->sd + eb->sd * eb->sd;
  const size_t n = fit.estimates.size();
  if (fit.covariance.size() == n * n) {
    size_t i = ea - fit.estimates.data();
    size_t j = eb - fit.estimates.data();
    var = fit.covariance[i * n + i] + fit.covariance[j * n + j] -
          2.0 * fit.covariance[i * n + j];
  }
  return var * p * (1.0 - p);
}

std::pair<std::string, std::string> BestPair(const SchedulerState& state) {
  const auto& methods = state.methods;
  if (methods.size() < 2) {
    throw Error("config", "need at least two methods to form a pair");
  }
  std::optional<std::pair<std::string, std::string>> best;
  double best_score = 0.0;
  int best_count = 0;
  for (size_t i = 0; i < methods.size(); ++i) {
    for (size_t j = i + 1; j < methods.size(); ++j) {
      auto key = PairKey(methods[i], methods[j]);
      double score = PairScore(key.first, key.second, state.current_fit);
      auto it = state.pair_counts.find(key);
      int count = it == state.pair_counts.end() ? 0 : it->second;
      bool take = false;
      if (!best) {
        take = true;
      } else {
        double tol = 1e-12 * std::max(std::abs(score), std::abs(best_score));
        if (score > best_score + tol) {
          take = true;
        } else if (score >= best_score - tol) {
          take = count < best_count || (count == best_count && key < *best);
        }
      }
      if (take) {
        best = key;
        best_score = score;
        best_count = count;
      }
    }
  }
  return *best;
}

Question NextQuestion(const std::string& rater, const SchedulerState& state,
                      int64_t now) {
  auto rs = state.rater_states.find(rater);
  if (rs != state.rater_states.end() && rs->second.blocked) {
    throw Error("blocked_rater", "rater " + rater + " is blocked");
  }
  auto issued_it = state.questions_issued.find(rater);
  int n = issued_it == state.questions_issued.end() ? 0 : issued_it->second;
  std::mt19937_64 rng(QuestionSeed(state.rng_seed, rater, n));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<const std::string*> eligible;
  auto recent_it = state.recent_images.find(rater);
  for (const auto& img : state.images) {
    bool recent = recent_it != state.recent_images.end() &&
                  std::find(recent_it->second.begin(), recent_it->second.end(),
                            img) != recent_it->second.end();
    if (!recent) eligible.push_back(&img);
  }
  if (eligible.empty()) {
    throw Error("no_eligible_image",
                "no image left for rater " + rater +
                    " outside the repeat window of " +
                    std::to_string(state.repeat_window));
  }

  Question q;
  q.id = "q-" + rater + "-" + std::to_string(n + 1);
  q.rater = rater;
  q.issued_at = now;
  bool golden = unit(rng) < state.golden_rate;
  q.image = *eligible[std::uniform_int_distribution<size_t>(
      0, eligible.size() - 1)(rng)];
  bool swap = unit(rng) < 0.5;
  if (golden) {
    q.golden = true;
    q.left = Stimulus::Original();
    q.right = Stimulus::HeavyDegraded(state.heavy_quality);
  } else {
    auto [a, b] = BestPair(state);
    q.left = Stimulus::OfMethod(a);
    q.right = Stimulus::OfMethod(b);
  }
  if (swap) std::swap(q.left, q.right);
  return q;
}

void IssueQuestion(SchedulerState& state, const Question& question) {
  ValidateQuestion(question);
  if (state.issued.count(question.id)) {
    throw Error("duplicate_question", "question " + question.id +
                                          " was already issued");
  }
  state.issued[question.id] = question;
  ++state.questions_issued[question.rater];
  auto& recent = state.recent_images[question.rater];
  recent.push_back(question.image);
  while (static_cast<int>(recent.size()) > state.repeat_window) {
    recent.pop_front();
  }
  auto& rs = state.rater_states[question.rater];
  rs.rater = question.rater;
}

RecordResult RecordAnswer(SchedulerState& state, const Answer& answer) {
  auto it = state.issued.find(answer.question);
  if (it == state.issued.end()) {
    throw Error("unknown_question", "unknown question " + answer.question);
  }
  if (state.answered.count(answer.question)) {
    throw Error("duplicate_answer",
                "question " + answer.question + " was already answered");
  }
  const Question& q = it->second;
  if (q.rater != answer.rater) {
    throw Error("rater_mismatch", "question " + q.id + " was issued to " +
                                      q.rater + ", not " + answer.rater);
  }
  state.answered.insert(answer.question);

  RecordResult result;
  result.judgment = Resolve(q, answer);
  RaterState& rs = state.rater_states[answer.rater];
  rs.rater = answer.rater;
  ++rs.answers_given;
  if (q.golden) {
    ++rs.golden_shown;
    if (!result.judgment.correct) ++rs.golden_wrong;
    if (!rs.blocked && rs.golden_wrong >= state.golden_threshold) {
      rs.blocked = true;
      result.newly_blocked = true;
    }
  } else {
    ++state.pair_counts[PairKey(q.left.method, q.right.method)];
  }
  ++state.total_answers;
  if (++state.answers_since_refresh >= state.refresh_every) {
    state.answers_since_refresh = 0;
    ++state.refits_triggered;
    result.refit_due = true;
  }
  return result;
}

void InstallFit(SchedulerState& state, EloFit fit) {
  state.current_fit = std::move(fit);
}

}  // namespace paireval
