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
#include <cstdio>
#include <random>
#include <set>

#include "paireval/analysis.h"
#include "paireval/elo_fit.h"
#include "paireval/elo_model.h"
#include "paireval/scheduler.h"

namespace paireval {
namespace {

using nlohmann::json;

template <typename T>
void Read(const json& obj, const char* key, T* out,
          std::vector<std::string>* problems, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    *out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    problems->push_back(where + "." + key + ": wrong type");
  }
}

}  // namespace

SimulationSpec SimulationSpecFromJson(const json& doc) {
  SimulationSpec spec;
  std::vector<std::string> problems;
  if (!doc.is_object()) throw ConfigError({"simulation spec must be an object"});
  std::set<std::string> ids;
  for (const auto& m : doc.value("methods", json::array())) {
    try {
      std::string id = m.at("id").get<std::string>();
      if (!ids.insert(id).second) problems.push_back("duplicate method id \"" + id + "\"");
      spec.true_elos.push_back({id, m.at("elo").get<double>()});
    } catch (const json::exception&) {
      problems.push_back("methods: each entry needs string id and numeric elo");
    }
  }
  for (const auto& r : doc.value("raters", json::array())) {
    try {
      double noise = r.at("noise").get<double>();
      if (noise < 0.0 || noise > 1.0) {
        problems.push_back("raters: noise must be in [0, 1]");
      }
      spec.rater_noise.push_back({r.at("id").get<std::string>(), noise});
    } catch (const json::exception&) {
      problems.push_back("raters: each entry needs string id and numeric noise");
    }
  }
  Read(doc, "answers", &spec.answers, &problems, "simulation");
  Read(doc, "seed", &spec.seed, &problems, "simulation");
  Read(doc, "images", &spec.images, &problems, "simulation");
  if (doc.contains("golden")) {
    const json& g = doc.at("golden");
    Read(g, "rate", &spec.golden.rate, &problems, "golden");
    Read(g, "threshold", &spec.golden.threshold, &problems, "golden");
    Read(g, "heavy_quality", &spec.golden.heavy_quality, &problems, "golden");
  }
  if (doc.contains("scheduler")) {
    const json& s = doc.at("scheduler");
    Read(s, "refresh_every", &spec.scheduler.refresh_every, &problems, "scheduler");
    Read(s, "repeat_window", &spec.scheduler.repeat_window, &problems, "scheduler");
  }
  spec.scheduler.seed = spec.seed;
  if (doc.contains("fitter")) {
    const json& f = doc.at("fitter");
    Read(f, "elo_mean", &spec.fitter.priors.elo_mean, &problems, "fitter");
    Read(f, "elo_sd", &spec.fitter.priors.elo_sd, &problems, "fitter");
    Read(f, "noise_alpha", &spec.fitter.priors.noise_alpha, &problems, "fitter");
    Read(f, "noise_beta", &spec.fitter.priors.noise_beta, &problems, "fitter");
    Read(f, "interval_level", &spec.fitter.interval_level, &problems, "fitter");
  }
  if (spec.true_elos.size() < 2) problems.push_back("need at least two methods");
  if (spec.rater_noise.empty()) problems.push_back("need at least one rater");
  if (spec.golden.rate < 0.0 || spec.golden.rate >= 1.0) {
    problems.push_back("golden.rate must be in [0, 1)");
  }
  if (spec.golden.threshold < 1) problems.push_back("golden threshold K must be >= 1");
  if (spec.scheduler.refresh_every < 1) {
    problems.push_back("scheduler.refresh_every must be >= 1");
  }
  if (spec.images <= spec.scheduler.repeat_window) {
    problems.push_back("images must exceed scheduler.repeat_window");
  }
  if (!problems.empty()) throw ConfigError(problems);
  return spec;
}

SimulationResult Simulate(const SimulationSpec& spec) {
  if (spec.answers < 1) {
    throw Error("config", "number of simulated answers must be >= 1");
  }
  if (spec.true_elos.size() < 2) {
    throw Error("config", "need at least two methods");
  }
  if (spec.rater_noise.empty()) throw Error("config", "need at least one rater");

  std::map<std::string, double> truth;
  SchedulerState state;
  for (const auto& [id, elo] : spec.true_elos) {
    truth[id] = elo;
    state.methods.push_back(id);
  }
  char buf[32];
  for (int i = 0; i < spec.images; ++i) {
    std::snprintf(buf, sizeof(buf), "img%02d", i + 1);
    state.images.push_back(buf);
  }
  state.current_fit =
      PriorFit(state.methods, spec.fitter.priors, spec.fitter.interval_level);
  state.golden_rate = spec.golden.rate;
  state.golden_threshold = spec.golden.threshold;
  state.heavy_quality = spec.golden.heavy_quality;
  state.refresh_every = spec.scheduler.refresh_every;
  state.repeat_window = spec.scheduler.repeat_window;
  state.rng_seed = spec.seed;

  std::map<std::string, double> noise(spec.rater_noise.begin(),
                                      spec.rater_noise.end());
  std::mt19937_64 rng(spec.seed ^ 0x5eed5eed5eed5eedULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SimulationResult result;
  std::vector<Judgment> judgments;
  for (int t = 0; t < spec.answers; ++t) {
    std::vector<const std::string*> active;
    for (const auto& [id, eps] : spec.rater_noise) {
      auto rs = state.rater_states.find(id);
      if (rs == state.rater_states.end() || !rs->second.blocked) {
        active.push_back(&id);
      }
    }
    if (active.empty()) {
      throw Error("all_raters_blocked",
                  "every simulated rater was blocked after " +
                      std::to_string(t) + " answers");
    }
    const std::string& rater = *active[std::uniform_int_distribution<size_t>(
        0, active.size() - 1)(rng)];
    Question q = NextQuestion(rater, state, t);
    IssueQuestion(state, q);

    // Probability that the left stimulus is chosen.
    double eps = noise[rater];
    double p_left;
    if (q.golden) {
      double p_orig = ObservedChoiceProbability(
          WinProbability(spec.fitter.golden_gap, 0.0), eps);
      p_left = q.left.kind == Stimulus::Kind::kOriginal ? p_orig : 1.0 - p_orig;
    } else {
      p_left = ObservedChoiceProbability(
          WinProbability(truth[q.left.method], truth[q.right.method]), eps);
    }
    Answer a;
    a.question = q.id;
    a.rater = rater;
    a.choice = unit(rng) < p_left ? Choice::kLeft : Choice::kRight;
    a.answered_at = t;
    RecordResult r = RecordAnswer(state, a);
    judgments.push_back(r.judgment);
    result.questions.push_back(q);
    result.answers.push_back(a);
    if (q.golden) ++result.report.golden_answers;
    if (r.refit_due) {
      InstallFit(state, FitWithIntervals(state.methods, judgments, spec.fitter));
    }
  }

  result.fit = FitWithIntervals(state.methods, judgments, spec.fitter);

  RecoveryReport& report = result.report;
  std::vector<EloEstimate> reference;
  for (const auto& [id, elo] : spec.true_elos) {
    reference.push_back({id, elo, elo, elo, 0.0});
  }
  Alignment al = AlignElos(result.fit.estimates, reference);
  report.translation = al.translation;
  report.max_abs_diff = al.max_abs_diff;
  report.spearman = al.spearman;
  report.ranks_exact = true;
  for (const auto& e : al.aligned) {
    report.rows.push_back({e.method, truth[e.method], e.elo, e.p99_low, e.p99_high});
  }
  for (const auto& a : report.rows) {
    for (const auto& b : report.rows) {
      if (a.true_elo < b.true_elo && !(a.fitted_elo < b.fitted_elo)) {
        report.ranks_exact = false;
      }
    }
  }
  report.answers = static_cast<int>(result.answers.size());
  report.refits = state.refits_triggered;
  for (const auto& [id, rs] : state.rater_states) {
    if (rs.blocked) report.blocked_raters.push_back(id);
  }
  return result;
}

json ToJson(const RecoveryReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"true_elo", r.true_elo},
                    {"fitted_elo", r.fitted_elo},
                    {"p99_low", r.p99_low},
                    {"p99_high", r.p99_high}});
  }
  return {{"rows", rows},
          {"translation", report.translation},
          {"max_abs_diff", report.max_abs_diff},
          {"spearman", report.spearman},
          {"ranks_exact", report.ranks_exact},
          {"answers", report.answers},
          {"golden_answers", report.golden_answers},
          {"refits", report.refits},
          {"blocked_raters", report.blocked_raters}};
}

}  // namespace paireval
