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

#include "paireval/serialization.h"

#include <utility>

namespace paireval {
namespace {

using nlohmann::json;

template <typename T>
T Get(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error("parse", std::string("field \"") + key + "\": " + e.what());
  }
}

std::string_view KindName(Stimulus::Kind k) {
  switch (k) {
    case Stimulus::Kind::kMethod:
      return "method";
    case Stimulus::Kind::kOriginal:
      return "original";
    case Stimulus::Kind::kHeavyDegraded:
      return "heavy_degraded";
  }
  return "method";
}

template <typename T, typename F>
std::vector<T> ListFrom(const json& doc, const char* key, F from) {
  std::vector<T> out;
  if (!doc.contains(key)) return out;
  for (const auto& item : doc.at(key)) out.push_back(from(item));
  return out;
}

}  // namespace

json ToJson(const Method& m) {
  json j = {{"id", m.id},
            {"encoder", m.encoder.name},
            {"quality", m.quality},
            {"subsampling", std::string(SubsamplingName(m.subsampling))}};
  if (m.mean_bpp) j["bpp"] = *m.mean_bpp;
  return j;
}

Method MethodFromJson(const json& doc) {
  Method m;
  m.id = Get<std::string>(doc, "id");
  m.encoder = Encoder::FromName(Get<std::string>(doc, "encoder"));
  m.quality = Get<int>(doc, "quality");
  auto s = ParseSubsampling(Get<std::string>(doc, "subsampling"));
  if (!s) throw Error("parse", "bad subsampling for method " + m.id);
  m.subsampling = *s;
  if (doc.contains("bpp")) m.mean_bpp = Get<double>(doc, "bpp");
  return m;
}

json ToJson(const ImageRef& image) {
  json j = {{"id", image.id}, {"width", image.width}, {"height", image.height}};
  if (!image.source_path.empty()) j["path"] = image.source_path;
  return j;
}

ImageRef ImageRefFromJson(const json& doc) {
  ImageRef image;
  image.id = Get<std::string>(doc, "id");
  image.width = Get<int>(doc, "width");
  image.height = Get<int>(doc, "height");
  if (doc.contains("path")) image.source_path = Get<std::string>(doc, "path");
  return image;
}

json ToJson(const Stimulus& s) {
  json j = {{"kind", std::string(KindName(s.kind))}};
  if (s.kind == Stimulus::Kind::kMethod) j["method"] = s.method;
  if (s.kind == Stimulus::Kind::kHeavyDegraded) j["quality"] = s.quality;
  return j;
}

Stimulus StimulusFromJson(const json& doc) {
  std::string kind = Get<std::string>(doc, "kind");
  if (kind == "method") return Stimulus::OfMethod(Get<std::string>(doc, "method"));
  if (kind == "original") return Stimulus::Original();
  if (kind == "heavy_degraded") {
    return Stimulus::HeavyDegraded(Get<int>(doc, "quality"));
  }
  throw Error("parse", "unknown stimulus kind \"" + kind + "\"");
}

json ToJson(const Question& q) {
  return {{"id", q.id},         {"image", q.image},
          {"left", ToJson(q.left)}, {"right", ToJson(q.right)},
          {"golden", q.golden}, {"rater", q.rater},
          {"issued_at", q.issued_at}};
}

Question QuestionFromJson(const json& doc) {
  Question q;
  q.id = Get<std::string>(doc, "id");
  q.image = Get<std::string>(doc, "image");
  q.left = StimulusFromJson(doc.at("left"));
  q.right = StimulusFromJson(doc.at("right"));
  q.golden = Get<bool>(doc, "golden");
  q.rater = Get<std::string>(doc, "rater");
  q.issued_at = Get<int64_t>(doc, "issued_at");
  return q;
}

json ToJson(const Answer& a) {
  return {{"question", a.question},
          {"rater", a.rater},
          {"choice", std::string(ChoiceName(a.choice))},
          {"answered_at", a.answered_at},
          {"toggles", a.toggles}};
}

Answer AnswerFromJson(const json& doc) {
  Answer a;
  a.question = Get<std::string>(doc, "question");
  a.rater = Get<std::string>(doc, "rater");
  auto c = ParseChoice(Get<std::string>(doc, "choice"));
  if (!c) throw Error("parse", "bad choice in answer " + a.question);
  a.choice = *c;
  a.answered_at = Get<int64_t>(doc, "answered_at");
  if (doc.contains("toggles")) a.toggles = Get<int>(doc, "toggles");
  return a;
}

json ToJson(const RaterState& r) {
  return {{"rater", r.rater},
          {"golden_shown", r.golden_shown},
          {"golden_wrong", r.golden_wrong},
          {"blocked", r.blocked},
          {"answers_given", r.answers_given}};
}

RaterState RaterStateFromJson(const json& doc) {
  RaterState r;
  r.rater = Get<std::string>(doc, "rater");
  r.golden_shown = Get<int>(doc, "golden_shown");
  r.golden_wrong = Get<int>(doc, "golden_wrong");
  r.blocked = Get<bool>(doc, "blocked");
  r.answers_given = Get<int>(doc, "answers_given");
  return r;
}

json ToJson(const EloEstimate& e) {
  return {{"method", e.method},
          {"elo", e.elo},
          {"p99_low", e.p99_low},
          {"p99_high", e.p99_high},
          {"sd", e.sd}};
}

EloEstimate EloEstimateFromJson(const json& doc) {
  EloEstimate e;
  e.method = Get<std::string>(doc, "method");
  e.elo = Get<double>(doc, "elo");
  e.p99_low = Get<double>(doc, "p99_low");
  e.p99_high = Get<double>(doc, "p99_high");
  e.sd = Get<double>(doc, "sd");
  return e;
}

json ToJson(const EloFit& fit) {
  json estimates = json::array();
  for (const auto& e : fit.estimates) estimates.push_back(ToJson(e));
  return {{"estimates", estimates},
          {"rater_noise", fit.rater_noise},
          {"log_posterior", fit.log_posterior},
          {"config_fingerprint", fit.config_fingerprint},
          {"iterations", fit.iterations},
          {"gradient_norm", fit.gradient_norm},
          {"answer_count", fit.answer_count},
          {"intervals", fit.intervals},
          {"unconstrained", fit.unconstrained},
          {"components", fit.components},
          {"warnings", fit.warnings},
          {"covariance", fit.covariance}};
}

EloFit EloFitFromJson(const json& doc) {
  EloFit fit;
  fit.estimates = ListFrom<EloEstimate>(doc, "estimates", EloEstimateFromJson);
  fit.rater_noise = Get<std::map<std::string, double>>(doc, "rater_noise");
  fit.log_posterior = Get<double>(doc, "log_posterior");
  fit.config_fingerprint = Get<std::string>(doc, "config_fingerprint");
  fit.iterations = Get<int>(doc, "iterations");
  fit.gradient_norm = Get<double>(doc, "gradient_norm");
  fit.answer_count = Get<int>(doc, "answer_count");
  fit.intervals = Get<bool>(doc, "intervals");
  fit.unconstrained = Get<std::vector<std::string>>(doc, "unconstrained");
  fit.components = Get<std::vector<int>>(doc, "components");
  fit.warnings = Get<std::vector<std::string>>(doc, "warnings");
  if (doc.contains("covariance")) {
    fit.covariance = Get<std::vector<double>>(doc, "covariance");
  }
  return fit;
}

json ToJson(const Judgment& j) {
  if (j.golden) {
    return {{"rater", j.rater}, {"golden", true}, {"correct", j.correct}};
  }
  return {{"rater", j.rater}, {"winner", j.winner}, {"loser", j.loser}};
}

Judgment JudgmentFromJson(const json& doc) {
  std::string rater = Get<std::string>(doc, "rater");
  if (doc.value("golden", false)) {
    return Judgment::Golden(std::move(rater), Get<bool>(doc, "correct"));
  }
  return Judgment::Preference(std::move(rater), Get<std::string>(doc, "winner"),
                              Get<std::string>(doc, "loser"));
}

json ToJson(const SchedulerState& s) {
  json pairs = json::array();
  for (const auto& [key, n] : s.pair_counts) {
    pairs.push_back({key.first, key.second, n});
  }
  json raters = json::array();
  for (const auto& [id, r] : s.rater_states) raters.push_back(ToJson(r));
  json issued = json::array();
  for (const auto& [id, q] : s.issued) issued.push_back(ToJson(q));
  json recent = json::object();
  for (const auto& [id, images] : s.recent_images) {
    recent[id] = std::vector<std::string>(images.begin(), images.end());
  }
  return {{"methods", s.methods},
          {"images", s.images},
          {"current_fit", ToJson(s.current_fit)},
          {"pair_counts", pairs},
          {"rater_states", raters},
          {"golden_rate", s.golden_rate},
          {"golden_threshold", s.golden_threshold},
          {"heavy_quality", s.heavy_quality},
          {"refresh_every", s.refresh_every},
          {"repeat_window", s.repeat_window},
          {"rng_seed", s.rng_seed},
          {"issued", issued},
          {"answered", s.answered},
          {"questions_issued", s.questions_issued},
          {"recent_images", recent},
          {"total_answers", s.total_answers},
          {"answers_since_refresh", s.answers_since_refresh},
          {"refits_triggered", s.refits_triggered}};
}

SchedulerState SchedulerStateFromJson(const json& doc) {
  SchedulerState s;
  s.methods = Get<std::vector<std::string>>(doc, "methods");
  s.images = Get<std::vector<std::string>>(doc, "images");
  s.current_fit = EloFitFromJson(doc.at("current_fit"));
  for (const auto& p : doc.at("pair_counts")) {
    s.pair_counts[{p.at(0).get<std::string>(), p.at(1).get<std::string>()}] =
        p.at(2).get<int>();
  }
  for (const auto& r : doc.at("rater_states")) {
    RaterState state = RaterStateFromJson(r);
    s.rater_states[state.rater] = state;
  }
  s.golden_rate = Get<double>(doc, "golden_rate");
  s.golden_threshold = Get<int>(doc, "golden_threshold");
  s.heavy_quality = Get<int>(doc, "heavy_quality");
  s.refresh_every = Get<int>(doc, "refresh_every");
  s.repeat_window = Get<int>(doc, "repeat_window");
  s.rng_seed = Get<uint64_t>(doc, "rng_seed");
  for (const auto& q : doc.at("issued")) {
    Question question = QuestionFromJson(q);
    s.issued[question.id] = question;
  }
  s.answered = Get<std::set<std::string>>(doc, "answered");
  s.questions_issued = Get<std::map<std::string, int>>(doc, "questions_issued");
  for (const auto& [id, images] : doc.at("recent_images").items()) {
    auto list = images.get<std::vector<std::string>>();
    s.recent_images[id] = std::deque<std::string>(list.begin(), list.end());
  }
  s.total_answers = Get<int>(doc, "total_answers");
  s.answers_since_refresh = Get<int>(doc, "answers_since_refresh");
  s.refits_triggered = Get<int>(doc, "refits_triggered");
  return s;
}

}  // namespace paireval
