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

#include "paireval/study_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "paireval/serialization.h"

namespace paireval {
namespace {

using nlohmann::json;

constexpr int kLogVersion = 1;

std::string ConfigHash(const StudyConfig& config) {
  json doc = ToJson(config);
  // Serving details do not affect the fold.
  doc.erase("service");
  for (auto& image : doc["images"]) image.erase("path");
  std::string text = doc.dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string TypeOf(const json& record) {
  if (!record.is_object() || !record.contains("type") ||
      !record.at("type").is_string()) {
    throw Error("corrupt_log", "record without a type: " + record.dump());
  }
  return record.at("type").get<std::string>();
}

}  // namespace

StoreState InitialStoreState(const StudyConfig& config) {
  StoreState state;
  state.scheduler = InitialSchedulerState(config);
  return state;
}

json HeaderRecord(const StudyConfig& config) {
  return {{"type", "header"},
          {"version", kLogVersion},
          {"study", config.name},
          {"config_hash", ConfigHash(config)}};
}

json RaterRecord(const std::string& rater, int64_t at) {
  return {{"type", "rater"}, {"rater", rater}, {"at", at}};
}

json QuestionRecord(const Question& q) {
  return {{"type", "question"}, {"question", ToJson(q)}};
}

json SupersedeRecord(const std::string& question, int64_t at) {
  return {{"type", "supersede"}, {"question", question}, {"at", at}};
}

json AnswerRecord(const Answer& a) {
  return {{"type", "answer"}, {"answer", ToJson(a)}};
}

json FitRecord(const EloFit& fit, int64_t at) {
  return {{"type", "fit"}, {"fit", ToJson(fit)}, {"at", at}};
}

void CheckRecord(const StoreState& state, const json& record) {
  const std::string type = TypeOf(record);
  if (type == "header" || type == "rater") return;
  if (type == "question") {
    Question q = QuestionFromJson(record.at("question"));
    ValidateQuestion(q);
    if (!state.raters.count(q.rater)) {
      throw Error("unknown_rater", "rater " + q.rater + " is not registered");
    }
    if (state.outstanding.count(q.rater)) {
      throw Error("outstanding_question",
                  "rater " + q.rater + " has an unanswered question");
    }
    if (state.scheduler.issued.count(q.id)) {
      throw Error("duplicate_question", "question " + q.id + " already issued");
    }
    return;
  }
  if (type == "supersede") {
    std::string id = record.at("question").get<std::string>();
    auto it = state.scheduler.issued.find(id);
    if (it == state.scheduler.issued.end() ||
        state.outstanding.count(it->second.rater) == 0 ||
        state.outstanding.at(it->second.rater) != id) {
      throw Error("corrupt_log", "supersede of non-outstanding question " + id);
    }
    return;
  }
  if (type == "answer") {
    Answer a = AnswerFromJson(record.at("answer"));
    auto it = state.scheduler.issued.find(a.question);
    if (it == state.scheduler.issued.end()) {
      throw Error("unknown_question", "unknown question " + a.question);
    }
    if (state.scheduler.answered.count(a.question)) {
      throw Error("duplicate_answer",
                  "question " + a.question + " was already answered");
    }
    if (state.superseded.count(a.question)) {
      throw Error("superseded", "question " + a.question +
                                    " expired and was replaced");
    }
    if (it->second.rater != a.rater) {
      throw Error("rater_mismatch", "question " + a.question +
                                        " was issued to another rater");
    }
    return;
  }
  if (type == "fit") {
    EloFitFromJson(record.at("fit"));
    return;
  }
  throw Error("corrupt_log", "unknown record type \"" + type + "\"");
}

void ApplyRecord(StoreState& state, const json& record) {
  CheckRecord(state, record);
  const std::string type = TypeOf(record);
  ++state.events;
  if (type == "rater") {
    state.raters.insert(record.at("rater").get<std::string>());
  } else if (type == "question") {
    Question q = QuestionFromJson(record.at("question"));
    IssueQuestion(state.scheduler, q);
    state.outstanding[q.rater] = q.id;
  } else if (type == "supersede") {
    std::string id = record.at("question").get<std::string>();
    state.outstanding.erase(state.scheduler.issued.at(id).rater);
    state.superseded.insert(id);
  } else if (type == "answer") {
    Answer a = AnswerFromJson(record.at("answer"));
    RecordResult r = RecordAnswer(state.scheduler, a);
    auto out = state.outstanding.find(a.rater);
    if (out != state.outstanding.end() && out->second == a.question) {
      state.outstanding.erase(out);
    }
    state.questions.push_back(state.scheduler.issued.at(a.question));
    state.answers.push_back(a);
    state.judgments.push_back(r.judgment);
  } else if (type == "fit") {
    EloFit fit = EloFitFromJson(record.at("fit"));
    state.fit = fit;
    state.fitted_at = record.value("at", int64_t{0});
    InstallFit(state.scheduler, std::move(fit));
  }
}

LogContents ReadLog(const std::string& path) {
  LogContents out;
  std::ifstream in(path);
  if (!in) return out;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      out.records.push_back(json::parse(lines[i]));
    } catch (const json::exception& e) {
      if (i + 1 == lines.size()) {
        out.torn_tail = true;
      } else {
        throw Error("corrupt_log", path + ": line " + std::to_string(i + 1) +
                                       ": " + e.what());
      }
    }
  }
  return out;
}

StoreState Replay(const StudyConfig& config, const std::vector<json>& records) {
  StoreState state = InitialStoreState(config);
  for (size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    if (TypeOf(r) == "header") {
      if (r.value("config_hash", "") != ConfigHash(config)) {
        throw Error("config_mismatch",
                    "log was written for a different study configuration");
      }
    }
    try {
      ApplyRecord(state, r);
    } catch (const Error& e) {
      throw Error("corrupt_log", "record " + std::to_string(i + 1) + ": " +
                                     e.kind() + ": " + e.what());
    }
  }
  return state;
}

EventLog::EventLog(const std::string& path) : path_(path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error("io", "cannot open log " + path + ": " + std::strerror(errno));
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

void EventLog::Append(const json& record) {
  std::string line = record.dump() + "\n";
  const char* p = line.data();
  size_t left = line.size();
  while (left > 0) {
    ssize_t n = ::write(fd_, p, left);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error("io", "write to " + path_ + " failed: " + std::strerror(errno));
    }
    p += n;
    left -= static_cast<size_t>(n);
  }
  if (::fsync(fd_) != 0) {
    throw Error("io", "fsync of " + path_ + " failed: " + std::strerror(errno));
  }
}

void EventLog::DropTornTail(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  size_t keep = data.rfind('\n');
  keep = keep == std::string::npos ? 0 : keep + 1;
  if (keep != data.size()) std::filesystem::resize_file(path, keep);
}

StudyStore::StudyStore(StudyConfig config, const std::string& log_path)
    : config_(std::move(config)) {
  LogContents contents = ReadLog(log_path);
  if (contents.torn_tail) EventLog::DropTornTail(log_path);
  state_ = Replay(config_, contents.records);
  log_ = std::make_unique<EventLog>(log_path);
  if (contents.records.empty()) Commit(HeaderRecord(config_));
}

void StudyStore::Commit(const json& record) {
  CheckRecord(state_, record);
  log_->Append(record);
  ApplyRecord(state_, record);
}

std::string StudyStore::RegisterRater(const std::string& rater, int64_t now) {
  std::string id = rater;
  if (id.empty()) {
    for (size_t n = state_.raters.size() + 1;; ++n) {
      id = "rater-" + std::to_string(n);
      if (!state_.raters.count(id)) break;
    }
  }
  if (!state_.raters.count(id)) Commit(RaterRecord(id, now));
  return id;
}

Question StudyStore::NextQuestion(const std::string& rater, int64_t now,
                                  int64_t lease_ms) {
  if (!state_.raters.count(rater)) {
    throw Error("unknown_rater", "rater " + rater + " is not registered");
  }
  auto rs = state_.scheduler.rater_states.find(rater);
  if (rs != state_.scheduler.rater_states.end() && rs->second.blocked) {
    throw Error("blocked_rater", "rater " + rater + " is blocked");
  }
  auto out = state_.outstanding.find(rater);
  if (out != state_.outstanding.end()) {
    const Question& q = state_.scheduler.issued.at(out->second);
    if (now - q.issued_at < lease_ms) {
      throw Error("outstanding_question",
                  "rater " + rater + " has an unanswered question " + q.id);
    }
    Commit(SupersedeRecord(q.id, now));
  }
  Question q = paireval::NextQuestion(rater, state_.scheduler, now);
  Commit(QuestionRecord(q));
  return q;
}

StudyStore::SubmitResult StudyStore::SubmitAnswer(const Answer& answer) {
  int refits = state_.scheduler.refits_triggered;
  Commit(AnswerRecord(answer));
  SubmitResult result;
  result.judgment = state_.judgments.back();
  result.refit_due = state_.scheduler.refits_triggered != refits;
  result.blocked = state_.scheduler.rater_states.at(answer.rater).blocked;
  return result;
}

void StudyStore::RecordFit(const EloFit& fit, int64_t now) {
  Commit(FitRecord(fit, now));
}

}  // namespace paireval
