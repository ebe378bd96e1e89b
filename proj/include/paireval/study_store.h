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

// Durable study state: an append-only JSON-lines event log and the state
// obtained by folding it over the study configuration.

#ifndef PAIREVAL_STUDY_STORE_H_
#define PAIREVAL_STUDY_STORE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"
#include "paireval/scheduler.h"
#include "paireval/study_config.h"

namespace paireval {

struct StoreState {
  SchedulerState scheduler;
  std::set<std::string> raters;
  // Rater -> unanswered question currently leased to them.
  std::map<std::string, std::string> outstanding;
  // Questions whose lease expired and were replaced; answers are refused.
  std::set<std::string> superseded;
  // Answered questions with their answers, in log order.
  std::vector<Question> questions;
  std::vector<Answer> answers;
  std::vector<Judgment> judgments;
  std::optional<EloFit> fit;
  int64_t fitted_at = 0;
  int64_t events = 0;

  bool operator==(const StoreState&) const = default;
};

StoreState InitialStoreState(const StudyConfig& config);

// Log records. Each is one JSON object per line with a "type" field:
// header, rater, question, supersede, answer, fit.
nlohmann::json HeaderRecord(const StudyConfig& config);
nlohmann::json RaterRecord(const std::string& rater, int64_t at);
nlohmann::json QuestionRecord(const Question& q);
nlohmann::json SupersedeRecord(const std::string& question, int64_t at);
nlohmann::json AnswerRecord(const Answer& a);
nlohmann::json FitRecord(const EloFit& fit, int64_t at);

// Throws the Error that applying `record` would raise, leaving `state`
// untouched.
void CheckRecord(const StoreState& state, const nlohmann::json& record);
// Applies a record; same errors as CheckRecord.
void ApplyRecord(StoreState& state, const nlohmann::json& record);

struct LogContents {
  std::vector<nlohmann::json> records;
  // A final line that does not parse (a write cut short by a crash). Such a
  // line was never acknowledged and is dropped.
  bool torn_tail = false;
};

// Throws Error{"corrupt_log"} for an unparsable line other than the last.
LogContents ReadLog(const std::string& path);

// Replays records onto InitialStoreState(config). The header must match
// the config. Throws Error{"config_mismatch"} or Error{"corrupt_log"}.
StoreState Replay(const StudyConfig& config,
                  const std::vector<nlohmann::json>& records);

// Append-only writer; every Append is flushed and fsync'ed before it
// returns.
class EventLog {
 public:
  explicit EventLog(const std::string& path);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  void Append(const nlohmann::json& record);
  // Cuts the file back to its last complete line.
  static void DropTornTail(const std::string& path);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  int fd_ = -1;
};

// The study state plus its log. Not thread-safe: callers serialize access.
class StudyStore {
 public:
  // Opens or creates the log at `log_path` and replays it.
  StudyStore(StudyConfig config, const std::string& log_path);

  const StudyConfig& config() const { return config_; }
  const StoreState& state() const { return state_; }

  // Registers a rater. An empty id picks the next free "rater-<n>".
  // Registering an existing id is a no-op. Returns the id.
  std::string RegisterRater(const std::string& rater, int64_t now);

  // Outstanding question for `rater`, issuing a new one when there is none.
  // A lease older than `lease_ms` is superseded and a fresh question issued.
  // Throws Error{"unknown_rater"}, Error{"blocked_rater"},
  // Error{"outstanding_question"} (lease still live) and the scheduler's
  // errors.
  Question NextQuestion(const std::string& rater, int64_t now,
                        int64_t lease_ms);

  struct SubmitResult {
    Judgment judgment;
    bool refit_due = false;
    bool blocked = false;
  };
  // Persists the answer before returning. Throws Error{"unknown_question"},
  // Error{"duplicate_answer"}, Error{"superseded"}, Error{"rater_mismatch"}.
  SubmitResult SubmitAnswer(const Answer& answer);

  void RecordFit(const EloFit& fit, int64_t now);

 private:
  void Commit(const nlohmann::json& record);

  StudyConfig config_;
  StoreState state_;
  std::unique_ptr<EventLog> log_;
};

}  // namespace paireval

#endif  // PAIREVAL_STUDY_STORE_H_
