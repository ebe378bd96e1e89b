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

#include <filesystem>
#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "oracles.h"
#include "paireval/elo_fit.h"

namespace paireval {
namespace {

namespace fs = std::filesystem;

class StudyStoreTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracles::TempDir("store");
    log_ = dir_ + "/log.jsonl";
    config_ = oracles::MakeStudyConfig({"a-q1-yuv444", "b-q1-yuv444", "c-q1-yuv444"},
                                       20, log_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Kind(const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return "ok";
  }

  std::string dir_, log_;
  StudyConfig config_;
};

TEST_F(StudyStoreTest, RegisterIsIdempotent) {
  StudyStore store(config_, log_);
  EXPECT_EQ(store.RegisterRater("", 0), "rater-1");
  EXPECT_EQ(store.RegisterRater("", 0), "rater-2");
  EXPECT_EQ(store.RegisterRater("alice", 0), "alice");
  EXPECT_EQ(store.RegisterRater("alice", 0), "alice");
  EXPECT_EQ(store.state().raters.size(), 3u);
  EXPECT_EQ(store.state().events, 4);  // Header plus three raters.
}

TEST_F(StudyStoreTest, LeaseLifecycle) {
  StudyStore store(config_, log_);
  store.RegisterRater("r", 0);
  EXPECT_EQ(Kind([&] { store.NextQuestion("x", 0, 100); }), "unknown_rater");
  Question q1 = store.NextQuestion("r", 0, 100);
  EXPECT_EQ(Kind([&] { store.NextQuestion("r", 50, 100); }), "outstanding_question");
  Question q2 = store.NextQuestion("r", 100, 100);
  EXPECT_NE(q1.id, q2.id);
  EXPECT_TRUE(store.state().superseded.count(q1.id));
  EXPECT_EQ(Kind([&] { store.SubmitAnswer({q1.id, "r", Choice::kLeft, 101, 0}); }),
            "superseded");
  EXPECT_EQ(Kind([&] { store.SubmitAnswer({q2.id, "s", Choice::kLeft, 101, 0}); }),
            "rater_mismatch");
  EXPECT_EQ(Kind([&] { store.SubmitAnswer({"q-zz", "r", Choice::kLeft, 101, 0}); }),
            "unknown_question");
  auto result = store.SubmitAnswer({q2.id, "r", Choice::kLeft, 101, 0});
  EXPECT_FALSE(result.blocked);
  EXPECT_EQ(Kind([&] { store.SubmitAnswer({q2.id, "r", Choice::kLeft, 102, 0}); }),
            "duplicate_answer");
  EXPECT_EQ(store.state().answers.size(), 1u);
  EXPECT_TRUE(store.state().outstanding.empty());
}

TEST_F(StudyStoreTest, RejectedRecordsAreNotLogged) {
  int64_t events = 0;
  {
    StudyStore store(config_, log_);
    store.RegisterRater("r", 0);
    Question q = store.NextQuestion("r", 0, 1000);
    store.SubmitAnswer({q.id, "r", Choice::kRight, 1, 0});
    EXPECT_THROW(store.SubmitAnswer({q.id, "r", Choice::kRight, 2, 0}), Error);
    events = store.state().events;
  }
  auto contents = ReadLog(log_);
  EXPECT_EQ(static_cast<int64_t>(contents.records.size()), events);
}

TEST_F(StudyStoreTest, ReplayRestoresFitAndState) {
  StoreState before;
  {
    StudyStore store(config_, log_);
    std::mt19937 rng(1);
    for (int i = 0; i < 3; ++i) store.RegisterRater("", 0);
    for (int t = 0; t < 60; ++t) {
      std::string r = "rater-" + std::to_string(1 + rng() % 3);
      if (store.state().outstanding.count(r)) {
        store.SubmitAnswer({store.state().outstanding.at(r), r,
                            rng() % 2 ? Choice::kLeft : Choice::kRight, t, 0});
      } else {
        store.NextQuestion(r, t, 1000);
      }
    }
    store.RecordFit(FitWithIntervals(config_.MethodIds(), store.state().judgments,
                                     config_.fitter),
                    99);
    before = store.state();
  }
  StudyStore again(config_, log_);
  EXPECT_EQ(again.state(), before);
  ASSERT_TRUE(again.state().fit.has_value());
  EXPECT_EQ(again.state().fitted_at, 99);
}

TEST_F(StudyStoreTest, TornTailIsDropped) {
  {
    StudyStore store(config_, log_);
    store.RegisterRater("r", 0);
  }
  { std::ofstream(log_, std::ios::app) << "{\"type\":\"rat"; }
  StudyStore store(config_, log_);
  EXPECT_EQ(store.state().raters.size(), 1u);
  store.RegisterRater("s", 1);
  StudyStore again(config_, log_);
  EXPECT_EQ(again.state().raters.size(), 2u);
}

TEST_F(StudyStoreTest, CorruptMiddleLine) {
  {
    StudyStore store(config_, log_);
    store.RegisterRater("r", 0);
  }
  std::ifstream in(log_);
  std::string header, rater;
  std::getline(in, header);
  std::getline(in, rater);
  in.close();
  std::ofstream(log_) << header << "\ngarbage\n" << rater << "\n";
  EXPECT_EQ(Kind([&] { StudyStore s(config_, log_); }), "corrupt_log");
}

TEST_F(StudyStoreTest, ConfigMismatch) {
  { StudyStore store(config_, log_); }
  StudyConfig other = config_;
  other.golden.rate = 0.5;
  EXPECT_EQ(Kind([&] { StudyStore s(other, log_); }), "config_mismatch");
  // Service settings may change between runs.
  StudyConfig moved = config_;
  moved.service.lease_ms = 5;
  EXPECT_EQ(Kind([&] { StudyStore s(moved, log_); }), "ok");
}

TEST_F(StudyStoreTest, ApplyRecordChecksInvariants) {
  StoreState s = InitialStoreState(config_);
  ApplyRecord(s, HeaderRecord(config_));
  Question q{"q1", "img01", Stimulus::OfMethod("a-q1-yuv444"),
             Stimulus::OfMethod("b-q1-yuv444"), false, "r", 0};
  EXPECT_EQ(Kind([&] { CheckRecord(s, QuestionRecord(q)); }), "unknown_rater");
  ApplyRecord(s, RaterRecord("r", 0));
  ApplyRecord(s, QuestionRecord(q));
  Question q2 = q;
  q2.id = "q2";
  EXPECT_EQ(Kind([&] { CheckRecord(s, QuestionRecord(q2)); }), "outstanding_question");
  EXPECT_EQ(Kind([&] { CheckRecord(s, nlohmann::json{{"type", "nope"}}); }),
            "corrupt_log");
}

TEST_F(StudyStoreTest, CrashReplayProperty) {
  for (uint64_t seed : {1, 2, 3}) {
    oracles::Check c = oracles::CrashReplaySuite(seed);
    EXPECT_TRUE(c.pass) << c.detail;
  }
}

}  // namespace
}  // namespace paireval
