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

#include "paireval/service.h"

#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.h"

namespace paireval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracles::TempDir("service");
    config_ = oracles::MakeStudyConfig(
        {"jpegli-q90-yuv444", "libjpeg-turbo-q90-yuv444", "mozjpeg-q90-yuv444"}, 20,
        dir_ + "/log.jsonl");
    config_.scheduler.refresh_every = 5;
    config_.service.variant_path_template = dir_ + "/{method}/{image}.jpeg";
    config_.service.golden_path_template = dir_ + "/golden-q{quality}/{image}.jpeg";
    for (auto& m : config_.methods) {
      m.mean_bpp = m.encoder.name == "jpegli" ? 1.5 : 2.0;
      fs::create_directories(dir_ + "/" + m.id);
    }
    fs::create_directories(dir_ + "/golden-q50");
    for (auto& img : config_.images) {
      img.source_path = dir_ + "/" + img.id + ".png";
      std::ofstream(img.source_path) << "orig-" << img.id;
      for (const auto& m : config_.methods) {
        std::ofstream(dir_ + "/" + m.id + "/" + img.id + ".jpeg") << m.id;
      }
      std::ofstream(dir_ + "/golden-q50/" + img.id + ".jpeg") << "heavy";
    }
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::unique_ptr<Service> Make(bool sync = true) {
    ServiceOptions options;
    options.synchronous_refit = sync;
    options.clock = [this] { return clock_; };
    return std::make_unique<Service>(config_, options);
  }

  std::string dir_;
  StudyConfig config_;
  int64_t clock_ = 0;
};

json Body(const HttpResponse& r) { return json::parse(r.body); }

TEST_F(ServiceTest, QuestionAnswerCycle) {
  auto svc = Make();
  EXPECT_EQ(svc->Handle("GET", "/results", {}, "").status, 503);
  std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
  EXPECT_EQ(rater, "rater-1");
  EXPECT_EQ(Body(svc->Handle("POST", "/raters", {}, R"({"rater":"zed"})"))["rater"],
            "zed");
  for (int t = 0; t < 10; ++t) {
    ++clock_;
    HttpResponse next = svc->Handle("GET", "/questions/next", {{"rater", rater}}, "");
    ASSERT_EQ(next.status, 200) << next.body;
    json q = Body(next);
    ASSERT_EQ(q["variants"].size(), 2u);
    EXPECT_EQ(q["variants"][0]["label"], "A");
    json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "B"},
                   {"toggles", 2}};
    HttpResponse ack = svc->Handle("POST", "/answers", {}, answer.dump());
    ASSERT_EQ(ack.status, 200) << ack.body;
    EXPECT_EQ(Body(ack)["rater"]["answers"], t + 1);
  }
  HttpResponse results = svc->Handle("GET", "/results", {}, "");
  ASSERT_EQ(results.status, 200);
  json doc = Body(results);
  EXPECT_EQ(doc["answer_count"], 10);
  EXPECT_EQ(doc["fit"]["estimates"].size(), 3u);
  EXPECT_EQ(svc->Snapshot().answers[0].toggles, 2);
  json health = Body(svc->Handle("GET", "/healthz", {}, ""));
  EXPECT_EQ(health["answers"], 10);
  EXPECT_EQ(health["raters"], 2);
}

TEST_F(ServiceTest, ErrorStatuses) {
  auto svc = Make();
  std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
  EXPECT_EQ(svc->Handle("GET", "/questions/next", {}, "").status, 400);
  EXPECT_EQ(svc->Handle("GET", "/questions/next", {{"rater", "ghost"}}, "").status, 404);
  json q = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
  EXPECT_EQ(svc->Handle("GET", "/questions/next", {{"rater", rater}}, "").status, 409);
  json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "C"}};
  HttpResponse bad = svc->Handle("POST", "/answers", {}, answer.dump());
  EXPECT_EQ(bad.status, 400);
  EXPECT_EQ(Body(bad)["error"], "invalid_choice");
  EXPECT_EQ(svc->Handle("POST", "/answers", {}, "{not json").status, 400);
  answer["choice"] = "A";
  answer["rater"] = "zed";
  svc->Handle("POST", "/raters", {}, R"({"rater":"zed"})");
  EXPECT_EQ(svc->Handle("POST", "/answers", {}, answer.dump()).status, 403);
  answer["rater"] = rater;
  EXPECT_EQ(svc->Handle("POST", "/answers", {}, answer.dump()).status, 200);
  EXPECT_EQ(svc->Handle("POST", "/answers", {}, answer.dump()).status, 409);
  answer["question"] = "q-none";
  EXPECT_EQ(svc->Handle("POST", "/answers", {}, answer.dump()).status, 404);
  EXPECT_EQ(svc->Handle("DELETE", "/answers", {}, "").status, 404);
}

TEST_F(ServiceTest, ExpiredLeaseSupersedes) {
  config_.service.lease_ms = 1000;
  auto svc = Make();
  std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
  json q1 = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
  clock_ += 1000;
  HttpResponse next = svc->Handle("GET", "/questions/next", {{"rater", rater}}, "");
  ASSERT_EQ(next.status, 200);
  json answer = {{"question", q1["question"]}, {"rater", rater}, {"choice", "A"}};
  HttpResponse late = svc->Handle("POST", "/answers", {}, answer.dump());
  EXPECT_EQ(late.status, 409);
  EXPECT_EQ(Body(late)["error"], "superseded");
}

TEST_F(ServiceTest, ServesImagesBlind) {
  auto svc = Make();
  std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
  json q = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
  Question issued = svc->Snapshot().scheduler.issued.at(q["question"]);
  HttpResponse orig = svc->Handle("GET", q["original"], {}, "");
  ASSERT_EQ(orig.status, 200);
  EXPECT_EQ(orig.body, "orig-" + issued.image);
  EXPECT_EQ(orig.content_type, "image/png");
  HttpResponse a = svc->Handle("GET", q["variants"][0]["url"], {}, "");
  ASSERT_EQ(a.status, 200);
  EXPECT_EQ(a.content_type, "image/jpeg");
  if (issued.golden) {
    EXPECT_TRUE(a.body == "heavy" || a.body == "orig-" + issued.image);
  } else {
    EXPECT_EQ(a.body, issued.left.method);
  }
  EXPECT_EQ(svc->Handle("GET", "/images/q/nope/A", {}, "").status, 404);
  EXPECT_EQ(svc->Handle("GET", "/images/q/" + q["question"].get<std::string>() + "/C",
                        {}, "").status,
            404);
}

TEST_F(ServiceTest, EquivalentQualityReport) {
  auto svc = Make();
  EXPECT_EQ(svc->Handle("GET", "/reports/equivalent-quality", {}, "").status, 503);
  for (int r = 0; r < 2; ++r) {
    std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
    for (int t = 0; t < 10; ++t) {
      ++clock_;
      json q = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
      json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "A"}};
      svc->Handle("POST", "/answers", {}, answer.dump());
    }
  }
  HttpResponse report = svc->Handle("GET", "/reports/equivalent-quality", {}, "");
  // A one-point ladder cannot be interpolated.
  EXPECT_EQ(report.status, 422) << report.body;
}

TEST_F(ServiceTest, BackgroundRefitPublishes) {
  auto svc = Make(false);
  std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
  for (int t = 0; t < 15; ++t) {
    ++clock_;
    json q = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
    json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "A"}};
    ASSERT_EQ(svc->Handle("POST", "/answers", {}, answer.dump()).status, 200);
  }
  svc->WaitForRefits();
  json doc = Body(svc->Handle("GET", "/results", {}, ""));
  EXPECT_EQ(doc["answer_count"], 15);
}

TEST_F(ServiceTest, RestartKeepsStudy) {
  {
    auto svc = Make();
    std::string rater = Body(svc->Handle("POST", "/raters", {}, ""))["rater"];
    for (int t = 0; t < 7; ++t) {
      ++clock_;
      json q = Body(svc->Handle("GET", "/questions/next", {{"rater", rater}}, ""));
      json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "B"}};
      svc->Handle("POST", "/answers", {}, answer.dump());
    }
  }
  auto svc = Make();
  EXPECT_EQ(svc->Snapshot().answers.size(), 7u);
  EXPECT_EQ(svc->Handle("GET", "/results", {}, "").status, 200);
}

TEST_F(ServiceTest, HttpSmoke) {
  auto svc = Make(false);
  int port = svc->Start("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  httplib::Client client("127.0.0.1", port);
  auto reg = client.Post("/raters", "", "application/json");
  ASSERT_TRUE(reg);
  EXPECT_EQ(reg->status, 200);
  std::string rater = json::parse(reg->body)["rater"];
  auto next = client.Get("/questions/next?rater=" + rater);
  ASSERT_TRUE(next);
  ASSERT_EQ(next->status, 200);
  json q = json::parse(next->body);
  auto img = client.Get(q["original"].get<std::string>());
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  json answer = {{"question", q["question"]}, {"rater", rater}, {"choice", "A"}};
  auto ack = client.Post("/answers", answer.dump(), "application/json");
  ASSERT_TRUE(ack);
  EXPECT_EQ(ack->status, 200);
  auto missing = client.Get("/nowhere");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  svc->Stop();
}

TEST(ServicePropertyTest, Blinding) {
  for (uint64_t seed : {1, 2}) {
    oracles::Check c = oracles::BlindingSuite(seed);
    EXPECT_TRUE(c.pass) << c.detail;
  }
}

TEST(StatusForErrorTest, Mapping) {
  EXPECT_EQ(StatusForError("blocked_rater"), 403);
  EXPECT_EQ(StatusForError("unknown_rater"), 404);
  EXPECT_EQ(StatusForError("duplicate_answer"), 409);
  EXPECT_EQ(StatusForError("no_fit"), 503);
  EXPECT_EQ(StatusForError("whatever"), 500);
}

}  // namespace
}  // namespace paireval
