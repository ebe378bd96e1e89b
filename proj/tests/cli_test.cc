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

#include "cli.h"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "oracles.h"
#include "paireval/table_io.h"

namespace paireval {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string Fixture(const std::string& name) {
  return std::string(PAIREVAL_FIXTURES) + "/" + name;
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult Cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = oracles::TempDir("cli"); }
  void TearDown() override { fs::remove_all(dir_); }
  std::string dir_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"frobnicate"}).code, 2);
  EXPECT_EQ(Cli({"fit"}).code, 2);
  EXPECT_EQ(Cli({"interp", "x.csv", "--bogus"}).code, 2);
}

TEST_F(CliTest, InterpReproducesAppendixB) {
  CliResult r = Cli({"interp", Fixture("appendix_a.csv"), "--omit-gaps"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream got(r.out), want_in(Slurp(Fixture("appendix_b.csv")));
  auto rows = ReadEquivalentQualityTable(got);
  auto want = ReadEquivalentQualityTable(want_in);
  ASSERT_EQ(rows.size(), want.size());
  int differing = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [k, v] : want[i]) {
      if (rows[i].at(k) == v) continue;
      ++differing;
      EXPECT_NEAR(std::stod(rows[i].at(k)), std::stod(v), 0.02) << k;
    }
  }
  EXPECT_EQ(differing, 1);

  CliResult gaps = Cli({"interp", Fixture("appendix_a.csv")});
  EXPECT_NE(gaps.out.find("libjpeg-turbo-q55-yuv420,1417.72,0.89,NA,NA"),
            std::string::npos);
}

TEST_F(CliTest, ReportHeadline) {
  std::string plot = dir_ + "/plot.csv";
  CliResult r = Cli({"report", Fixture("appendix_a.csv"), "--plot-data", plot});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  CsvTable t = ReadCsv(in);
  ASSERT_EQ(t.rows.size(), 2u);
  const auto& jpegli = t.rows[1].fields;
  EXPECT_EQ(jpegli[1], "jpegli");
  EXPECT_NEAR(std::stod(jpegli[3]), 2239.09, 0.01);
  EXPECT_EQ(jpegli[4], "1.51");
  EXPECT_NEAR(std::stod(jpegli[5]), 0.2798, 1e-4);
  EXPECT_TRUE(fs::exists(plot));

  CliResult outside = Cli({"report", Fixture("appendix_a.csv"), "--anchor-bpp", "9"});
  ASSERT_EQ(outside.code, 0);
  EXPECT_NE(outside.out.find("NA,NA,NA"), std::string::npos);
}

TEST_F(CliTest, SimulateThenFitRoundTrip) {
  json spec = {{"methods", json::array()},
               {"raters", {{{"id", "x"}, {"noise", 0.05}}, {{"id", "y"}, {"noise", 0.0}}}},
               {"answers", 100},
               {"images", 20},
               {"golden", {{"threshold", 20}}}};
  json study = {{"name", "sim"}, {"methods", json::array()},
                {"images", {{{"id", "i"}, {"width", 1}, {"height", 1}}}}};
  const int qualities[] = {60, 70, 80, 90};
  for (int i = 0; i < 4; ++i) {
    std::string id = "jpegli-q" + std::to_string(qualities[i]) + "-yuv444";
    spec["methods"].push_back({{"id", id}, {"elo", 1700 + 200 * i}});
    study["methods"].push_back(id);
  }
  std::ofstream(dir_ + "/spec.json") << spec.dump();
  std::ofstream(dir_ + "/study.json") << study.dump();
  std::string ratings = dir_ + "/ratings.csv", report = dir_ + "/report.json";
  CliResult sim = Cli({"simulate", "--spec", dir_ + "/spec.json", "--answers", "1500",
                 "--seed", "3", "--ratings-out", ratings, "--report-out", report});
  ASSERT_EQ(sim.code, 0) << sim.err;
  json rep = json::parse(Slurp(report));
  EXPECT_EQ(rep["answers"], 1500);
  EXPECT_TRUE(rep["ranks_exact"].get<bool>());

  CliResult fit = Cli({"fit", ratings, "--config", dir_ + "/study.json"});
  ASSERT_EQ(fit.code, 0) << fit.err;
  std::istringstream in(fit.out);
  auto rows = ReadEloTable(in);
  ASSERT_EQ(rows.size(), 4u);
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_LT(rows[i - 1].estimate.elo, rows[i].estimate.elo);
  }
}

TEST_F(CliTest, FitTable) {
  std::ofstream(dir_ + "/study.json") << json{
      {"name", "t"},
      {"methods", {{{"id", "jpegli-q90-yuv444"}, {"bpp", 1.9}},
                   {{"id", "mozjpeg-q90-yuv444"}, {"bpp", 2.5}}}},
      {"images", {{{"id", "i"}, {"width", 1}, {"height", 1}}}}}.dump();
  std::ofstream csv(dir_ + "/r.csv");
  csv << "rater,image,method_a,method_b,choice,golden\n";
  for (int i = 0; i < 30; ++i) {
    csv << "r" << i % 3 << ",i,jpegli-q90-yuv444,mozjpeg-q90-yuv444,"
        << (i % 4 ? "A" : "B") << ",0\n";
  }
  csv << "r1,i,jpegli-q90-yuv444\n";
  csv.close();
  std::string fit_json = dir_ + "/fit.json";
  CliResult r = Cli({"fit", dir_ + "/r.csv", "--config", dir_ + "/study.json",
               "--fit-json", fit_json, "--reference", Fixture("appendix_a.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("1 malformed rows skipped"), std::string::npos);
  EXPECT_NE(r.err.find("alignment vs"), std::string::npos);
  std::istringstream in(r.out);
  auto rows = ReadEloTable(in);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_GT(rows[0].estimate.elo, rows[1].estimate.elo);
  EXPECT_DOUBLE_EQ(*rows[1].bpp, 2.5);
  EXPECT_EQ(json::parse(Slurp(fit_json))["estimates"].size(), 2u);

  std::ofstream(dir_ + "/empty.csv") << "rater,image,method_a,method_b,choice,golden\n";
  EXPECT_EQ(Cli({"fit", dir_ + "/empty.csv", "--config", dir_ + "/study.json"}).code, 4);
  EXPECT_EQ(Cli({"fit", dir_ + "/none.csv", "--config", dir_ + "/study.json"}).code, 7);
}

TEST_F(CliTest, ConfigErrorsListProblems) {
  std::ofstream(dir_ + "/bad.json")
      << R"({"name": "x", "methods": [], "images": [], "golden": {"threshold": 0}})";
  CliResult r = Cli({"serve", "--config", dir_ + "/bad.json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("empty method set"), std::string::npos);
  EXPECT_NE(r.err.find("threshold"), std::string::npos);
}

TEST_F(CliTest, BuildCorpusCapability) {
  std::ofstream(dir_ + "/a.png") << "png";
  json study = {{"name", "c"},
                {"methods", {"jpegli-q90-yuv444"}},
                {"images", {{{"id", "a"}, {"width", 4}, {"height", 4},
                             {"path", dir_ + "/a.png"}}}},
                {"service",
                 {{"variant_path_template", dir_ + "/out/{method}/{image}.jpeg"}}}};
  std::ofstream(dir_ + "/study.json") << study.dump();
  std::string manifest = dir_ + "/manifest.json";
  CliResult off = Cli({"build-corpus", "--config", dir_ + "/study.json", "--manifest", manifest});
  EXPECT_EQ(off.code, 6);
  std::ofstream(dir_ + "/t.json")
      << R"({"jpegli": {"command": "definitely-missing-cjpegli {input} {output}"}})";
  CliResult missing = Cli({"build-corpus", "--config", dir_ + "/study.json", "--templates",
                     dir_ + "/t.json", "--manifest", manifest, "--run-encoders"});
  EXPECT_EQ(missing.code, 6);
  EXPECT_NE(missing.err.find("definitely-missing-cjpegli"), std::string::npos);
  std::ofstream(dir_ + "/t.json")
      << R"({"jpegli": {"command": "cp {input} {output}"}})";
  CliResult ok = Cli({"build-corpus", "--config", dir_ + "/study.json", "--templates",
                dir_ + "/t.json", "--manifest", manifest, "--run-encoders"});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(ok.out, "method,bpp\njpegli-q90-yuv444,1.5\n");
  EXPECT_TRUE(fs::exists(manifest));
}

// Starts `paireval serve` as a child process and reads the bound port from
// its stderr.
class ServeProcess {
 public:
  explicit ServeProcess(const std::vector<std::string>& args) {
    int fds[2];
    if (pipe(fds) != 0) return;
    pid_ = fork();
    if (pid_ == 0) {
      dup2(fds[1], 2);
      close(fds[0]);
      std::vector<char*> argv;
      std::string bin = PAIREVAL_BINARY;
      argv.push_back(bin.data());
      std::vector<std::string> copy = args;
      for (auto& a : copy) argv.push_back(a.data());
      argv.push_back(nullptr);
      execv(bin.c_str(), argv.data());
      _exit(127);
    }
    close(fds[1]);
    std::string line;
    char c;
    while (read(fds[0], &c, 1) == 1 && c != '\n') line += c;
    close(fds[0]);
    banner_ = line;
    size_t colon = line.rfind(':', line.find(", log"));
    if (colon != std::string::npos) port_ = std::atoi(line.c_str() + colon + 1);
  }
  ~ServeProcess() { Stop(); }
  int Stop() {
    if (pid_ <= 0) return -1;
    kill(pid_, SIGTERM);
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
  int port() const { return port_; }
  const std::string& banner() const { return banner_; }

 private:
  pid_t pid_ = -1;
  int port_ = 0;
  std::string banner_;
};

TEST_F(CliTest, ServeSubprocessSession) {
  json study = {{"name", "live"},
                {"methods", {"jpegli-q90-yuv444", "mozjpeg-q90-yuv444",
                             "libjpeg-turbo-q90-yuv444"}},
                {"images", json::array()},
                {"scheduler", {{"refresh_every", 5}}}};
  for (int i = 0; i < 12; ++i) {
    study["images"].push_back({{"id", "img" + std::to_string(i)}, {"width", 8}, {"height", 8}});
  }
  std::ofstream(dir_ + "/study.json") << study.dump();
  std::string log = dir_ + "/log.jsonl";
  {
    ServeProcess server({"serve", "--config", dir_ + "/study.json", "--port", "0",
                         "--log", log});
    ASSERT_GT(server.port(), 0) << server.banner();
    httplib::Client client("127.0.0.1", server.port());
    auto reg = client.Post("/raters", "{}", "application/json");
    ASSERT_TRUE(reg);
    std::string rater = json::parse(reg->body)["rater"];
    for (int t = 0; t < 10; ++t) {
      auto next = client.Get("/questions/next?rater=" + rater);
      ASSERT_TRUE(next);
      ASSERT_EQ(next->status, 200) << next->body;
      json answer = {{"question", json::parse(next->body)["question"]},
                     {"rater", rater},
                     {"choice", t % 2 ? "A" : "B"}};
      auto ack = client.Post("/answers", answer.dump(), "application/json");
      ASSERT_TRUE(ack);
      EXPECT_EQ(ack->status, 200);
    }
    EXPECT_EQ(server.Stop(), 0);
  }
  // The log survives the process; a restart picks the session up.
  ServeProcess again({"serve", "--config", dir_ + "/study.json", "--port", "0",
                      "--log", log});
  ASSERT_GT(again.port(), 0);
  httplib::Client client("127.0.0.1", again.port());
  auto health = client.Get("/healthz");
  ASSERT_TRUE(health);
  EXPECT_EQ(json::parse(health->body)["answers"], 10);
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeForError("config"), 3);
  EXPECT_EQ(ExitCodeForError("parse"), 4);
  EXPECT_EQ(ExitCodeForError("non_convergence"), 5);
  EXPECT_EQ(ExitCodeForError("capability"), 6);
  EXPECT_EQ(ExitCodeForError("io"), 7);
  EXPECT_EQ(ExitCodeForError("mystery"), 1);
}

}  // namespace
}  // namespace paireval
