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

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "paireval/elo_fit.h"
#include "paireval/serialization.h"
#include "paireval/table_io.h"

// After Eigen: a system header pulled in here defines macros Eigen trips on.
#include "httplib.h"

namespace paireval {
namespace {

using nlohmann::json;

HttpResponse Json(int status, const json& doc) {
  return {status, "application/json", doc.dump()};
}

HttpResponse Fail(const Error& e) {
  return Json(StatusForError(e.kind()),
              {{"error", e.kind()}, {"message", e.what()}});
}

HttpResponse Fail(int status, const std::string& kind,
                  const std::string& message) {
  return Json(status, {{"error", kind}, {"message", message}});
}

std::string ReplaceAll(std::string s, const std::string& from,
                       const std::string& to) {
  for (size_t at = s.find(from); at != std::string::npos;
       at = s.find(from, at + to.size())) {
    s.replace(at, from.size(), to);
  }
  return s;
}

std::string ContentType(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".webp") return "image/webp";
  return "application/octet-stream";
}

// Rater-facing question payload. Carries no method id and no golden flag;
// both sides are addressed by the opaque labels A and B.
json QuestionPayload(const Question& q) {
  const std::string base = "/images/q/" + q.id + "/";
  return {{"question", q.id},
          {"rater", q.rater},
          {"original", base + "original"},
          {"variants",
           json::array({{{"label", "A"}, {"url", base + "A"}},
                        {{"label", "B"}, {"url", base + "B"}}})}};
}

}  // namespace

int StatusForError(const std::string& kind) {
  if (kind == "unknown_rater" || kind == "unknown_question" ||
      kind == "not_found") {
    return 404;
  }
  if (kind == "blocked_rater" || kind == "rater_mismatch") return 403;
  if (kind == "outstanding_question" || kind == "duplicate_answer" ||
      kind == "superseded" || kind == "no_eligible_image" ||
      kind == "duplicate_question") {
    return 409;
  }
  if (kind == "bad_request" || kind == "invalid_choice" || kind == "parse") {
    return 400;
  }
  if (kind == "no_fit") return 503;
  if (kind == "non_monotone_ladder" || kind == "ladder_too_short" ||
      kind == "config") {
    return 422;
  }
  return 500;
}

Service::Service(StudyConfig config, ServiceOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  if (!options_.clock) {
    options_.clock = [] {
      return std::chrono::duration_cast<std::chrono::milliseconds>(
                 std::chrono::system_clock::now().time_since_epoch())
          .count();
    };
  }
  store_ = std::make_unique<StudyStore>(config_, config_.service.log_path);
  PublishResults();
  if (!options_.synchronous_refit) {
    refit_thread_ = std::thread([this] { RefitLoop(); });
  }
}

Service::~Service() {
  Stop();
  {
    std::lock_guard<std::mutex> lock(refit_mu_);
    stopping_ = true;
  }
  refit_cv_.notify_all();
  if (refit_thread_.joinable()) refit_thread_.join();
}

int64_t Service::Now() const { return options_.clock(); }

StoreState Service::Snapshot() const {
  std::lock_guard<std::mutex> lock(state_mu_);
  return store_->state();
}

HttpResponse Service::Handle(const std::string& method, const std::string& path,
                             const std::map<std::string, std::string>& query,
                             const std::string& body) {
  try {
    if (method == "POST" && path == "/raters") return RegisterRater(body);
    if (method == "GET" && path == "/questions/next") return NextQuestion(query);
    if (method == "POST" && path == "/answers") return SubmitAnswer(body);
    if (method == "GET" && path == "/results") return GetResults();
    if (method == "GET" && path == "/reports/equivalent-quality") {
      return GetEquivalentQuality();
    }
    if (method == "GET" && path == "/healthz") return GetHealth();
    if (method == "GET" && path.rfind("/images/", 0) == 0) return GetImage(path);
    return Fail(404, "not_found", "no route for " + method + " " + path);
  } catch (const Error& e) {
    return Fail(e);
  } catch (const json::exception& e) {
    return Fail(400, "bad_request", e.what());
  } catch (const std::exception& e) {
    return Fail(500, "internal", e.what());
  }
}

HttpResponse Service::RegisterRater(const std::string& body) {
  std::string requested;
  if (!body.empty()) {
    json doc = json::parse(body);
    if (doc.contains("rater")) requested = doc.at("rater").get<std::string>();
  }
  std::lock_guard<std::mutex> lock(state_mu_);
  std::string id = store_->RegisterRater(requested, Now());
  return Json(200, {{"rater", id}});
}

HttpResponse Service::NextQuestion(
    const std::map<std::string, std::string>& query) {
  auto it = query.find("rater");
  if (it == query.end() || it->second.empty()) {
    return Fail(400, "bad_request", "missing rater parameter");
  }
  std::lock_guard<std::mutex> lock(state_mu_);
  Question q = store_->NextQuestion(it->second, Now(), config_.service.lease_ms);
  return Json(200, QuestionPayload(q));
}

HttpResponse Service::SubmitAnswer(const std::string& body) {
  json doc = json::parse(body);
  Answer answer;
  answer.question = doc.at("question").get<std::string>();
  answer.rater = doc.at("rater").get<std::string>();
  std::string token = doc.at("choice").get<std::string>();
  if (token == "A") {
    answer.choice = Choice::kLeft;
  } else if (token == "B") {
    answer.choice = Choice::kRight;
  } else {
    return Fail(400, "invalid_choice",
                "choice must be \"A\" or \"B\", got \"" + token + "\"");
  }
  answer.toggles = doc.value("toggles", 0);

  StudyStore::SubmitResult result;
  std::vector<Judgment> judgments;
  int answers = 0;
  {
    std::lock_guard<std::mutex> lock(state_mu_);
    answer.answered_at = Now();
    result = store_->SubmitAnswer(answer);
    answers = store_->state().scheduler.rater_states.at(answer.rater).answers_given;
    if (result.refit_due) judgments = store_->state().judgments;
  }
  if (result.refit_due) {
    if (options_.synchronous_refit) {
      RunRefit(std::move(judgments));
    } else {
      {
        std::lock_guard<std::mutex> lock(refit_mu_);
        pending_refit_ = std::move(judgments);
      }
      refit_cv_.notify_all();
    }
  }
  return Json(200, {{"accepted", true},
                    {"question", answer.question},
                    {"rater",
                     {{"id", answer.rater},
                      {"blocked", result.blocked},
                      {"answers", answers}}}});
}

void Service::RefitLoop() {
  std::unique_lock<std::mutex> lock(refit_mu_);
  while (true) {
    refit_cv_.wait(lock, [this] { return stopping_ || pending_refit_; });
    if (stopping_) return;
    std::vector<Judgment> judgments = std::move(*pending_refit_);
    pending_refit_.reset();
    refit_running_ = true;
    lock.unlock();
    RunRefit(std::move(judgments));
    lock.lock();
    refit_running_ = false;
    refit_cv_.notify_all();
  }
}

void Service::RunRefit(std::vector<Judgment> judgments) {
  EloFit fit;
  try {
    fit = FitWithIntervals(config_.MethodIds(), judgments, config_.fitter);
  } catch (const Error& e) {
    std::cerr << "refit over " << judgments.size()
              << " answers failed: " << e.kind() << ": " << e.what() << "\n";
    return;
  }
  {
    std::lock_guard<std::mutex> lock(state_mu_);
    // A slower fit must not replace a newer one.
    const auto& current = store_->state().fit;
    if (current && current->answer_count > fit.answer_count) return;
    store_->RecordFit(fit, Now());
  }
  PublishResults();
}

void Service::WaitForRefits() {
  std::unique_lock<std::mutex> lock(refit_mu_);
  refit_cv_.wait(lock, [this] {
    return stopping_ || (!pending_refit_ && !refit_running_);
  });
}

void Service::PublishResults() {
  std::optional<EloFit> fit;
  int64_t fitted_at = 0;
  {
    std::lock_guard<std::mutex> lock(state_mu_);
    fit = store_->state().fit;
    fitted_at = store_->state().fitted_at;
  }
  if (!fit) return;
  json doc = {{"study", config_.name},
              {"fitted_at", fitted_at},
              {"answer_count", fit->answer_count},
              {"fit", ToJson(*fit)},
              {"reports",
               {{"equivalent_quality", "/reports/equivalent-quality"}}}};
  auto results = std::make_shared<const Results>(Results{doc.dump(), *fit});
  std::lock_guard<std::mutex> lock(results_mu_);
  results_ = std::move(results);
}

HttpResponse Service::GetResults() {
  std::shared_ptr<const Results> results;
  {
    std::lock_guard<std::mutex> lock(results_mu_);
    results = results_;
  }
  if (!results) return Fail(503, "no_fit", "no fit has completed yet");
  return {200, "application/json", results->body};
}

HttpResponse Service::GetEquivalentQuality() {
  std::shared_ptr<const Results> results;
  {
    std::lock_guard<std::mutex> lock(results_mu_);
    results = results_;
  }
  if (!results) return Fail(503, "no_fit", "no fit has completed yet");
  std::vector<RatePoint> points;
  for (const auto& e : results->fit.estimates) {
    const Method* m = config_.FindMethod(e.method);
    if (m != nullptr && m->mean_bpp) points.push_back({e.method, e.elo, *m->mean_bpp});
  }
  EquivalentQualityTable table = EquivalentQualityReport(options_.ladders, points);
  std::ostringstream out;
  WriteEquivalentQualityTable(out, table);
  return {200, "text/csv", out.str()};
}

HttpResponse Service::GetHealth() {
  std::lock_guard<std::mutex> lock(state_mu_);
  const StoreState& s = store_->state();
  return Json(200, {{"status", "ok"},
                    {"answers", static_cast<int>(s.answers.size())},
                    {"raters", static_cast<int>(s.raters.size())},
                    {"fit", s.fit.has_value()}});
}

HttpResponse Service::GetImage(const std::string& path) {
  // /images/q/<question>/<original|A|B>
  const std::string prefix = "/images/q/";
  if (path.rfind(prefix, 0) != 0) {
    return Fail(404, "not_found", "unknown image path");
  }
  std::string rest = path.substr(prefix.size());
  size_t slash = rest.rfind('/');
  if (slash == std::string::npos) {
    return Fail(404, "not_found", "unknown image path");
  }
  std::string qid = rest.substr(0, slash);
  std::string label = rest.substr(slash + 1);

  std::string file;
  {
    std::lock_guard<std::mutex> lock(state_mu_);
    const auto& issued = store_->state().scheduler.issued;
    auto it = issued.find(qid);
    if (it == issued.end()) return Fail(404, "not_found", "unknown question");
    const Question& q = it->second;
    const ImageRef* image = nullptr;
    for (const auto& i : config_.images) {
      if (i.id == q.image) image = &i;
    }
    if (image == nullptr) return Fail(404, "not_found", "unknown image");
    const Stimulus* s = nullptr;
    if (label == "A") {
      s = &q.left;
    } else if (label == "B") {
      s = &q.right;
    } else if (label != "original") {
      return Fail(404, "not_found", "unknown image label");
    }
    if (s == nullptr || s->kind == Stimulus::Kind::kOriginal) {
      file = image->source_path;
    } else if (s->kind == Stimulus::Kind::kMethod) {
      file = ReplaceAll(ReplaceAll(config_.service.variant_path_template,
                                   "{method}", s->method),
                        "{image}", image->id);
    } else {
      file = ReplaceAll(ReplaceAll(config_.service.golden_path_template,
                                   "{quality}", std::to_string(s->quality)),
                        "{image}", image->id);
    }
  }
  std::ifstream in(file, std::ios::binary);
  if (!in) return Fail(404, "not_found", "image file unavailable");
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return {200, ContentType(file), std::move(data)};
}

void Service::InstallHandlers() {
  server_ = std::make_unique<httplib::Server>();
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    HttpResponse r = Handle(req.method, req.path, query, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server_->Get(R"(/.*)", dispatch);
  server_->Post(R"(/.*)", dispatch);
}

int Service::Start(const std::string& host, int port) {
  InstallHandlers();
  int bound = port == 0 ? server_->bind_to_any_port(host)
                        : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error("io", "cannot bind " + host + ":" + std::to_string(port));
  }
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void Service::Run(const std::string& host, int port) {
  InstallHandlers();
  if (!server_->bind_to_port(host, port)) {
    throw Error("io", "cannot bind " + host + ":" + std::to_string(port));
  }
  server_->listen_after_bind();
}

void Service::Stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace paireval
