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

// The rating service: rater registration, question issuance, answer intake,
// background refits and read-only results, over HTTP. See docs/http_api.md.

#ifndef PAIREVAL_SERVICE_H_
#define PAIREVAL_SERVICE_H_

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "paireval/analysis.h"
#include "paireval/study_config.h"
#include "paireval/study_store.h"

namespace httplib {
class Server;
}

namespace paireval {

struct ServiceOptions {
  // Runs refits inline before the triggering answer is acknowledged instead
  // of on the background thread.
  bool synchronous_refit = false;
  // Milliseconds; defaults to the system clock.
  std::function<int64_t()> clock;
  LadderConfig ladders = DefaultLadderConfig();
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

class Service {
 public:
  // Opens (and replays) the log at config.service.log_path.
  Service(StudyConfig config, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Transport-independent request handling; the HTTP server delegates here.
  HttpResponse Handle(const std::string& method, const std::string& path,
                      const std::map<std::string, std::string>& query,
                      const std::string& body);

  // Binds and serves on a background thread. Returns the bound port (an
  // ephemeral one when `port` is 0). Throws Error{"io"}.
  int Start(const std::string& host, int port);
  // Serves on the calling thread until Stop().
  void Run(const std::string& host, int port);
  void Stop();

  // Blocks until no refit is queued or running.
  void WaitForRefits();

  StoreState Snapshot() const;

 private:
  struct Results {
    std::string body;
    EloFit fit;
  };

  HttpResponse RegisterRater(const std::string& body);
  HttpResponse NextQuestion(const std::map<std::string, std::string>& query);
  HttpResponse SubmitAnswer(const std::string& body);
  HttpResponse GetResults();
  HttpResponse GetEquivalentQuality();
  HttpResponse GetHealth();
  HttpResponse GetImage(const std::string& path);

  void RefitLoop();
  void RunRefit(std::vector<Judgment> judgments);
  void PublishResults();
  void InstallHandlers();
  int64_t Now() const;

  StudyConfig config_;
  ServiceOptions options_;

  mutable std::mutex state_mu_;  // Serializes every store operation.
  std::unique_ptr<StudyStore> store_;

  mutable std::mutex results_mu_;  // Guards the pointer only.
  std::shared_ptr<const Results> results_;

  std::mutex refit_mu_;
  std::condition_variable refit_cv_;
  std::optional<std::vector<Judgment>> pending_refit_;
  bool refit_running_ = false;
  bool stopping_ = false;
  std::thread refit_thread_;

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

// HTTP status for an Error kind.
int StatusForError(const std::string& kind);

}  // namespace paireval

#endif  // PAIREVAL_SERVICE_H_
