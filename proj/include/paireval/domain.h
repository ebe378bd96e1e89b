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

// Core value types shared by the fitter, scheduler, analysis and service.

#ifndef PAIREVAL_DOMAIN_H_
#define PAIREVAL_DOMAIN_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace paireval {

// Base of every error raised by the library. `kind` is a short stable tag
// ("config", "blocked_rater", ...) used by the CLI and the HTTP layer to pick
// exit codes and status codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

enum class Subsampling { kYuv444, kYuv422, kYuv420 };

std::string_view SubsamplingName(Subsampling s);  // "yuv444"
std::optional<Subsampling> ParseSubsampling(std::string_view name);

// Encoder family. The three studied encoders are listed explicitly; anything
// else is carried by name.
struct Encoder {
  enum class Kind { kJpegli, kLibjpegTurbo, kMozjpeg, kOther };
  Kind kind = Kind::kOther;
  std::string name;  // Canonical name, e.g. "libjpeg-turbo".

  static Encoder FromName(std::string_view name);
  bool operator==(const Encoder&) const = default;
};

// One degradation setting. Ids follow "<encoder>-q<quality>-<subsampling>".
struct Method {
  std::string id;
  Encoder encoder;
  int quality = 0;
  Subsampling subsampling = Subsampling::kYuv444;
  std::optional<double> mean_bpp;

  bool operator==(const Method&) const = default;
};

// Formats "<encoder>-q<quality>-<subsampling>".
std::string MethodId(std::string_view encoder, int quality, Subsampling s);

// Parses a method id. The encoder name may itself contain dashes
// ("libjpeg-turbo-q70-yuv420"). Throws Error{"config"} on malformed ids.
Method ParseMethodId(std::string_view id);

struct ImageRef {
  std::string id;
  int width = 0;
  int height = 0;
  std::string source_path;

  bool operator==(const ImageRef&) const = default;
};

// One side of a comparison: an encoded method variant, the pristine original,
// or the heavily degraded image used by golden questions.
struct Stimulus {
  enum class Kind { kMethod, kOriginal, kHeavyDegraded };
  Kind kind = Kind::kMethod;
  std::string method;  // Set for kMethod.
  int quality = 0;     // Set for kHeavyDegraded.

  static Stimulus OfMethod(std::string id) {
    return {Kind::kMethod, std::move(id), 0};
  }
  static Stimulus Original() { return {Kind::kOriginal, {}, 0}; }
  static Stimulus HeavyDegraded(int quality) {
    return {Kind::kHeavyDegraded, {}, quality};
  }
  std::string Label() const;  // Method id, "ORIGINAL" or "HEAVY_DEGRADED(q)".
  bool operator==(const Stimulus&) const = default;
};

enum class Choice { kLeft, kRight };

std::string_view ChoiceName(Choice c);
std::optional<Choice> ParseChoice(std::string_view token);

struct Question {
  std::string id;
  std::string image;
  Stimulus left;
  Stimulus right;
  bool golden = false;
  std::string rater;
  int64_t issued_at = 0;

  bool operator==(const Question&) const = default;
};

// Throws Error{"invalid_question"} when the golden flag and the sides
// disagree or a non-golden question compares a method with itself.
void ValidateQuestion(const Question& q);

struct Answer {
  std::string question;
  std::string rater;
  Choice choice = Choice::kLeft;
  int64_t answered_at = 0;
  int toggles = 0;

  bool operator==(const Answer&) const = default;
};

struct RaterState {
  std::string rater;
  int golden_shown = 0;
  int golden_wrong = 0;
  bool blocked = false;
  int answers_given = 0;

  bool operator==(const RaterState&) const = default;
};

struct EloEstimate {
  std::string method;
  double elo = 0.0;
  double p99_low = 0.0;
  double p99_high = 0.0;
  // Posterior standard deviation behind the interval; 0 until intervals are
  // computed.
  double sd = 0.0;

  bool operator==(const EloEstimate&) const = default;
};

struct EloFit {
  std::vector<EloEstimate> estimates;
  std::map<std::string, double> rater_noise;
  double log_posterior = 0.0;
  std::string config_fingerprint;

  // Diagnostics.
  int iterations = 0;
  double gradient_norm = 0.0;
  int answer_count = 0;
  bool intervals = false;
  // Methods that appear in no comparison keep the prior mean.
  std::vector<std::string> unconstrained;
  // Connected-component label per estimate (same order as `estimates`).
  std::vector<int> components;
  std::vector<std::string> warnings;
  // Laplace posterior covariance of the Elo scores, row-major in `estimates`
  // order, relative to the study mean. Empty when intervals are absent.
  std::vector<double> covariance;

  const EloEstimate* Find(std::string_view method) const;
  bool operator==(const EloFit&) const = default;
};

// A question joined with its answer, reduced to what the likelihood needs.
struct Judgment {
  std::string rater;
  std::string winner;  // Method ids; empty for golden judgments.
  std::string loser;
  bool golden = false;
  bool correct = false;  // Golden only: the original was picked.

  static Judgment Preference(std::string rater, std::string winner,
                             std::string loser) {
    return {std::move(rater), std::move(winner), std::move(loser), false,
            false};
  }
  static Judgment Golden(std::string rater, bool correct) {
    return {std::move(rater), {}, {}, true, correct};
  }
  bool operator==(const Judgment&) const = default;
};

// Joins an answer with the question it answers.
Judgment Resolve(const Question& q, const Answer& a);

}  // namespace paireval

#endif  // PAIREVAL_DOMAIN_H_
