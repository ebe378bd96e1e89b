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

#include "paireval/domain.h"

#include <algorithm>
#include <charconv>

namespace paireval {

std::string_view SubsamplingName(Subsampling s) {
  switch (s) {
    case Subsampling::kYuv444:
      return "yuv444";
    case Subsampling::kYuv422:
      return "yuv422";
    case Subsampling::kYuv420:
      return "yuv420";
  }
  return "yuv444";
}

std::optional<Subsampling> ParseSubsampling(std::string_view name) {
  if (name == "yuv444" || name == "444" || name == "4:4:4") {
    return Subsampling::kYuv444;
  }
  if (name == "yuv422" || name == "422" || name == "4:2:2") {
    return Subsampling::kYuv422;
  }
  if (name == "yuv420" || name == "420" || name == "4:2:0") {
    return Subsampling::kYuv420;
  }
  return std::nullopt;
}

Encoder Encoder::FromName(std::string_view name) {
  Encoder e;
  e.name = std::string(name);
  if (name == "jpegli") {
    e.kind = Kind::kJpegli;
  } else if (name == "libjpeg-turbo") {
    e.kind = Kind::kLibjpegTurbo;
  } else if (name == "mozjpeg") {
    e.kind = Kind::kMozjpeg;
  }
  return e;
}

std::string MethodId(std::string_view encoder, int quality, Subsampling s) {
  std::string id(encoder);
  id += "-q";
  id += std::to_string(quality);
  id += '-';
  id += SubsamplingName(s);
  return id;
}

Method ParseMethodId(std::string_view id) {
  auto fail = [&](const char* why) -> Error {
    return Error("config", "malformed method id \"" + std::string(id) +
                               "\": " + why);
  };
  size_t sub_dash = id.rfind('-');
  if (sub_dash == std::string_view::npos || sub_dash == 0) {
    throw fail("expected <encoder>-q<quality>-<subsampling>");
  }
  size_t q_dash = id.rfind('-', sub_dash - 1);
  if (q_dash == std::string_view::npos || q_dash == 0) {
    throw fail("expected <encoder>-q<quality>-<subsampling>");
  }
  std::string_view encoder = id.substr(0, q_dash);
  std::string_view quality = id.substr(q_dash + 1, sub_dash - q_dash - 1);
  std::string_view sub = id.substr(sub_dash + 1);
  if (quality.size() < 2 || quality[0] != 'q') throw fail("missing q<quality>");
  int q = 0;
  auto [ptr, ec] =
      std::from_chars(quality.data() + 1, quality.data() + quality.size(), q);
  if (ec != std::errc() || ptr != quality.data() + quality.size()) {
    throw fail("quality is not an integer");
  }
  if (q < 1 || q > 100) throw fail("quality outside 1..100");
  std::optional<Subsampling> s;
  if (sub.starts_with("yuv")) s = ParseSubsampling(sub);
  if (!s) throw fail("unknown subsampling");
  Method m;
  m.id = std::string(id);
  m.encoder = Encoder::FromName(encoder);
  m.quality = q;
  m.subsampling = *s;
  return m;
}

std::string Stimulus::Label() const {
  switch (kind) {
    case Kind::kMethod:
      return method;
    case Kind::kOriginal:
      return "ORIGINAL";
    case Kind::kHeavyDegraded:
      return "HEAVY_DEGRADED(" + std::to_string(quality) + ")";
  }
  return method;
}

std::string_view ChoiceName(Choice c) {
  return c == Choice::kLeft ? "left" : "right";
}

std::optional<Choice> ParseChoice(std::string_view token) {
  if (token == "left" || token == "LEFT" || token == "A" || token == "a") {
    return Choice::kLeft;
  }
  if (token == "right" || token == "RIGHT" || token == "B" || token == "b") {
    return Choice::kRight;
  }
  return std::nullopt;
}

void ValidateQuestion(const Question& q) {
  using K = Stimulus::Kind;
  bool golden_shape = (q.left.kind == K::kOriginal &&
                       q.right.kind == K::kHeavyDegraded) ||
                      (q.left.kind == K::kHeavyDegraded &&
                       q.right.kind == K::kOriginal);
  if (q.golden != golden_shape) {
    throw Error("invalid_question",
                "question " + q.id +
                    ": golden flag must be set iff one side is ORIGINAL and "
                    "the other HEAVY_DEGRADED");
  }
  if (!q.golden) {
    if (q.left.kind != K::kMethod || q.right.kind != K::kMethod) {
      throw Error("invalid_question",
                  "question " + q.id + ": non-golden sides must be methods");
    }
    if (q.left.method == q.right.method) {
      throw Error("invalid_question",
                  "question " + q.id + ": compares " + q.left.method +
                      " with itself");
    }
  }
}

const EloEstimate* EloFit::Find(std::string_view method) const {
  auto it = std::find_if(estimates.begin(), estimates.end(),
                         [&](const EloEstimate& e) { return e.method == method; });
  return it == estimates.end() ? nullptr : &*it;
}

Judgment Resolve(const Question& q, const Answer& a) {
  const Stimulus& chosen = a.choice == Choice::kLeft ? q.left : q.right;
  const Stimulus& other = a.choice == Choice::kLeft ? q.right : q.left;
  if (q.golden) {
    return Judgment::Golden(a.rater,
                            chosen.kind == Stimulus::Kind::kOriginal);
  }
  return Judgment::Preference(a.rater, chosen.method, other.method);
}

}  // namespace paireval
