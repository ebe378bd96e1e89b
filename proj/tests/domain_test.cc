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

#include <random>

#include "gtest/gtest.h"

namespace paireval {
namespace {

TEST(MethodIdTest, RoundTripsEveryFixtureShape) {
  for (const char* encoder : {"jpegli", "libjpeg-turbo", "mozjpeg"}) {
    for (int q : {1, 55, 95, 100}) {
      for (auto s : {Subsampling::kYuv444, Subsampling::kYuv422,
                     Subsampling::kYuv420}) {
        std::string id = MethodId(encoder, q, s);
        Method m = ParseMethodId(id);
        EXPECT_EQ(m.id, id);
        EXPECT_EQ(m.encoder.name, encoder);
        EXPECT_EQ(m.quality, q);
        EXPECT_EQ(m.subsampling, s);
      }
    }
  }
}

TEST(MethodIdTest, EncoderKinds) {
  EXPECT_EQ(ParseMethodId("libjpeg-turbo-q85-yuv422").encoder.kind,
            Encoder::Kind::kLibjpegTurbo);
  EXPECT_EQ(ParseMethodId("jpegli-q90-yuv444").encoder.kind,
            Encoder::Kind::kJpegli);
  EXPECT_EQ(ParseMethodId("mozjpeg-q70-yuv420").encoder.kind,
            Encoder::Kind::kMozjpeg);
  EXPECT_EQ(ParseMethodId("webp-q70-yuv420").encoder.kind,
            Encoder::Kind::kOther);
}

TEST(MethodIdTest, RejectsMalformed) {
  for (const char* bad : {"", "jpegli", "jpegli-q90", "jpegli-90-yuv444",
                          "jpegli-q0-yuv444", "jpegli-q101-yuv444",
                          "jpegli-qx-yuv444", "jpegli-q90-444",
                          "jpegli-q90-yuv411", "-q90-yuv444"}) {
    try {
      ParseMethodId(bad);
      ADD_FAILURE() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), "config") << bad;
    }
  }
}

TEST(SubsamplingTest, AcceptsAllSpellings) {
  EXPECT_EQ(ParseSubsampling("4:2:0"), Subsampling::kYuv420);
  EXPECT_EQ(ParseSubsampling("422"), Subsampling::kYuv422);
  EXPECT_EQ(ParseSubsampling("yuv444"), Subsampling::kYuv444);
  EXPECT_FALSE(ParseSubsampling("yuv411").has_value());
  EXPECT_EQ(SubsamplingName(Subsampling::kYuv422), "yuv422");
}

TEST(ChoiceTest, Tokens) {
  EXPECT_EQ(ParseChoice("A"), Choice::kLeft);
  EXPECT_EQ(ParseChoice("right"), Choice::kRight);
  EXPECT_FALSE(ParseChoice("maybe").has_value());
  EXPECT_EQ(ChoiceName(Choice::kRight), "right");
}

TEST(QuestionTest, GoldenFlagMustMatchStimuli) {
  Question q{"q1", "img", Stimulus::Original(), Stimulus::HeavyDegraded(50),
             true, "r", 0};
  EXPECT_NO_THROW(ValidateQuestion(q));
  q.golden = false;
  EXPECT_THROW(ValidateQuestion(q), Error);
  Question p{"q2", "img", Stimulus::OfMethod("a"), Stimulus::OfMethod("b"),
             true, "r", 0};
  EXPECT_THROW(ValidateQuestion(p), Error);
  p.golden = false;
  EXPECT_NO_THROW(ValidateQuestion(p));
  p.right = Stimulus::OfMethod("a");
  EXPECT_THROW(ValidateQuestion(p), Error);
}

TEST(StimulusTest, Labels) {
  EXPECT_EQ(Stimulus::Original().Label(), "ORIGINAL");
  EXPECT_EQ(Stimulus::HeavyDegraded(50).Label(), "HEAVY_DEGRADED(50)");
  EXPECT_EQ(Stimulus::OfMethod("jpegli-q90-yuv444").Label(),
            "jpegli-q90-yuv444");
}

// Swapping the sides and flipping the choice never changes the judgment.
TEST(ResolveTest, InvariantUnderSideSwap) {
  std::mt19937 rng(3);
  for (int t = 0; t < 200; ++t) {
    bool golden = rng() % 2;
    Question q;
    q.id = "q";
    q.rater = "r";
    q.golden = golden;
    q.left = golden ? Stimulus::Original() : Stimulus::OfMethod("a");
    q.right = golden ? Stimulus::HeavyDegraded(50) : Stimulus::OfMethod("b");
    Answer a{"q", "r", rng() % 2 ? Choice::kLeft : Choice::kRight, 0, 0};
    Question swapped = q;
    std::swap(swapped.left, swapped.right);
    Answer flipped = a;
    flipped.choice =
        a.choice == Choice::kLeft ? Choice::kRight : Choice::kLeft;
    EXPECT_EQ(Resolve(q, a), Resolve(swapped, flipped));
  }
}

TEST(ResolveTest, GoldenCorrectness) {
  Question q{"q", "img", Stimulus::HeavyDegraded(50), Stimulus::Original(),
             true, "r", 0};
  EXPECT_TRUE(Resolve(q, {"q", "r", Choice::kRight, 0, 0}).correct);
  EXPECT_FALSE(Resolve(q, {"q", "r", Choice::kLeft, 0, 0}).correct);
  Question p{"p", "img", Stimulus::OfMethod("a"), Stimulus::OfMethod("b"),
             false, "r", 0};
  Judgment j = Resolve(p, {"p", "r", Choice::kRight, 0, 0});
  EXPECT_EQ(j.winner, "b");
  EXPECT_EQ(j.loser, "a");
}

}  // namespace
}  // namespace paireval
