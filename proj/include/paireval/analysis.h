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

// Rate-distortion post-processing of fitted Elo scores: bits per pixel,
// quality ladders, piecewise-linear bitrate/Elo interpolation and
// equivalent-quality tables.

#ifndef PAIREVAL_ANALYSIS_H_
#define PAIREVAL_ANALYSIS_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "paireval/domain.h"

namespace paireval {

// file_size * 8 / (width * height). Throws Error{"zero_pixels"}.
double BitsPerPixel(uint64_t file_size, int width, int height);

// Aggregate of per-image bpp values for one method. The arithmetic mean of
// per-image values is the default; kPooled is total bits over total pixels.
enum class BppAverage { kPerImageMean, kPooled };
struct ImageRate {
  uint64_t file_size = 0;
  int width = 0;
  int height = 0;
};
double MeanBpp(std::span<const ImageRate> images,
               BppAverage mode = BppAverage::kPerImageMean);

// Fitted score joined with the method's mean bitrate.
struct RatePoint {
  std::string method;
  double elo = 0.0;
  double bpp = 0.0;
};

struct Ladder {
  std::string family;
  std::vector<RatePoint> points;  // Strictly increasing in elo and bpp.

  std::vector<std::string> member_methods() const;
};

// Sorts the selected points by elo and checks they are monotone in both
// axes. Throws Error{"non_monotone_ladder"} naming the offending pair, or
// Error{"ladder_too_short"} for fewer than two points.
Ladder BuildLadder(std::string family, std::span<const RatePoint> points,
                   const std::function<bool(const std::string&)>& select);
Ladder BuildLadder(std::string family, std::span<const RatePoint> points);

// Keeps the points no other point dominates (>= elo and <= bpp, one strict).
// Output is sorted by elo.
std::vector<RatePoint> ParetoFilter(std::span<const RatePoint> points);

// Piecewise-linear bpp at `elo`; exact at knots, no extrapolation
// (Error{"out_of_range"}).
double BitrateAtElo(const Ladder& ladder, double elo);
// Inverse of BitrateAtElo.
double EloAtBitrate(const Ladder& ladder, double bpp);

// (anchor_bpp - other bpp at the anchor's Elo) / anchor_bpp.
double BitrateReduction(const Ladder& anchor, const Ladder& other,
                        double anchor_bpp);

struct EquivalentQualityRow {
  std::string anchor_method;
  double elo = 0.0;
  double anchor_bpp = 0.0;
  // One entry per ladder in `others`; empty when the Elo is out of range.
  std::vector<std::optional<double>> bitrates;
};

struct EquivalentQualityTable {
  std::string anchor_family;
  std::vector<std::string> other_families;
  std::vector<EquivalentQualityRow> rows;
};

// One row per anchor point (in `anchor_points` order) with the bitrate each
// other ladder needs to reach the same Elo.
EquivalentQualityTable BuildEquivalentQualityTable(
    const Ladder& anchor, std::span<const Ladder> others,
    std::span<const RatePoint> anchor_points);

struct Alignment {
  double translation = 0.0;
  std::vector<EloEstimate> aligned;  // Fitted estimates shifted, common only.
  double spearman = 0.0;
  double max_abs_diff = 0.0;
  int common = 0;
};

// Shifts fitted scores by the mean (reference - fitted) over common methods.
// Throws Error{"no_common_methods"}.
Alignment AlignElos(std::span<const EloEstimate> fitted,
                    std::span<const EloEstimate> reference);

// Spearman rank correlation with average ranks for ties.
double SpearmanCorrelation(std::span<const double> a,
                           std::span<const double> b);

// Round-half-away-from-zero at `decimals` places, computed on the decimal
// representation so 1.005 rounds to 1.01.
double RoundDecimal(double value, int decimals);

// Which methods of a fitted table make up one family's ladder.
struct LadderSpec {
  std::string family;  // Table label, e.g. "libjpeg_turbo".
  std::string encoder;
  // Subsamplings to keep; empty keeps every row of the encoder.
  std::vector<Subsampling> subsampling;
  bool pareto = false;
};

struct LadderConfig {
  LadderSpec anchor;
  std::vector<LadderSpec> others;
};

// libjpeg-turbo (all rows) as the anchor; mozjpeg (all rows) and jpegli
// (yuv444 rows) as the compared ladders.
LadderConfig DefaultLadderConfig();

Ladder BuildLadder(const LadderSpec& spec, std::span<const RatePoint> points);

// {"anchor": spec, "others": [spec...]} with spec = {"family", "encoder",
// "subsampling": [...], "pareto"}. Throws Error{"config"}.
LadderConfig LadderConfigFromJson(const nlohmann::json& doc);

// Builds every ladder of `config` from `points` and tabulates the anchor's
// rows.
EquivalentQualityTable EquivalentQualityReport(const LadderConfig& config,
                                               std::span<const RatePoint> points);

}  // namespace paireval

#endif  // PAIREVAL_ANALYSIS_H_
