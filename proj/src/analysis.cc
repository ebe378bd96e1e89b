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

#include "paireval/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>

namespace paireval {
namespace {

std::string Fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string Describe(const RatePoint& p) {
  return p.method + " (elo " + Fmt(p.elo) + ", bpp " + Fmt(p.bpp) + ")";
}

// Index of the segment [i, i+1] containing `x` along `key`.
template <typename Key>
size_t Segment(const std::vector<RatePoint>& pts, double x, Key key) {
  auto it = std::upper_bound(
      pts.begin(), pts.end(), x,
      [&](double v, const RatePoint& p) { return v < key(p); });
  size_t hi = static_cast<size_t>(it - pts.begin());
  if (hi >= pts.size()) hi = pts.size() - 1;
  if (hi == 0) hi = 1;
  return hi - 1;
}

std::vector<double> Ranks(std::span<const double> v) {
  std::vector<size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    double avg = 0.5 * (i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double BitsPerPixel(uint64_t file_size, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error("zero_pixels", "bits per pixel needs a positive pixel count");
  }
  return static_cast<double>(file_size) * 8.0 /
         (static_cast<double>(width) * static_cast<double>(height));
}

double MeanBpp(std::span<const ImageRate> images, BppAverage mode) {
  if (images.empty()) throw Error("empty", "no images to average");
  if (mode == BppAverage::kPooled) {
    double bits = 0.0, pixels = 0.0;
    for (const auto& img : images) {
      if (img.width <= 0 || img.height <= 0) {
        throw Error("zero_pixels", "image with zero pixels");
      }
      bits += 8.0 * static_cast<double>(img.file_size);
      pixels += static_cast<double>(img.width) * img.height;
    }
    return bits / pixels;
  }
  double sum = 0.0;
  for (const auto& img : images) {
    sum += BitsPerPixel(img.file_size, img.width, img.height);
  }
  return sum / static_cast<double>(images.size());
}

std::vector<std::string> Ladder::member_methods() const {
  std::vector<std::string> ids;
  for (const auto& p : points) ids.push_back(p.method);
  return ids;
}

Ladder BuildLadder(std::string family, std::span<const RatePoint> points,
                   const std::function<bool(const std::string&)>& select) {
  Ladder ladder;
  ladder.family = std::move(family);
  for (const auto& p : points) {
    if (!select || select(p.method)) ladder.points.push_back(p);
  }
  if (ladder.points.size() < 2) {
    throw Error("ladder_too_short", "ladder " + ladder.family +
                                        " needs at least 2 points, got " +
                                        std::to_string(ladder.points.size()));
  }
  std::stable_sort(
      ladder.points.begin(), ladder.points.end(),
      [](const RatePoint& a, const RatePoint& b) { return a.elo < b.elo; });
  for (size_t i = 1; i < ladder.points.size(); ++i) {
    const RatePoint& lo = ladder.points[i - 1];
    const RatePoint& hi = ladder.points[i];
    if (!(hi.elo > lo.elo) || !(hi.bpp > lo.bpp)) {
      throw Error("non_monotone_ladder",
                  "ladder " + ladder.family + " is not monotone: " +
                      Describe(hi) + " vs " + Describe(lo));
    }
  }
  return ladder;
}

Ladder BuildLadder(std::string family, std::span<const RatePoint> points) {
  return BuildLadder(std::move(family), points, nullptr);
}

std::vector<RatePoint> ParetoFilter(std::span<const RatePoint> points) {
  std::vector<RatePoint> kept;
  for (size_t i = 0; i < points.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < points.size() && !dominated; ++j) {
      if (i == j) continue;
      const RatePoint& a = points[i];
      const RatePoint& b = points[j];
      dominated = b.elo >= a.elo && b.bpp <= a.bpp &&
                  (b.elo > a.elo || b.bpp < a.bpp);
    }
    if (!dominated) kept.push_back(points[i]);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const RatePoint& a, const RatePoint& b) {
                     return a.elo < b.elo;
                   });
  return kept;
}

double BitrateAtElo(const Ladder& ladder, double elo) {
  const auto& pts = ladder.points;
  if (pts.size() < 2) throw Error("ladder_too_short", "ladder too short");
  if (!(elo >= pts.front().elo && elo <= pts.back().elo)) {
    throw Error("out_of_range", "elo " + Fmt(elo) + " outside ladder " +
                                    ladder.family + " [" +
                                    Fmt(pts.front().elo) + ", " +
                                    Fmt(pts.back().elo) + "]");
  }
  size_t i = Segment(pts, elo, [](const RatePoint& p) { return p.elo; });
  const RatePoint& a = pts[i];
  const RatePoint& b = pts[i + 1];
  if (elo == a.elo) return a.bpp;
  if (elo == b.elo) return b.bpp;
  double t = (elo - a.elo) / (b.elo - a.elo);
  return a.bpp + t * (b.bpp - a.bpp);
}

double EloAtBitrate(const Ladder& ladder, double bpp) {
  const auto& pts = ladder.points;
  if (pts.size() < 2) throw Error("ladder_too_short", "ladder too short");
  if (!(bpp >= pts.front().bpp && bpp <= pts.back().bpp)) {
    throw Error("out_of_range", "bpp " + Fmt(bpp) + " outside ladder " +
                                    ladder.family + " [" +
                                    Fmt(pts.front().bpp) + ", " +
                                    Fmt(pts.back().bpp) + "]");
  }
  size_t i = Segment(pts, bpp, [](const RatePoint& p) { return p.bpp; });
  const RatePoint& a = pts[i];
  const RatePoint& b = pts[i + 1];
  if (bpp == a.bpp) return a.elo;
  if (bpp == b.bpp) return b.elo;
  double t = (bpp - a.bpp) / (b.bpp - a.bpp);
  return a.elo + t * (b.elo - a.elo);
}

double BitrateReduction(const Ladder& anchor, const Ladder& other,
                        double anchor_bpp) {
  double elo = EloAtBitrate(anchor, anchor_bpp);
  return (anchor_bpp - BitrateAtElo(other, elo)) / anchor_bpp;
}

EquivalentQualityTable BuildEquivalentQualityTable(
    const Ladder& anchor, std::span<const Ladder> others,
    std::span<const RatePoint> anchor_points) {
  EquivalentQualityTable table;
  table.anchor_family = anchor.family;
  for (const auto& l : others) table.other_families.push_back(l.family);
  for (const auto& p : anchor_points) {
    EquivalentQualityRow row;
    row.anchor_method = p.method;
    row.elo = p.elo;
    row.anchor_bpp = p.bpp;
    for (const auto& l : others) {
      if (p.elo >= l.points.front().elo && p.elo <= l.points.back().elo) {
        row.bitrates.push_back(BitrateAtElo(l, p.elo));
      } else {
        row.bitrates.push_back(std::nullopt);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

double SpearmanCorrelation(std::span<const double> a,
                           std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error("config", "Spearman correlation needs two equal series");
  }
  std::vector<double> ra = Ranks(a), rb = Ranks(b);
  double n = static_cast<double>(a.size());
  double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return saa == sbb ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

Alignment AlignElos(std::span<const EloEstimate> fitted,
                    std::span<const EloEstimate> reference) {
  std::map<std::string, double> ref;
  for (const auto& e : reference) ref[e.method] = e.elo;
  std::vector<const EloEstimate*> common;
  double diff_sum = 0.0;
  for (const auto& e : fitted) {
    auto it = ref.find(e.method);
    if (it == ref.end()) continue;
    common.push_back(&e);
    diff_sum += it->second - e.elo;
  }
  if (common.empty()) {
    throw Error("no_common_methods", "fit and reference share no method");
  }
  Alignment out;
  out.common = static_cast<int>(common.size());
  out.translation = diff_sum / common.size();
  std::vector<double> xs, ys;
  for (const EloEstimate* e : common) {
    EloEstimate shifted = *e;
    shifted.elo += out.translation;
    shifted.p99_low += out.translation;
    shifted.p99_high += out.translation;
    double r = ref[e->method];
    out.max_abs_diff = std::max(out.max_abs_diff, std::abs(shifted.elo - r));
    xs.push_back(shifted.elo);
    ys.push_back(r);
    out.aligned.push_back(std::move(shifted));
  }
  out.spearman = xs.size() >= 2 ? SpearmanCorrelation(xs, ys) : 1.0;
  return out;
}

double RoundDecimal(double value, int decimals) {
  if (!std::isfinite(value)) return value;
  // Round on the decimal expansion rather than value * 10^d, which is inexact.
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12f", std::abs(value));
  std::string s(buf);
  size_t dot = s.find('.');
  std::string digits = s.substr(0, dot) + s.substr(dot + 1, decimals);
  bool round_up = s[dot + 1 + decimals] >= '5';
  if (round_up) {
    int i = static_cast<int>(digits.size()) - 1;
    while (i >= 0 && digits[i] == '9') digits[i--] = '0';
    if (i < 0) {
      digits.insert(digits.begin(), '1');
    } else {
      ++digits[i];
    }
  }
  double magnitude = std::strtod(digits.c_str(), nullptr);
  for (int i = 0; i < decimals; ++i) magnitude /= 10.0;
  return std::copysign(magnitude, value);
}

LadderConfig DefaultLadderConfig() {
  LadderConfig config;
  config.anchor = {"libjpeg_turbo", "libjpeg-turbo", {}, false};
  config.others = {{"mozjpeg", "mozjpeg", {}, false},
                   {"jpegli", "jpegli", {Subsampling::kYuv444}, false}};
  return config;
}

Ladder BuildLadder(const LadderSpec& spec, std::span<const RatePoint> points) {
  std::vector<RatePoint> selected;
  for (const auto& p : points) {
    Method m;
    try {
      m = ParseMethodId(p.method);
    } catch (const Error&) {
      continue;
    }
    if (m.encoder.name != spec.encoder) continue;
    if (!spec.subsampling.empty() &&
        std::find(spec.subsampling.begin(), spec.subsampling.end(),
                  m.subsampling) == spec.subsampling.end()) {
      continue;
    }
    selected.push_back(p);
  }
  if (spec.pareto) selected = ParetoFilter(selected);
  return BuildLadder(spec.family, selected);
}

LadderConfig LadderConfigFromJson(const nlohmann::json& doc) {
  auto spec = [](const nlohmann::json& j) {
    LadderSpec s;
    try {
      s.family = j.at("family").get<std::string>();
      s.encoder = j.value("encoder", s.family);
      for (const auto& name : j.value("subsampling", std::vector<std::string>{})) {
        auto sub = ParseSubsampling(name);
        if (!sub) throw Error("config", "unknown subsampling \"" + name + "\"");
        s.subsampling.push_back(*sub);
      }
      s.pareto = j.value("pareto", false);
    } catch (const nlohmann::json::exception& e) {
      throw Error("config", std::string("ladder spec: ") + e.what());
    }
    return s;
  };
  if (!doc.contains("anchor")) throw Error("config", "ladder config needs an anchor");
  LadderConfig config;
  config.anchor = spec(doc.at("anchor"));
  if (doc.contains("others")) {
    for (const auto& o : doc.at("others")) config.others.push_back(spec(o));
  }
  return config;
}

EquivalentQualityTable EquivalentQualityReport(
    const LadderConfig& config, std::span<const RatePoint> points) {
  Ladder anchor = BuildLadder(config.anchor, points);
  std::vector<Ladder> others;
  for (const auto& spec : config.others) {
    others.push_back(BuildLadder(spec, points));
  }
  return BuildEquivalentQualityTable(anchor, others, anchor.points);
}

}  // namespace paireval
