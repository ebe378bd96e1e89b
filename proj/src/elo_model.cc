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

#include "paireval/elo_model.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <tuple>
#include <unordered_map>

namespace paireval {
namespace {

double BetaLogNormalizer(double alpha, double beta) {
  return std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
}

// -log Beta(eps; alpha, beta). Shape 1 terms are skipped so eps = 0 or 1
// stays finite when the density is.
double NegLogBeta(double eps, double alpha, double beta) {
  double value = BetaLogNormalizer(alpha, beta);
  if (alpha != 1.0) value -= (alpha - 1.0) * std::log(eps);
  if (beta != 1.0) value -= (beta - 1.0) * std::log1p(-eps);
  return value;
}

double NegLogBetaDerivative(double eps, double alpha, double beta) {
  double d = 0.0;
  if (alpha != 1.0) d -= (alpha - 1.0) / eps;
  if (beta != 1.0) d += (beta - 1.0) / (1.0 - eps);
  return d;
}

std::unordered_map<std::string, int> IndexOf(
    const std::vector<std::string>& ids) {
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);
  return index;
}

}  // namespace

double WinProbability(double elo_a, double elo_b) {
  return 1.0 / (1.0 + std::pow(10.0, (elo_b - elo_a) / 400.0));
}

double ObservedChoiceProbability(double p_model, double noise) {
  if (!(p_model >= 0.0 && p_model <= 1.0)) {
    throw Error("out_of_range", "model probability outside [0, 1]");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) {
    throw Error("out_of_range", "rater noise outside [0, 1]");
  }
  return 0.5 * noise + (1.0 - noise) * p_model;
}

std::vector<std::string> RatersOf(std::span<const Judgment> judgments) {
  std::set<std::string> raters;
  for (const auto& j : judgments) raters.insert(j.rater);
  return {raters.begin(), raters.end()};
}

PairwiseData BuildPairwiseData(const std::vector<std::string>& methods,
                               const std::vector<std::string>& raters,
                               std::span<const Judgment> judgments,
                               bool add_raters) {
  PairwiseData data;
  data.methods = methods;
  data.raters = raters;
  auto method_index = IndexOf(methods);
  if (method_index.size() != methods.size()) {
    throw Error("config", "duplicate method id in fit");
  }
  auto rater_index = IndexOf(data.raters);
  if (add_raters) {
    std::set<std::string> extra;
    for (const auto& j : judgments) {
      if (!rater_index.count(j.rater)) extra.insert(j.rater);
    }
    for (const auto& r : extra) {
      rater_index[r] = static_cast<int>(data.raters.size());
      data.raters.push_back(r);
    }
  }
  data.golden_correct.assign(data.raters.size(), 0.0);
  data.golden_wrong.assign(data.raters.size(), 0.0);

  std::map<std::tuple<int, int, int>, double> counts;
  for (const auto& j : judgments) {
    auto rit = rater_index.find(j.rater);
    if (rit == rater_index.end()) {
      throw Error("unknown_rater", "unknown rater \"" + j.rater + "\"");
    }
    ++data.answer_count;
    if (j.golden) {
      (j.correct ? data.golden_correct : data.golden_wrong)[rit->second] += 1;
      continue;
    }
    auto wit = method_index.find(j.winner);
    auto lit = method_index.find(j.loser);
    if (wit == method_index.end() || lit == method_index.end()) {
      throw Error("unknown_method",
                  "unknown method \"" +
                      (wit == method_index.end() ? j.winner : j.loser) + "\"");
    }
    counts[{rit->second, wit->second, lit->second}] += 1.0;
  }
  data.tallies.reserve(counts.size());
  for (const auto& [key, count] : counts) {
    auto [r, w, l] = key;
    data.tallies.push_back({r, w, l, count});
  }
  return data;
}

double NegativeLogPosterior(const PairwiseData& data,
                            const Eigen::VectorXd& elos,
                            const Eigen::VectorXd& noises,
                            const ObjectiveOptions& options) {
  const Priors& priors = options.priors;
  double value = 0.0;
  for (const auto& t : data.tallies) {
    double p = WinProbability(elos[t.winner], elos[t.loser]);
    double eps = noises[t.rater];
    value -= t.count * std::log(0.5 * eps + (1.0 - eps) * p);
  }
  const double pg = WinProbability(options.golden_gap, 0.0);
  for (int r = 0; r < data.num_raters(); ++r) {
    double eps = noises[r];
    if (data.golden_correct[r] > 0) {
      value -= data.golden_correct[r] * std::log(0.5 * eps + (1.0 - eps) * pg);
    }
    if (data.golden_wrong[r] > 0) {
      value -= data.golden_wrong[r] *
               std::log(0.5 * eps + (1.0 - eps) * (1.0 - pg));
    }
    value += NegLogBeta(eps, priors.noise_alpha, priors.noise_beta);
  }
  const double log_norm =
      std::log(priors.elo_sd) + 0.5 * std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < data.num_methods(); ++i) {
    double z = (elos[i] - priors.elo_mean) / priors.elo_sd;
    value += 0.5 * z * z + log_norm;
  }
  return value;
}

Eigen::VectorXd NegativeLogPosteriorGradient(const PairwiseData& data,
                                             const Eigen::VectorXd& elos,
                                             const Eigen::VectorXd& noises,
                                             const ObjectiveOptions& options) {
  const int m = data.num_methods();
  const Priors& priors = options.priors;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(m + data.num_raters());
  for (const auto& t : data.tallies) {
    double p = WinProbability(elos[t.winner], elos[t.loser]);
    double eps = noises[t.rater];
    double p_obs = 0.5 * eps + (1.0 - eps) * p;
    double d_elo = t.count * (1.0 - eps) * kEloScale * p * (1.0 - p) / p_obs;
    grad[t.winner] -= d_elo;
    grad[t.loser] += d_elo;
    grad[m + t.rater] -= t.count * (0.5 - p) / p_obs;
  }
  const double pg = WinProbability(options.golden_gap, 0.0);
  for (int r = 0; r < data.num_raters(); ++r) {
    double eps = noises[r];
    double& g = grad[m + r];
    if (data.golden_correct[r] > 0) {
      g -= data.golden_correct[r] * (0.5 - pg) / (0.5 * eps + (1.0 - eps) * pg);
    }
    if (data.golden_wrong[r] > 0) {
      g -= data.golden_wrong[r] * (pg - 0.5) /
           (0.5 * eps + (1.0 - eps) * (1.0 - pg));
    }
    g += NegLogBetaDerivative(eps, priors.noise_alpha, priors.noise_beta);
  }
  const double inv_var = 1.0 / (priors.elo_sd * priors.elo_sd);
  for (int i = 0; i < m; ++i) grad[i] += (elos[i] - priors.elo_mean) * inv_var;
  return grad;
}

Eigen::MatrixXd EloHessian(const PairwiseData& data,
                           const Eigen::VectorXd& elos,
                           const Eigen::VectorXd& noises,
                           const ObjectiveOptions& options) {
  const int m = data.num_methods();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  for (const auto& t : data.tallies) {
    double p = WinProbability(elos[t.winner], elos[t.loser]);
    double q = 1.0 - noises[t.rater];
    double p_obs = 0.5 * noises[t.rater] + q * p;
    // d p_obs / d(gap) and its derivative.
    double g1 = q * kEloScale * p * (1.0 - p);
    double g2 = q * kEloScale * kEloScale * p * (1.0 - p) * (1.0 - 2.0 * p);
    double c = t.count * (g1 * g1 - g2 * p_obs) / (p_obs * p_obs);
    h(t.winner, t.winner) += c;
    h(t.loser, t.loser) += c;
    h(t.winner, t.loser) -= c;
    h(t.loser, t.winner) -= c;
  }
  const double sd = options.priors.elo_sd;
  h.diagonal().array() += 1.0 / (sd * sd);
  return h;
}

namespace {

PairwiseData DataFor(const ModelParams& params,
                     std::span<const Judgment> judgments) {
  if (params.elos.size() != static_cast<Eigen::Index>(params.methods.size()) ||
      params.noises.size() != static_cast<Eigen::Index>(params.raters.size())) {
    throw Error("config", "parameter vectors do not match their id lists");
  }
  return BuildPairwiseData(params.methods, params.raters, judgments,
                           /*add_raters=*/false);
}

}  // namespace

double NegativeLogPosterior(const ModelParams& params,
                            std::span<const Judgment> judgments,
                            const ObjectiveOptions& options) {
  return NegativeLogPosterior(DataFor(params, judgments), params.elos,
                              params.noises, options);
}

Eigen::VectorXd NegativeLogPosteriorGradient(
    const ModelParams& params, std::span<const Judgment> judgments,
    const ObjectiveOptions& options) {
  return NegativeLogPosteriorGradient(DataFor(params, judgments), params.elos,
                                      params.noises, options);
}

std::vector<int> ComparisonComponents(const PairwiseData& data) {
  const int m = data.num_methods();
  std::vector<int> parent(m);
  for (int i = 0; i < m; ++i) parent[i] = i;
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& t : data.tallies) {
    int a = find(t.winner), b = find(t.loser);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<int> labels(m, -1);
  std::unordered_map<int, int> dense;
  for (int i = 0; i < m; ++i) {
    int root = find(i);
    auto [it, inserted] = dense.emplace(root, static_cast<int>(dense.size()));
    labels[i] = it->second;
  }
  return labels;
}

}  // namespace paireval
