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

// Preference model used to turn forced-choice answers into Elo scores.
//
// Method i beats method j with the usual Elo probability
//
//   P(i > j) = 1 / (1 + 10^((elo_j - elo_i) / 400)).
//
// Each rater r answers at random (50/50) with probability eps_r, so the
// probability of the observed choice is
//
//   p_obs = eps_r / 2 + (1 - eps_r) * P(winner > loser).
//
// Golden questions are comparisons with a fixed Elo gap between the original
// and the heavily degraded image; they inform eps_r only. The negative log
// posterior adds a Gaussian prior on every Elo score (which also fixes the
// translation gauge) and a Beta prior on every eps_r:
//
//   F = - sum_answers log p_obs
//       + sum_i [ (elo_i - mu)^2 / (2 sd^2) + log(sqrt(2 pi) sd) ]
//       - sum_r log Beta(eps_r; alpha, beta).

#ifndef PAIREVAL_ELO_MODEL_H_
#define PAIREVAL_ELO_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "Eigen/Core"
#include "paireval/domain.h"
#include "paireval/study_config.h"

namespace paireval {

// Natural-log slope of the Elo scale: ln(10) / 400.
inline constexpr double kEloScale = 2.302585092994045684 / 400.0;

double WinProbability(double elo_a, double elo_b);

// Mixes the model probability with a coin flip of weight `noise`.
// Throws Error{"out_of_range"} when either input lies outside [0, 1].
double ObservedChoiceProbability(double p_model, double noise);

// Point in parameter space, addressed by method and rater id.
struct ModelParams {
  std::vector<std::string> methods;
  Eigen::VectorXd elos;
  std::vector<std::string> raters;
  Eigen::VectorXd noises;
};

// Answers reduced to sufficient statistics: for every (rater, winner, loser)
// the number of such outcomes, plus per-rater golden counts. Tallies are kept
// in sorted index order so every sum over them has a fixed order regardless
// of the order answers arrived in.
struct PairwiseData {
  struct Tally {
    int rater;
    int winner;
    int loser;
    double count;
  };
  std::vector<std::string> methods;
  std::vector<std::string> raters;
  std::vector<Tally> tallies;
  std::vector<double> golden_correct;  // Indexed by rater.
  std::vector<double> golden_wrong;
  int answer_count = 0;

  int num_methods() const { return static_cast<int>(methods.size()); }
  int num_raters() const { return static_cast<int>(raters.size()); }
};

// Raters absent from `raters` are appended (sorted) when `add_raters` is true;
// otherwise they are an error, as are unknown methods.
PairwiseData BuildPairwiseData(const std::vector<std::string>& methods,
                               const std::vector<std::string>& raters,
                               std::span<const Judgment> judgments,
                               bool add_raters = true);

// Sorted ids of every rater that appears in `judgments`.
std::vector<std::string> RatersOf(std::span<const Judgment> judgments);

struct ObjectiveOptions {
  Priors priors;
  double golden_gap = 800.0;
};

// Negative log posterior and its analytic derivatives on dense vectors
// indexed like `data.methods` / `data.raters`.
double NegativeLogPosterior(const PairwiseData& data,
                            const Eigen::VectorXd& elos,
                            const Eigen::VectorXd& noises,
                            const ObjectiveOptions& options);

// Gradient with respect to (elos, noises), concatenated.
Eigen::VectorXd NegativeLogPosteriorGradient(const PairwiseData& data,
                                             const Eigen::VectorXd& elos,
                                             const Eigen::VectorXd& noises,
                                             const ObjectiveOptions& options);

// Hessian with respect to the Elo scores at fixed noise.
Eigen::MatrixXd EloHessian(const PairwiseData& data,
                           const Eigen::VectorXd& elos,
                           const Eigen::VectorXd& noises,
                           const ObjectiveOptions& options);

// Id-addressed forms. Throw Error{"unknown_method"} / Error{"unknown_rater"}
// when an answer references something `params` does not index.
double NegativeLogPosterior(const ModelParams& params,
                            std::span<const Judgment> judgments,
                            const ObjectiveOptions& options);
Eigen::VectorXd NegativeLogPosteriorGradient(
    const ModelParams& params, std::span<const Judgment> judgments,
    const ObjectiveOptions& options);

// Connected components of the comparison graph (methods linked by at least
// one non-golden answer). Labels are dense, in order of first appearance.
std::vector<int> ComparisonComponents(const PairwiseData& data);

}  // namespace paireval

#endif  // PAIREVAL_ELO_MODEL_H_
