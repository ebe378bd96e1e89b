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

// Batch MAP fitting of Elo scores and rater noise, and credible intervals
// around the fit.

#ifndef PAIREVAL_ELO_FIT_H_
#define PAIREVAL_ELO_FIT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "paireval/domain.h"
#include "paireval/elo_model.h"
#include "paireval/study_config.h"

namespace paireval {

struct FitOptions {
  // When set, every rater's noise is pinned to this value and only the Elo
  // scores are optimized.
  std::optional<double> fixed_noise;
};

// Minimizes the negative log posterior with L-BFGS. Elo scores are
// optimized in units of ln(10)/400, noises through a logistic transform
// eps = noise_max * sigmoid(u); convergence is declared when the gradient
// infinity-norm (Elo units for scores, u units for noises) drops below
// `settings.gradient_tolerance`.
//
// The result is a pure function of the multiset of judgments: answers are
// tallied into sorted sufficient statistics before optimization.
//
// Throws Error{"non_convergence"} (with the final gradient norm) after
// `settings.max_iterations`. A disconnected comparison graph is reported in
// `EloFit::warnings` with its component labels in `EloFit::components`.
// Returned estimates carry degenerate intervals; see CredibleIntervals.
EloFit FitMap(const std::vector<std::string>& methods,
              std::span<const Judgment> judgments,
              const FitterSettings& settings, const FitOptions& options = {});

// Two-sided standard normal quantile.
double NormalQuantile(double p);

// Central credible intervals from the Laplace approximation at the MAP: the
// Elo Hessian (noise held at its MAP value) is inverted and the common-shift
// direction projected out, so intervals describe scores relative to the
// study mean. Half-width = z_{(1+level)/2} * sd.
//
// Throws Error{"singular_curvature"} naming the methods whose offset is set
// by the prior alone (those outside the largest connected component), or
// when the curvature is not positive definite.
std::vector<EloEstimate> CredibleIntervals(const EloFit& fit,
                                           std::span<const Judgment> judgments,
                                           const FitterSettings& settings,
                                           double level = 0.99);

// The covariance behind CredibleIntervals, row-major in `fit.estimates`
// order. Same errors as CredibleIntervals.
std::vector<double> PosteriorCovariance(const EloFit& fit,
                                        std::span<const Judgment> judgments,
                                        const FitterSettings& settings);

struct SamplingOptions {
  int samples = 20000;
  int burn_in = 2000;
  uint64_t seed = 1;
};

// Cross-check for CredibleIntervals: random-walk Metropolis over the Elo
// scores (noise held at its MAP value) with a Laplace-shaped proposal;
// intervals are empirical quantiles of the mean-centred samples.
std::vector<EloEstimate> SampledCredibleIntervals(
    const EloFit& fit, std::span<const Judgment> judgments,
    const FitterSettings& settings, double level = 0.99,
    const SamplingOptions& sampling = {});

// FitMap followed by CredibleIntervals at `settings.interval_level`, with
// the covariance stored in the fit. When the
// intervals cannot be computed the point fit is returned with a warning.
EloFit FitWithIntervals(const std::vector<std::string>& methods,
                        std::span<const Judgment> judgments,
                        const FitterSettings& settings,
                        const FitOptions& options = {});

// Stable hex digest of the settings and method list a fit was produced with.
std::string ConfigFingerprint(const std::vector<std::string>& methods,
                              const FitterSettings& settings,
                              const FitOptions& options);

}  // namespace paireval

#endif  // PAIREVAL_ELO_FIT_H_
