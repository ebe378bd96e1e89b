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

#include "paireval/elo_fit.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "Eigen/Cholesky"
#include "lbfgs.h"

namespace paireval {
namespace {

double Sigmoid(double u) {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  double e = std::exp(u);
  return e / (1.0 + e);
}

double Logit(double p) { return std::log(p / (1.0 - p)); }

ObjectiveOptions ObjectiveFor(const FitterSettings& settings) {
  return {settings.priors, settings.golden_gap};
}

Eigen::VectorXd NoiseVector(const EloFit& fit,
                            const std::vector<std::string>& raters) {
  Eigen::VectorXd noises(raters.size());
  for (size_t r = 0; r < raters.size(); ++r) {
    noises[r] = fit.rater_noise.at(raters[r]);
  }
  return noises;
}

// Rebuilds the tallies a fit was produced from, in the fit's index order.
PairwiseData DataForFit(const EloFit& fit,
                        std::span<const Judgment> judgments) {
  std::vector<std::string> methods, raters;
  for (const auto& e : fit.estimates) methods.push_back(e.method);
  for (const auto& [rater, noise] : fit.rater_noise) raters.push_back(rater);
  return BuildPairwiseData(methods, raters, judgments, /*add_raters=*/false);
}

Eigen::VectorXd EloVector(const EloFit& fit) {
  Eigen::VectorXd elos(fit.estimates.size());
  for (size_t i = 0; i < fit.estimates.size(); ++i) {
    elos[i] = fit.estimates[i].elo;
  }
  return elos;
}

// Methods outside the largest comparison component.
std::vector<std::string> LooseMethods(const PairwiseData& data) {
  std::vector<int> labels = ComparisonComponents(data);
  if (labels.empty()) return {};
  std::map<int, int> sizes;
  for (int l : labels) ++sizes[l];
  int best = 0;
  for (const auto& [label, size] : sizes) {
    if (size > sizes[best]) best = label;
  }
  std::vector<std::string> loose;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != best) loose.push_back(data.methods[i]);
  }
  return loose;
}

std::string JoinIds(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ", ";
    out += id;
  }
  return out;
}

// Laplace covariance of the Elo scores with the common shift projected out.
Eigen::MatrixXd ProjectedCovariance(const PairwiseData& data,
                                    const Eigen::VectorXd& elos,
                                    const Eigen::VectorXd& noises,
                                    const FitterSettings& settings,
                                    Eigen::MatrixXd* full = nullptr) {
  std::vector<std::string> loose = LooseMethods(data);
  if (!loose.empty()) {
    throw Error("singular_curvature",
                "Elo offsets set by the prior alone (unconstrained): " +
                    JoinIds(loose));
  }
  const Eigen::Index m = elos.size();
  Eigen::MatrixXd h = EloHessian(data, elos, noises, ObjectiveFor(settings));
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) {
    throw Error("singular_curvature",
                "posterior curvature is not positive definite at the MAP");
  }
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  if (full != nullptr) *full = cov;
  Eigen::MatrixXd projector = Eigen::MatrixXd::Identity(m, m) -
                              Eigen::MatrixXd::Constant(m, m, 1.0 / m);
  return projector * cov * projector;
}

std::vector<EloEstimate> IntervalsFromCovariance(
    std::vector<EloEstimate> estimates, const std::vector<double>& cov,
    double level) {
  const double z = NormalQuantile(0.5 * (1.0 + level));
  const size_t n = estimates.size();
  for (size_t i = 0; i < n; ++i) {
    double sd = std::sqrt(std::max(cov[i * n + i], 0.0));
    estimates[i].sd = sd;
    estimates[i].p99_low = estimates[i].elo - z * sd;
    estimates[i].p99_high = estimates[i].elo + z * sd;
  }
  return estimates;
}

}  // namespace

std::string ConfigFingerprint(const std::vector<std::string>& methods,
                              const FitterSettings& settings,
                              const FitOptions& options) {
  std::ostringstream canon;
  canon.precision(17);
  canon << settings.priors.elo_mean << '|' << settings.priors.elo_sd << '|'
        << settings.priors.noise_alpha << '|' << settings.priors.noise_beta
        << '|' << settings.noise_max << '|' << settings.golden_gap << '|'
        << settings.gradient_tolerance << '|' << settings.max_iterations
        << '|' << settings.interval_level << '|';
  if (options.fixed_noise) canon << "fixed:" << *options.fixed_noise;
  for (const auto& m : methods) canon << '|' << m;
  // FNV-1a, 64 bit.
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon.str()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

EloFit FitMap(const std::vector<std::string>& methods,
              std::span<const Judgment> judgments,
              const FitterSettings& settings, const FitOptions& options) {
  if (methods.empty()) throw Error("config", "empty method set");
  PairwiseData data = BuildPairwiseData(methods, {}, judgments);
  const int m = data.num_methods();
  const int r = data.num_raters();
  const bool free_noise = !options.fixed_noise.has_value();
  const double nmax = settings.noise_max;
  const double mu = settings.priors.elo_mean;
  const ObjectiveOptions objective = ObjectiveFor(settings);
  if (options.fixed_noise &&
      !(*options.fixed_noise >= 0.0 && *options.fixed_noise <= nmax)) {
    throw Error("out_of_range", "fixed noise outside [0, noise_max]");
  }

  const int n = m + (free_noise ? r : 0);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  if (free_noise) {
    for (int k = 0; k < r; ++k) {
      double total = data.golden_correct[k] + data.golden_wrong[k];
      double eps = 0.1;
      if (total > 0) {
        eps = std::clamp(2.0 * data.golden_wrong[k] / total, 0.01, 0.5);
      }
      eps = std::min(eps / nmax, 0.99);
      x0[m + k] = Logit(eps);
    }
  }

  Eigen::VectorXd elos(m), noises(r);
  auto unpack = [&](const Eigen::VectorXd& x) {
    elos = mu + x.head(m).array() / kEloScale;
    for (int k = 0; k < r; ++k) {
      noises[k] = free_noise ? nmax * Sigmoid(x[m + k]) : *options.fixed_noise;
    }
  };
  internal::Objective objective_fn = [&](const Eigen::VectorXd& x,
                                         Eigen::VectorXd* grad) {
    unpack(x);
    Eigen::VectorXd g =
        NegativeLogPosteriorGradient(data, elos, noises, objective);
    grad->resize(n);
    grad->head(m) = g.head(m) / kEloScale;
    if (free_noise) {
      for (int k = 0; k < r; ++k) {
        double s = Sigmoid(x[m + k]);
        (*grad)[m + k] = g[m + k] * nmax * s * (1.0 - s);
      }
    }
    return NegativeLogPosterior(data, elos, noises, objective);
  };

  internal::LbfgsOptions lbfgs;
  lbfgs.max_iterations = settings.max_iterations;
  lbfgs.tolerance = settings.gradient_tolerance;
  lbfgs.gradient_units = Eigen::VectorXd::Ones(n);
  lbfgs.gradient_units.head(m).setConstant(kEloScale);
  internal::LbfgsResult opt = internal::MinimizeLbfgs(objective_fn, x0, lbfgs);
  if (!opt.converged) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "MAP fit did not converge after %d iterations (gradient "
                  "norm %.3g, tolerance %.3g)",
                  opt.iterations, opt.gradient_norm,
                  settings.gradient_tolerance);
    throw Error("non_convergence", buf);
  }
  unpack(opt.x);

  EloFit fit;
  fit.estimates.reserve(m);
  for (int i = 0; i < m; ++i) {
    fit.estimates.push_back({methods[i], elos[i], elos[i], elos[i], 0.0});
  }
  for (int k = 0; k < r; ++k) fit.rater_noise[data.raters[k]] = noises[k];
  fit.log_posterior = -opt.value;
  fit.config_fingerprint = ConfigFingerprint(methods, settings, options);
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.gradient_norm;
  fit.answer_count = data.answer_count;

  std::vector<bool> touched(m, false);
  for (const auto& t : data.tallies) touched[t.winner] = touched[t.loser] = true;
  for (int i = 0; i < m; ++i) {
    if (!touched[i]) fit.unconstrained.push_back(methods[i]);
  }
  fit.components = ComparisonComponents(data);
  int num_components =
      fit.components.empty()
          ? 0
          : *std::max_element(fit.components.begin(), fit.components.end()) + 1;
  if (num_components > 1) {
    std::string msg = "comparison graph is disconnected (" +
                      std::to_string(num_components) + " components):";
    for (int i = 0; i < m; ++i) {
      msg += " " + methods[i] + "=" + std::to_string(fit.components[i]);
    }
    fit.warnings.push_back(msg);
  }
  if (!fit.unconstrained.empty()) {
    fit.warnings.push_back("methods without answers keep the prior mean: " +
                           JoinIds(fit.unconstrained));
  }
  return fit;
}

double NormalQuantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error("out_of_range", "quantile level must lie in (0, 1)");
  }
  // Acklam's rational approximation, then Halley steps on erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - 0.02425) {
    double q = p - 0.5, rr = q * q;
    x = (((((a[0] * rr + a[1]) * rr + a[2]) * rr + a[3]) * rr + a[4]) * rr +
         a[5]) *
        q /
        (((((b[0] * rr + b[1]) * rr + b[2]) * rr + b[3]) * rr + b[4]) * rr +
         1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  for (int i = 0; i < 2; ++i) {
    double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
    x = x - u / (1 + x * u / 2);
  }
  return x;
}

std::vector<EloEstimate> CredibleIntervals(const EloFit& fit,
                                           std::span<const Judgment> judgments,
                                           const FitterSettings& settings,
                                           double level) {
  return IntervalsFromCovariance(
      fit.estimates, PosteriorCovariance(fit, judgments, settings), level);
}

std::vector<double> PosteriorCovariance(const EloFit& fit,
                                        std::span<const Judgment> judgments,
                                        const FitterSettings& settings) {
  PairwiseData data = DataForFit(fit, judgments);
  Eigen::MatrixXd cov = ProjectedCovariance(
      data, EloVector(fit), NoiseVector(fit, data.raters), settings);
  std::vector<double> out(cov.size());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < cov.cols(); ++j) {
      out[i * cov.cols() + j] = cov(i, j);
    }
  }
  return out;
}

std::vector<EloEstimate> SampledCredibleIntervals(
    const EloFit& fit, std::span<const Judgment> judgments,
    const FitterSettings& settings, double level,
    const SamplingOptions& sampling) {
  if (sampling.samples < 2 || sampling.burn_in < 0) {
    throw Error("config", "sampling needs at least two samples");
  }
  PairwiseData data = DataForFit(fit, judgments);
  const Eigen::Index m = data.num_methods();
  Eigen::VectorXd map_elos = EloVector(fit);
  Eigen::VectorXd noises = NoiseVector(fit, data.raters);
  Eigen::MatrixXd full;
  ProjectedCovariance(data, map_elos, noises, settings, &full);
  Eigen::MatrixXd step = full.llt().matrixL();
  step *= 2.38 / std::sqrt(static_cast<double>(m));
  const ObjectiveOptions objective = ObjectiveFor(settings);

  std::mt19937_64 rng(sampling.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Eigen::VectorXd current = map_elos;
  double current_nlp = NegativeLogPosterior(data, current, noises, objective);
  const double map_mean = map_elos.mean();
  std::vector<std::vector<double>> draws(m);
  for (auto& d : draws) d.reserve(sampling.samples);
  Eigen::VectorXd noise_draw(m);
  for (int it = 0; it < sampling.burn_in + sampling.samples; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) noise_draw[i] = normal(rng);
    Eigen::VectorXd proposal = current + step * noise_draw;
    double proposal_nlp =
        NegativeLogPosterior(data, proposal, noises, objective);
    if (std::log(uniform(rng)) < current_nlp - proposal_nlp) {
      current = std::move(proposal);
      current_nlp = proposal_nlp;
    }
    if (it < sampling.burn_in) continue;
    double shift = map_mean - current.mean();
    for (Eigen::Index i = 0; i < m; ++i) draws[i].push_back(current[i] + shift);
  }
  auto quantile = [](std::vector<double>& v, double q) {
    double pos = q * (v.size() - 1);
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  std::vector<EloEstimate> out = fit.estimates;
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double>& d = draws[i];
    std::sort(d.begin(), d.end());
    double mean = 0.0, sq = 0.0;
    for (double v : d) mean += v;
    mean /= d.size();
    for (double v : d) sq += (v - mean) * (v - mean);
    out[i].sd = std::sqrt(sq / (d.size() - 1));
    out[i].p99_low = quantile(d, 0.5 * (1.0 - level));
    out[i].p99_high = quantile(d, 0.5 * (1.0 + level));
  }
  return out;
}

EloFit FitWithIntervals(const std::vector<std::string>& methods,
                        std::span<const Judgment> judgments,
                        const FitterSettings& settings,
                        const FitOptions& options) {
  EloFit fit = FitMap(methods, judgments, settings, options);
  try {
    fit.covariance = PosteriorCovariance(fit, judgments, settings);
    fit.estimates = IntervalsFromCovariance(fit.estimates, fit.covariance,
                                            settings.interval_level);
    fit.intervals = true;
  } catch (const Error& e) {
    if (e.kind() != "singular_curvature") throw;
    fit.warnings.push_back(std::string("no credible intervals: ") + e.what());
  }
  return fit;
}

}  // namespace paireval
