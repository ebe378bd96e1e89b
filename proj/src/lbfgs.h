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

// Limited-memory BFGS with a strong-Wolfe line search (Nocedal & Wright,
// Algorithms 7.4, 3.5 and 3.6).

#ifndef PAIREVAL_SRC_LBFGS_H_
#define PAIREVAL_SRC_LBFGS_H_

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>

#include "Eigen/Core"

namespace paireval::internal {

// Returns the objective value and writes the gradient.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 10000;
  // Converged when max_i |grad_i * gradient_units_i| < tolerance. An empty
  // unit vector means all ones.
  double tolerance = 1e-6;
  Eigen::VectorXd gradient_units;
  double c1 = 1e-4;
  double c2 = 0.9;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  double gradient_norm = 0.0;  // Scaled infinity norm.
  int iterations = 0;
  bool converged = false;
};

namespace lbfgs_detail {

// Minimizer of the cubic interpolating (a, fa, ga) and (b, fb, gb), clamped
// to the safeguarded interior of [a, b].
inline double CubicStep(double a, double fa, double ga, double b, double fb,
                        double gb) {
  double lo = std::min(a, b), hi = std::max(a, b);
  double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  double disc = d1 * d1 - ga * gb;
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    double d2 = std::copysign(std::sqrt(disc), b - a);
    double denom = gb - ga + 2.0 * d2;
    if (denom != 0.0) t = b - (b - a) * (gb + d2 - d1) / denom;
  }
  double margin = 0.1 * (hi - lo);
  if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (a + b);
  return t;
}

}  // namespace lbfgs_detail

inline LbfgsResult MinimizeLbfgs(const Objective& f, Eigen::VectorXd x0,
                                 const LbfgsOptions& options) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd units = options.gradient_units.size() == n
                              ? options.gradient_units
                              : Eigen::VectorXd::Ones(n);
  auto scaled_norm = [&](const Eigen::VectorXd& g) {
    return n == 0 ? 0.0 : (g.array() * units.array()).abs().maxCoeff();
  };

  LbfgsResult result;
  result.x = std::move(x0);
  result.gradient.resize(n);
  result.value = f(result.x, &result.gradient);
  result.gradient_norm = scaled_norm(result.gradient);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd x_new(n), g_new(n);
  int failures = 0;

  while (result.iterations < options.max_iterations) {
    if (result.gradient_norm < options.tolerance) {
      result.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = result.gradient;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    double gamma = 1.0;
    if (!s_hist.empty()) {
      gamma = s_hist.back().dot(y_hist.back()) /
              y_hist.back().squaredNorm();
    } else {
      double gnorm = result.gradient.norm();
      if (gnorm > 1.0) gamma = 1.0 / gnorm;
    }
    q *= gamma;
    for (size_t i = 0; i < s_hist.size(); ++i) {
      double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double dg0 = dir.dot(result.gradient);
    if (!(dg0 < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -result.gradient;
      dg0 = dir.dot(result.gradient);
    }

    // Strong-Wolfe line search.
    const double f0 = result.value;
    auto eval = [&](double t, double* fv, double* dg) {
      x_new = result.x + t * dir;
      *fv = f(x_new, &g_new);
      *dg = g_new.dot(dir);
    };
    // Near the optimum the decrease drops below rounding; there the
    // approximate Wolfe conditions (Hager & Zhang) use derivatives alone.
    const double f_noise = 1e-10 * (1.0 + std::abs(f0));
    auto flat = [&](double fv) {
      return std::isfinite(fv) && std::abs(fv - f0) <= f_noise;
    };
    double t_prev = 0.0, f_prev = f0, dg_prev = dg0;
    double t = 1.0, ft = 0.0, dgt = 0.0;
    bool found = false;
    auto zoom = [&](double lo, double f_lo, double dg_lo, double hi,
                    double f_hi, double dg_hi) {
      for (int k = 0; k < 40; ++k) {
        double tj = lbfgs_detail::CubicStep(lo, f_lo, dg_lo, hi, f_hi, dg_hi);
        double fj, dgj;
        eval(tj, &fj, &dgj);
        if (flat(fj)) {
          if (std::abs(dgj) <= -options.c2 * dg0) return true;
          if (dgj * (hi - lo) >= 0.0) {
            hi = tj;
            f_hi = fj;
            dg_hi = dgj;
          } else {
            lo = tj;
            f_lo = fj;
            dg_lo = dgj;
          }
        } else if (!std::isfinite(fj) || fj > f0 + options.c1 * tj * dg0 ||
            fj >= f_lo) {
          hi = tj;
          f_hi = std::isfinite(fj) ? fj : std::numeric_limits<double>::max();
          dg_hi = std::isfinite(dgj) ? dgj : 0.0;
        } else {
          if (std::abs(dgj) <= -options.c2 * dg0) return true;
          if (dgj * (hi - lo) >= 0.0) {
            hi = lo;
            f_hi = f_lo;
            dg_hi = dg_lo;
          }
          lo = tj;
          f_lo = fj;
          dg_lo = dgj;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
      }
      // Accept the best sufficient-decrease point seen, if any.
      if (lo > 0.0) {
        eval(lo, &f_lo, &dg_lo);
        return true;
      }
      return false;
    };
    for (int k = 0; k < 60; ++k) {
      eval(t, &ft, &dgt);
      if (!std::isfinite(ft)) {
        t = 0.5 * (t_prev + t);
        continue;
      }
      if (flat(ft)) {
        if (std::abs(dgt) <= -options.c2 * dg0) {
          found = true;
          break;
        }
        if (dgt >= 0.0) {
          found = zoom(t_prev, f_prev, dg_prev, t, ft, dgt);
          break;
        }
      } else if (ft > f0 + options.c1 * t * dg0 || (k > 0 && ft >= f_prev)) {
        found = zoom(t_prev, f_prev, dg_prev, t, ft, dgt);
        break;
      }
      if (std::abs(dgt) <= -options.c2 * dg0) {
        found = true;
        break;
      }
      if (dgt >= 0.0) {
        found = zoom(t, ft, dgt, t_prev, f_prev, dg_prev);
        break;
      }
      t_prev = t;
      f_prev = ft;
      dg_prev = dgt;
      t *= 2.0;
    }
    ++result.iterations;
    if (!found) {
      // Restart from steepest descent once before giving up.
      if (++failures > 1 || s_hist.empty()) break;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }
    failures = 0;
    Eigen::VectorXd s = x_new - result.x;
    Eigen::VectorXd y = g_new - result.gradient;
    double sy = s.dot(y);
    result.x = x_new;
    result.value = f(result.x, &result.gradient);
    result.gradient_norm = scaled_norm(result.gradient);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
  }
  if (result.gradient_norm < options.tolerance) result.converged = true;
  return result;
}

}  // namespace paireval::internal

#endif  // PAIREVAL_SRC_LBFGS_H_
