//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/numkit.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "fdbn/errors.h"

namespace fdbn {
namespace {
  // Pade coefficients and 1-norm bounds from Higham (2005), "The scaling and
  // squaring method for the matrix exponential revisited".
  constexpr std::array<double, 4> kPade3 = { 120.0, 60.0, 12.0, 1.0 };
  constexpr std::array<double, 6> kPade5 = { 30240.0, 15120.0, 3360.0,
                                             420.0,   30.0,    1.0 };
  constexpr std::array<double, 8> kPade7 = { 17297280.0, 8648640.0, 1995840.0,
                                             277200.0,   25200.0,   1512.0,
                                             56.0,       1.0 };
  constexpr std::array<double, 10> kPade9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0,
  };
  constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
  };

  constexpr double kTheta3 = 1.495585217958292e-2;
  constexpr double kTheta5 = 2.539398330063230e-1;
  constexpr double kTheta7 = 9.504178996162932e-1;
  constexpr double kTheta9 = 2.097847961257068e0;
  constexpr double kTheta13 = 5.371920351148152e0;

  template <std::size_t N>
  Mat pade_low_order(const Mat &a, const std::array<double, N> &b) {
    const auto n = a.rows();
    const Mat a2 = a * a;
    Mat odd = b[1] * Mat::Identity(n, n);
    Mat even = b[0] * Mat::Identity(n, n);
    Mat power = Mat::Identity(n, n);
    for (std::size_t k = 2; k < N; k += 2) {
      power = power * a2;
      even += b[k] * power;
      odd += b[k + 1] * power;
    }
    const Mat u = a * odd;
    return (even - u).partialPivLu().solve(even + u);
  }

  Mat pade13(const Mat &a) {
    const auto n = a.rows();
    const auto &b = kPade13;
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
    const Mat u =
        a
        * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4
           + b[3] * a2 + b[1] * id);
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6
                  + b[4] * a4 + b[2] * a2 + b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
  }

  // Near a minimizer the true decrease along a step falls below the rounding
  // error of f and the sufficient-decrease test stops being informative. There
  // a step is accepted on the approximate Wolfe slope conditions, with f
  // allowed to move by rounding only.
  bool noise_level_step(double f, double f_new, double slope0, double slope1) {
    constexpr double kNoise = 1e-12;
    const double scale = std::max(std::abs(f), 1.0);
    if (-slope0 > kNoise * scale || f_new > f + 1e-2 * kNoise * scale)
      return false;
    return slope1 >= 0.9 * slope0 && slope1 <= -0.8 * slope0;
  }

  double projected_gradient_norm(const Vec &x, const Vec &g, const Vec &lb) {
    double norm = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double step = x[i] - std::max(lb[i], x[i] - g[i]);
      norm = std::max(norm, std::abs(step));
    }
    return norm;
  }

  struct CurvaturePair {
    Vec s, y;
    double rho;
  };

  // Two-loop recursion applied to q; returns an approximation of H q.
  Vec apply_inverse_hessian(const std::deque<CurvaturePair> &history, Vec q) {
    std::vector<double> alpha(history.size());
    for (std::size_t i = history.size(); i-- > 0;) {
      alpha[i] = history[i].rho * history[i].s.dot(q);
      q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
      const auto &last = history.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(q);
      q += (alpha[i] - beta) * history[i].s;
    }
    return q;
  }
}  // namespace

Mat matrix_exponential(const Mat &m) {
  if (m.rows() != m.cols())
    throw DimensionError("matrix_exponential: matrix is "
                         + std::to_string(m.rows()) + "x"
                         + std::to_string(m.cols()) + ", expected square");
  if (!m.allFinite())
    throw NumericError("matrix_exponential: non-finite entries");
  if (m.size() == 0)
    return m;

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  if (norm1 <= kTheta3)
    return pade_low_order(m, kPade3);
  if (norm1 <= kTheta5)
    return pade_low_order(m, kPade5);
  if (norm1 <= kTheta7)
    return pade_low_order(m, kPade7);
  if (norm1 <= kTheta9)
    return pade_low_order(m, kPade9);

  const int squarings =
      std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
  if (squarings > 1100)
    throw NumericError("matrix_exponential: overflow (1-norm "
                       + std::to_string(norm1) + ")");
  Mat r = pade13(m / std::ldexp(1.0, squarings));
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
    if (!r.allFinite())
      throw NumericError("matrix_exponential: overflow while squaring");
  }
  if (!r.allFinite())
    throw NumericError("matrix_exponential: overflow");
  return r;
}

AcyclicityEval acyclicity(const Mat &w) {
  if (w.rows() != w.cols())
    throw DimensionError("acyclicity: W must be square");
  const Mat e = matrix_exponential(w.cwiseProduct(w));
  AcyclicityEval out;
  out.value = e.trace() - static_cast<double>(w.rows());
  out.gradient = e.transpose().cwiseProduct(2.0 * w);
  return out;
}

double acyclicity_value(const Mat &w) {
  if (w.rows() != w.cols())
    throw DimensionError("acyclicity: W must be square");
  return matrix_exponential(w.cwiseProduct(w)).trace()
         - static_cast<double>(w.rows());
}

Mat spd_solve(const Mat &p, const Mat &b) {
  const auto n = p.rows();
  if (p.cols() != n)
    throw DimensionError("spd_solve: P must be square");
  if (b.rows() != n)
    throw DimensionError("spd_solve: B has " + std::to_string(b.rows())
                         + " rows, P is " + std::to_string(n) + "x"
                         + std::to_string(n));

  // Lower Cholesky factor, column by column.
  Mat l = Mat::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pivot =
        p(j, j) - l.row(j).head(j).squaredNorm();
    if (!(pivot > 0) || !std::isfinite(pivot))
      throw NumericError("spd_solve: matrix not positive definite at pivot "
                         + std::to_string(j) + " (value "
                         + std::to_string(pivot) + ")");
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    if (j + 1 < n) {
      l.col(j).tail(n - j - 1) =
          (p.col(j).tail(n - j - 1)
           - l.bottomLeftCorner(n - j - 1, j) * l.row(j).head(j).transpose())
          / ljj;
    }
  }

  Mat x = l.triangularView<Eigen::Lower>().solve(b);
  l.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

BoundMinimizeResult bound_minimize(const ObjectiveFn &objective, Vec x0,
                                   const Vec &lower_bounds,
                                   const BoundMinimizeConfig &config) {
  const auto n = x0.size();
  if (lower_bounds.size() != n)
    throw DimensionError("bound_minimize: bounds size mismatch");
  if (config.memory <= 0 || config.max_iter < 0)
    throw ArgumentError("bound_minimize: invalid configuration");

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxBacktracks = 60;

  BoundMinimizeResult result;
  Vec x = x0.cwiseMax(lower_bounds);
  Vec g(n);
  double f = objective(x, g);
  result.x = x;
  result.objective = f;
  if (!std::isfinite(f) || !g.allFinite()) {
    result.status = MinimizeStatus::kNonFinite;
    result.projected_gradient_norm = std::numeric_limits<double>::infinity();
    return result;
  }

  std::deque<CurvaturePair> history;
  Vec g_new(n), x_new(n);
  double pg = projected_gradient_norm(x, g, lower_bounds);

  int iter = 0;
  for (; iter < config.max_iter; ++iter) {
    if (pg <= config.grad_tol)
      break;

    // Coordinates held at their bound by an outward-pointing gradient.
    auto is_bound = [&](Eigen::Index i) {
      return x[i] <= lower_bounds[i] && g[i] > 0;
    };

    Vec g_free = g;
    for (Eigen::Index i = 0; i < n; ++i)
      if (is_bound(i))
        g_free[i] = 0;

    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      Vec dir = -apply_inverse_hessian(history, g_free);
      for (Eigen::Index i = 0; i < n; ++i)
        if (is_bound(i) || (x[i] <= lower_bounds[i] && dir[i] < 0))
          dir[i] = 0;
      if (!(g.dot(dir) < 0)) {
        history.clear();
        dir = -g_free;
      }

      double step = 1.0;
      if (history.empty())
        step = std::min(1.0, 1.0 / std::max(dir.lpNorm<Eigen::Infinity>(),
                                            1e-300));

      for (int bt = 0; bt < kMaxBacktracks; ++bt, step *= 0.5) {
        x_new = (x + step * dir).cwiseMax(lower_bounds);
        const double decrease = g.dot(x_new - x);
        if (!(decrease < 0))
          continue;
        double f_new;
        try {
          f_new = objective(x_new, g_new);
        } catch (const NumericError &) {
          continue;  // e.g. overflow far from the current iterate
        }
        if (!std::isfinite(f_new))
          continue;
        if (f_new <= f + kArmijo * decrease
            || noise_level_step(f, f_new, decrease, g_new.dot(x_new - x))) {
          if (!g_new.allFinite()) {
            result.status = MinimizeStatus::kNonFinite;
            result.x = x;
            result.objective = f;
            result.projected_gradient_norm = pg;
            result.iterations = iter;
            return result;
          }
          const double f_prev = f;
          Vec s = x_new - x;
          Vec y = g_new - g;
          const double sy = s.dot(y);
          if (sy > 1e-10 * y.squaredNorm()) {
            history.push_back({ std::move(s), std::move(y), 1.0 / sy });
            if (static_cast<int>(history.size()) > config.memory)
              history.pop_front();
          }
          x.swap(x_new);
          g.swap(g_new);
          f = f_new;
          pg = projected_gradient_norm(x, g, lower_bounds);
          accepted = true;

          if (config.rel_ftol > 0
              && f_prev - f
                     <= config.rel_ftol
                            * std::max({ std::abs(f_prev), std::abs(f), 1.0 })
              && pg > config.grad_tol) {
            result.x = x;
            result.objective = f;
            result.projected_gradient_norm = pg;
            result.iterations = iter + 1;
            result.status = MinimizeStatus::kSmallProgress;
            return result;
          }
          break;
        }
      }
      if (!accepted)
        history.clear();
    }

    if (!accepted) {
      result.x = x;
      result.objective = f;
      result.projected_gradient_norm = pg;
      result.iterations = iter;
      result.converged = pg <= config.grad_tol;
      result.status = result.converged ? MinimizeStatus::kConverged
                                       : MinimizeStatus::kLineSearchFailed;
      return result;
    }
  }

  result.x = x;
  result.objective = f;
  result.projected_gradient_norm = pg;
  result.iterations = iter;
  result.converged = pg <= config.grad_tol;
  result.status = result.converged ? MinimizeStatus::kConverged
                                   : MinimizeStatus::kMaxIterations;
  return result;
}

}  // namespace fdbn
