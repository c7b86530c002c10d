//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/fdbnl.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "fdbn/errors.h"
#include "fdbn/log.h"
#include "fdbn/parallel.h"

namespace fdbn {
namespace {
  Mat soft_threshold(const Mat &m, double level) {
    return m.unaryExpr([level](double v) {
      return std::copysign(std::max(std::abs(v) - level, 0.0), v);
    });
  }

  Mat consensus_target(const std::vector<Mat> &local,
                       const std::vector<Mat> &dual, double rho2) {
    Mat sum = Mat::Zero(local.front().rows(), local.front().cols());
    for (std::size_t k = 0; k < local.size(); ++k)
      sum += local[k] + dual[k] / rho2;
    return sum / static_cast<double>(local.size());
  }

  void check_datasets(const std::vector<ClientDataset> &datasets) {
    if (datasets.empty())
      throw ArgumentError("no client datasets");
    const auto d = datasets.front().x_t.cols();
    const auto pd = datasets.front().x_lag.cols();
    if (d < 1 || pd % d != 0)
      throw DimensionError("client 0: X_lag width is not a multiple of d");
    for (std::size_t k = 0; k < datasets.size(); ++k) {
      const auto &c = datasets[k];
      if (c.x_t.cols() != d || c.x_lag.cols() != pd)
        throw DimensionError("client " + std::to_string(k)
                             + ": dimensions differ from client 0");
      if (c.x_t.rows() != c.x_lag.rows() || c.x_t.rows() == 0)
        throw DimensionError("client " + std::to_string(k)
                             + ": empty or inconsistent design");
    }
  }
}  // namespace

void FdbnlConfig::validate() const {
  if (!(lambda_w >= 0) || !(lambda_a >= 0))
    throw ArgumentError("FdbnlConfig: lambdas must be nonnegative");
  if (!(rho1_0 > 0) || !(rho2_0 > 0) || !(rho_max > 0))
    throw ArgumentError("FdbnlConfig: penalties must be positive");
  if (!(phi1 > 1) || !(phi2 > 1))
    throw ArgumentError("FdbnlConfig: phi1 and phi2 must exceed 1");
  if (max_rounds < 1)
    throw ArgumentError("FdbnlConfig: max_rounds must be >= 1");
  if (!(h_tol >= 0) || !(primal_tol >= 0))
    throw ArgumentError("FdbnlConfig: tolerances must be nonnegative");
}

FdbnlState FdbnlState::initial(int d, int p, int k, const FdbnlConfig &cfg) {
  FdbnlState s;
  s.w = Mat::Zero(d, d);
  s.a = Mat::Zero(p * d, d);
  s.b.assign(k, s.w);
  s.dk.assign(k, s.a);
  s.beta.assign(k, s.w);
  s.gamma.assign(k, s.a);
  s.rho1 = cfg.rho1_0;
  s.rho2 = cfg.rho2_0;
  return s;
}

LocalSolution local_update(const GramStats &g, const Mat &w, const Mat &a,
                           const Mat &beta, const Mat &gamma, double rho2) {
  if (!(rho2 > 0))
    throw ArgumentError("local_update: rho2 must be positive");
  const auto d = g.s.rows(), pd = g.n.rows();
  if (w.rows() != d || beta.rows() != d || a.rows() != pd
      || gamma.rows() != pd)
    throw DimensionError("local_update: shape mismatch");

  const Mat p = g.s + rho2 * Mat::Identity(d, d);
  const Mat q = g.n + rho2 * Mat::Identity(pd, pd);
  const Mat b1 = g.s - beta + rho2 * w;
  const Mat b2 = g.m.transpose() - gamma + rho2 * a;

  // Q^{-1} [M^T | b2] and P^{-1} [M | b1] share one factorization each.
  Mat rhs_q(pd, d + d);
  rhs_q << g.m.transpose(), b2;
  const Mat q_inv = spd_solve(q, rhs_q);
  Mat rhs_p(d, pd + d);
  rhs_p << g.m, b1;
  const Mat p_inv = spd_solve(p, rhs_p);

  Mat schur_p = p - g.m * q_inv.leftCols(d);
  Mat schur_q = q - g.m.transpose() * p_inv.leftCols(pd);
  // Symmetrize against round-off before factorizing.
  schur_p = 0.5 * (schur_p + schur_p.transpose()).eval();
  schur_q = 0.5 * (schur_q + schur_q.transpose()).eval();

  LocalSolution out;
  out.b = spd_solve(schur_p, b1 - g.m * q_inv.rightCols(d));
  out.dk = spd_solve(schur_q, b2 - g.m.transpose() * p_inv.rightCols(d));
  return out;
}

LocalSolution local_update(const ClientDataset &data, const Mat &w,
                           const Mat &a, const Mat &beta, const Mat &gamma,
                           double rho2) {
  return local_update(GramStats::from_designs(data.x_t, data.x_lag), w, a,
                      beta, gamma, rho2);
}

Mat global_a_closed_form(const std::vector<Mat> &dk,
                         const std::vector<Mat> &gamma, double rho2,
                         double lambda_a) {
  if (dk.empty() || dk.size() != gamma.size())
    throw ArgumentError("global_a_closed_form: need one multiplier per client");
  const double k = static_cast<double>(dk.size());
  return soft_threshold(consensus_target(dk, gamma, rho2),
                        lambda_a / (k * rho2));
}

GlobalSolution global_update(const std::vector<Mat> &b,
                             const std::vector<Mat> &dk,
                             const std::vector<Mat> &beta,
                             const std::vector<Mat> &gamma, double alpha,
                             double rho1, double rho2, const FdbnlConfig &cfg,
                             const Mat &w0, const Mat &a0) {
  if (b.empty() || b.size() != dk.size() || b.size() != beta.size()
      || b.size() != gamma.size())
    throw ArgumentError("global_update: need one local solution per client");
  if (!(rho2 > 0))
    throw ArgumentError("global_update: rho2 must be positive");

  const int d = static_cast<int>(b.front().rows());
  const int pd = static_cast<int>(dk.front().rows());
  const double k = static_cast<double>(b.size());
  const Mat w_target = consensus_target(b, beta, rho2);
  const Mat a_target = consensus_target(dk, gamma, rho2);

  // Dividing by K rho2 leaves the minimizer unchanged and keeps the
  // quadratic part at unit curvature.
  const double scale = 1.0 / (k * rho2);
  const bool joint_a = !cfg.closed_form_a;
  const SplitLayout layout(d, joint_a ? pd : 0);

  auto objective = [&](const Vec &x, Vec &grad) {
    const Mat w = layout.unpack_w(x);
    const Mat a = joint_a ? layout.unpack_a(x) : Mat(0, d);
    const auto pen = acyclicity_penalty(w, alpha, rho1);
    const Mat dw = w - w_target;
    double value = scale * pen.value
                   + 0.5 * (dw.squaredNorm() - dw.diagonal().squaredNorm());
    Mat ga(0, d);
    if (joint_a) {
      ga = a - a_target;
      value += 0.5 * ga.squaredNorm();
    }
    value += layout.add_gradient(x, scale * pen.grad + dw, ga,
                                 scale * cfg.lambda_w, scale * cfg.lambda_a,
                                 grad);
    return value;
  };

  GlobalSolution out;
  out.solver = bound_minimize(objective,
                              layout.pack(w0, joint_a ? a0 : Mat(0, d)),
                              layout.lower_bounds(), cfg.inner);
  out.w = layout.unpack_w(out.solver.x);
  out.a = joint_a ? layout.unpack_a(out.solver.x)
                  : soft_threshold(a_target, scale * cfg.lambda_a);
  return out;
}

void dual_update(FdbnlState &state, const FdbnlConfig &cfg) {
  for (std::size_t k = 0; k < state.b.size(); ++k) {
    state.beta[k] += state.rho2 * (state.b[k] - state.w);
    state.gamma[k] += state.rho2 * (state.dk[k] - state.a);
  }
  state.alpha += state.rho1 * acyclicity_value(state.w);
  state.rho1 = std::min(state.rho1 * cfg.phi1, cfg.rho_max);
  state.rho2 = std::min(state.rho2 * cfg.phi2, cfg.rho_max);
}

double fdbnl_objective(const std::vector<GramStats> &stats, const Mat &w,
                       const Mat &a, double lambda_w, double lambda_a) {
  double value = lambda_w * w.cwiseAbs().sum() + lambda_a * a.cwiseAbs().sum();
  for (const auto &g: stats)
    value += least_squares(g, w, a).value;
  return value;
}

FdbnlResult run_fdbnl(const std::vector<ClientDataset> &datasets,
                      const FdbnlConfig &cfg, ThreadPool *pool) {
  cfg.validate();
  check_datasets(datasets);
  const int k = static_cast<int>(datasets.size());
  const int d = static_cast<int>(datasets.front().x_t.cols());
  const int p = static_cast<int>(datasets.front().x_lag.cols()) / d;

  ThreadPool inline_pool(1);
  ThreadPool &workers = pool ? *pool : inline_pool;

  std::vector<GramStats> stats(k);
  workers.parallel_for(k, [&](int c) {
    stats[c] = GramStats::from_designs(datasets[c].x_t, datasets[c].x_lag);
  });

  FdbnlState state = FdbnlState::initial(d, p, k, cfg);
  FdbnlResult result;

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    state.round = round;
    workers.parallel_for(k, [&](int c) {
      try {
        auto local = local_update(stats[c], state.w, state.a, state.beta[c],
                                  state.gamma[c], state.rho2);
        state.b[c] = std::move(local.b);
        state.dk[c] = std::move(local.dk);
      } catch (const NumericError &e) {
        throw NumericError("round " + std::to_string(round) + ", client "
                           + std::to_string(c) + ": " + e.what());
      }
    });

    GlobalSolution global;
    try {
      global = global_update(state.b, state.dk, state.beta, state.gamma,
                             state.alpha, state.rho1, state.rho2, cfg, state.w,
                             state.a);
    } catch (const NumericError &e) {
      throw NumericError("round " + std::to_string(round)
                         + ", global step: " + e.what());
    }
    if (!global.solver.converged
        && global.solver.status != MinimizeStatus::kSmallProgress) {
      ++result.inner_failures;
      log_warning("fdbnl round " + std::to_string(round)
                  + ": global step stopped early (projected gradient "
                  + std::to_string(global.solver.projected_gradient_norm)
                  + ")");
    }
    state.w = std::move(global.w);
    state.a = std::move(global.a);

    double rw = 0, ra = 0;
    for (int c = 0; c < k; ++c) {
      rw = std::max(rw, (state.b[c] - state.w).norm());
      ra = std::max(ra, (state.dk[c] - state.a).norm());
    }
    const double h = acyclicity_value(state.w);
    result.trace.push_back({ round, h, rw, ra,
                             fdbnl_objective(stats, state.w, state.a,
                                             cfg.lambda_w, cfg.lambda_a),
                             state.rho1, state.rho2 });
    result.rounds = round;
    result.h = h;
    result.max_primal_w = rw;
    result.max_primal_a = ra;

    if (h <= cfg.h_tol && rw <= cfg.primal_tol && ra <= cfg.primal_tol) {
      result.converged = true;
      break;
    }
    dual_update(state, cfg);
  }

  result.dbn = WeightedDbn(zero_diagonal(state.w), state.a);
  return result;
}

}  // namespace fdbn
