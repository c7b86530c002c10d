//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/pfdbnl.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "fdbn/errors.h"
#include "fdbn/log.h"
#include "fdbn/parallel.h"

namespace fdbn {

void PfdbnlConfig::validate(int clients) const {
  FdbnlConfig::validate();
  if (!(mu > 0))
    throw ArgumentError("PfdbnlConfig: mu must be positive");
  if (participants < 0)
    throw ArgumentError("PfdbnlConfig: participants must be >= 0");
  if (participants > clients)
    throw ArgumentError("PfdbnlConfig: " + std::to_string(participants)
                        + " participants per round but only "
                        + std::to_string(clients) + " clients");
}

PfdbnlState PfdbnlState::initial(int d, int p, int k,
                                 const PfdbnlConfig &cfg) {
  PfdbnlState s;
  s.w = Mat::Zero(d, d);
  s.a = Mat::Zero(p * d, d);
  s.wk.assign(k, s.w);
  s.ak.assign(k, s.a);
  s.wt.assign(k, s.w);
  s.at.assign(k, s.a);
  s.beta.assign(k, s.w);
  s.gamma.assign(k, s.a);
  s.rho1 = cfg.rho1_0;
  s.rho2 = cfg.rho2_0;
  return s;
}

PersonalSolution personal_update(const GramStats &g, const Mat &wt,
                                 const Mat &at, double alpha, double rho1,
                                 double mu, const FdbnlConfig &cfg,
                                 const Mat &w0, const Mat &a0) {
  if (!(mu > 0) || !(rho1 > 0))
    throw ArgumentError("personal_update: mu and rho1 must be positive");
  const SplitLayout layout(g.d(), g.pd());
  auto objective = [&](const Vec &x, Vec &grad) {
    const Mat w = layout.unpack_w(x);
    const Mat a = layout.unpack_a(x);
    const auto loss = least_squares(g, w, a);
    const auto pen = acyclicity_penalty(w, alpha, rho1);
    const Mat dw = w - wt, da = a - at;
    const double prox =
        mu * (dw.squaredNorm() - dw.diagonal().squaredNorm() + da.squaredNorm());
    return loss.value + pen.value + prox
           + layout.add_gradient(x, loss.grad_w + pen.grad + 2 * mu * dw,
                                 loss.grad_a + 2 * mu * da, cfg.lambda_w,
                                 cfg.lambda_a, grad);
  };
  PersonalSolution out;
  out.solver = bound_minimize(objective, layout.pack(w0, a0),
                              layout.lower_bounds(), cfg.inner);
  out.w = layout.unpack_w(out.solver.x);
  out.a = layout.unpack_a(out.solver.x);
  return out;
}

AuxSolution aux_update(const Mat &wk, const Mat &ak, const Mat &w,
                       const Mat &a, const Mat &beta, const Mat &gamma,
                       double rho2, double mu) {
  const double denom = 2 * mu + rho2;
  if (!(denom > 0))
    throw ArgumentError("aux_update: 2 mu + rho2 must be positive");
  return { (2 * mu * wk + rho2 * w - beta) / denom,
           (2 * mu * ak + rho2 * a - gamma) / denom };
}

GlobalModel global_aggregate(const std::vector<Mat> &wt,
                             const std::vector<Mat> &at,
                             const std::vector<Mat> &beta,
                             const std::vector<Mat> &gamma, double rho2) {
  if (wt.empty() || wt.size() != at.size() || wt.size() != beta.size()
      || wt.size() != gamma.size())
    throw ArgumentError("global_aggregate: need one entry per client");
  GlobalModel g { Mat::Zero(wt[0].rows(), wt[0].cols()),
                  Mat::Zero(at[0].rows(), at[0].cols()) };
  for (std::size_t k = 0; k < wt.size(); ++k) {
    g.w += wt[k] + beta[k] / rho2;
    g.a += at[k] + gamma[k] / rho2;
  }
  const double n = static_cast<double>(wt.size());
  g.w /= n;
  g.a /= n;
  return g;
}

void dual_update_personalized(PfdbnlState &state,
                              const std::vector<int> &participants,
                              const FdbnlConfig &cfg) {
  for (int k: participants) {
    state.beta[k] += state.rho2 * (state.wt[k] - state.w);
    state.gamma[k] += state.rho2 * (state.at[k] - state.a);
  }
  double mean_h = 0;
  for (const auto &w: state.wk)
    mean_h += acyclicity_value(w);
  mean_h /= static_cast<double>(state.wk.size());
  state.alpha += state.rho1 * mean_h;
  state.rho1 = std::min(state.rho1 * cfg.phi1, cfg.rho_max);
  state.rho2 = std::min(state.rho2 * cfg.phi2, cfg.rho_max);
}

std::vector<int> sample_clients(Rng &rng, int k, int j) {
  if (j < 1 || j > k)
    throw ArgumentError("sample_clients: need 1 <= j <= K");
  std::vector<int> ids(k);
  std::iota(ids.begin(), ids.end(), 0);
  if (j == k)
    return ids;
  // Partial Fisher-Yates: the first j slots become a uniform sample.
  for (int i = 0; i < j; ++i) {
    std::uniform_int_distribution<int> pick(i, k - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(j);
  std::sort(ids.begin(), ids.end());
  return ids;
}

PfdbnlResult run_pfdbnl(const std::vector<ClientDataset> &datasets,
                        const PfdbnlConfig &cfg, std::uint64_t seed,
                        ThreadPool *pool) {
  if (datasets.empty())
    throw ArgumentError("run_pfdbnl: no client datasets");
  const int k = static_cast<int>(datasets.size());
  cfg.validate(k);
  const int d = static_cast<int>(datasets.front().x_t.cols());
  if (d < 1 || datasets.front().x_lag.cols() % d != 0)
    throw DimensionError("run_pfdbnl: X_lag width is not a multiple of d");
  const int p = static_cast<int>(datasets.front().x_lag.cols()) / d;
  for (int c = 0; c < k; ++c)
    if (datasets[c].x_t.cols() != d || datasets[c].x_lag.cols() != p * d)
      throw DimensionError("run_pfdbnl: client " + std::to_string(c)
                           + " differs in d or p");
  const int j = cfg.participants == 0 ? k : cfg.participants;

  ThreadPool inline_pool(1);
  ThreadPool &workers = pool ? *pool : inline_pool;

  std::vector<GramStats> stats(k);
  workers.parallel_for(k, [&](int c) {
    stats[c] = GramStats::from_designs(datasets[c].x_t, datasets[c].x_lag);
  });

  PfdbnlState state = PfdbnlState::initial(d, p, k, cfg);
  Rng sampler(seed);
  PfdbnlResult result;
  std::vector<int> failures(k, 0);

  for (int round = 1; round <= cfg.max_rounds; ++round) {
    state.round = round;
    const auto selected = sample_clients(sampler, k, j);

    workers.parallel_for(static_cast<int>(selected.size()), [&](int s) {
      const int c = selected[s];
      PersonalSolution personal;
      try {
        personal = personal_update(stats[c], state.wt[c], state.at[c],
                                   state.alpha, state.rho1, cfg.mu, cfg,
                                   state.wk[c], state.ak[c]);
      } catch (const NumericError &e) {
        throw NumericError("round " + std::to_string(round) + ", client "
                           + std::to_string(c) + ": " + e.what());
      }
      if (!personal.solver.converged
          && personal.solver.status != MinimizeStatus::kSmallProgress)
        ++failures[c];
      state.wk[c] = std::move(personal.w);
      state.ak[c] = std::move(personal.a);
      auto aux = aux_update(state.wk[c], state.ak[c], state.w, state.a,
                            state.beta[c], state.gamma[c], state.rho2, cfg.mu);
      state.wt[c] = std::move(aux.wt);
      state.at[c] = std::move(aux.at);
    });

    auto global = global_aggregate(state.wt, state.at, state.beta,
                                   state.gamma, state.rho2);
    state.w = std::move(global.w);
    state.a = std::move(global.a);

    double rw = 0, ra = 0, mean_h = 0, objective = 0;
    for (int c = 0; c < k; ++c) {
      rw = std::max(rw, (state.wt[c] - state.w).norm());
      ra = std::max(ra, (state.at[c] - state.a).norm());
      mean_h += acyclicity_value(state.wk[c]);
      objective += least_squares(stats[c], state.wk[c], state.ak[c]).value
                   + cfg.lambda_w * state.wk[c].cwiseAbs().sum()
                   + cfg.lambda_a * state.ak[c].cwiseAbs().sum()
                   + cfg.mu * ((state.wk[c] - state.w).squaredNorm()
                               + (state.ak[c] - state.a).squaredNorm());
    }
    mean_h /= k;
    result.trace.push_back({ round, acyclicity_value(state.w), rw, ra,
                             objective, state.rho1, state.rho2, selected,
                             mean_h });
    result.rounds = round;
    result.mean_h_personal = mean_h;
    result.max_primal_w = rw;
    result.max_primal_a = ra;
    if (mean_h <= cfg.h_tol && rw <= cfg.primal_tol && ra <= cfg.primal_tol) {
      result.converged = true;
      break;
    }
    dual_update_personalized(state, selected, cfg);
  }

  for (int c = 0; c < k; ++c) {
    result.inner_failures += failures[c];
    result.personal.emplace_back(zero_diagonal(state.wk[c]), state.ak[c]);
  }
  if (result.inner_failures > 0)
    log_warning("pfdbnl: " + std::to_string(result.inner_failures)
                + " personal solves stopped early");
  result.global = WeightedDbn(zero_diagonal(state.w), state.a);
  return result;
}

}  // namespace fdbn
