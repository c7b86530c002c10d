//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/baselines.h"

#include <algorithm>
#include <limits>
#include <string>

#include "fdbn/errors.h"
#include "fdbn/log.h"
#include "fdbn/metrics.h"
#include "fdbn/parallel.h"

namespace fdbn {

void DynotearsConfig::validate() const {
  if (!(lambda_w >= 0) || !(lambda_a >= 0))
    throw ArgumentError("DynotearsConfig: lambdas must be nonnegative");
  if (!(rho_mult > 1))
    throw ArgumentError("DynotearsConfig: rho_mult must exceed 1");
  if (!(progress_ratio > 0 && progress_ratio < 1))
    throw ArgumentError("DynotearsConfig: progress_ratio must be in (0, 1)");
  if (!(rho_init > 0) || max_outer < 1)
    throw ArgumentError("DynotearsConfig: invalid rho_init or max_outer");
}

DynotearsResult dynotears_fit(const GramStats &g, const DynotearsConfig &cfg) {
  cfg.validate();
  const int d = g.d(), pd = g.pd();
  const SplitLayout layout(d, pd);

  double alpha = 0, rho = cfg.rho_init;
  double h_prev = std::numeric_limits<double>::infinity();
  Vec x = Vec::Zero(layout.size());
  DynotearsResult result;

  for (int outer = 1; outer <= cfg.max_outer; ++outer) {
    auto objective = [&](const Vec &v, Vec &grad) {
      const Mat w = layout.unpack_w(v);
      const Mat a = layout.unpack_a(v);
      const auto loss = least_squares(g, w, a);
      const auto pen = acyclicity_penalty(w, alpha, rho);
      return loss.value + pen.value
             + layout.add_gradient(v, loss.grad_w + pen.grad, loss.grad_a,
                                   cfg.lambda_w, cfg.lambda_a, grad);
    };
    auto solve = bound_minimize(objective, x, layout.lower_bounds(), cfg.inner);
    if (!solve.converged
        && solve.status != MinimizeStatus::kSmallProgress) {
      ++result.inner_failures;
      log_warning("dynotears outer " + std::to_string(outer)
                  + ": inner solve stopped early (projected gradient "
                  + std::to_string(solve.projected_gradient_norm) + ")");
    }
    x = std::move(solve.x);
    const double h = acyclicity_value(layout.unpack_w(x));
    result.outer_iterations = outer;
    result.h = h;
    if (h <= cfg.h_tol) {
      result.converged = true;
      break;
    }
    alpha += rho * h;
    if (h > cfg.progress_ratio * h_prev)
      rho = std::min(rho * cfg.rho_mult, cfg.rho_max);
    h_prev = h;
  }
  result.dbn = WeightedDbn(layout.unpack_w(x), layout.unpack_a(x));
  return result;
}

DynotearsResult dynotears_fit(const ClientDataset &data,
                              const DynotearsConfig &cfg) {
  return dynotears_fit(GramStats::from_designs(data.x_t, data.x_lag), cfg);
}

AveResult ave_baseline(const std::vector<WeightedDbn> &fits, double tau_w,
                       double tau_a) {
  if (fits.empty())
    throw ArgumentError("ave_baseline: no client fits");
  Mat w = Mat::Zero(fits.front().d, fits.front().d);
  Mat a = Mat::Zero(fits.front().a.rows(), fits.front().d);
  for (const auto &f: fits) {
    if (f.d != fits.front().d || f.p != fits.front().p)
      throw ArgumentError("ave_baseline: fits differ in (d, p)");
    w += f.w;
    a += f.a;
  }
  const double k = static_cast<double>(fits.size());
  AveResult out;
  out.averaged = WeightedDbn(w / k, a / k);
  out.graph = threshold(out.averaged, tau_w, tau_a);
  return out;
}

BestResult best_baseline(const std::vector<WeightedDbn> &fits,
                         const BinaryDbn &truth, double tau_w, double tau_a) {
  if (fits.empty())
    throw ArgumentError("best_baseline: no client fits");
  BestResult best;
  int best_score = std::numeric_limits<int>::max();
  for (std::size_t k = 0; k < fits.size(); ++k) {
    auto graph = threshold(fits[k], tau_w, tau_a);
    const auto s = shd(graph, truth);
    if (s.w + s.a < best_score) {
      best_score = s.w + s.a;
      best.client = static_cast<int>(k);
      best.graph = std::move(graph);
    }
  }
  return best;
}

DynotearsResult alldata_baseline(const std::vector<ClientDataset> &datasets,
                                 const DynotearsConfig &cfg) {
  return dynotears_fit(concatenate(datasets), cfg);
}

std::vector<WeightedDbn> fit_clients(const std::vector<ClientDataset> &datasets,
                                     const DynotearsConfig &cfg,
                                     ThreadPool *pool) {
  std::vector<WeightedDbn> fits(datasets.size());
  auto fit_one = [&](int k) {
    fits[k] = dynotears_fit(datasets[k], cfg).dbn;
  };
  if (pool)
    pool->parallel_for(static_cast<int>(datasets.size()), fit_one);
  else
    for (int k = 0; k < static_cast<int>(datasets.size()); ++k)
      fit_one(k);
  return fits;
}

}  // namespace fdbn
