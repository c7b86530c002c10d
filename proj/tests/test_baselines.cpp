//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "fdbn/baselines.h"
#include "fdbn/errors.h"
#include "fdbn/metrics.h"
#include "fdbn/parallel.h"
#include "oracles.hpp"

using namespace fdbn;

TEST_SUITE("baselines") {

TEST_CASE("config validation") {
  DynotearsConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rho_mult = 1;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.progress_ratio = 1;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("zero data and huge penalties give zero matrices") {
  const ClientDataset zero { Mat::Zero(30, 4), Mat::Zero(30, 8) };
  const auto r = dynotears_fit(zero, DynotearsConfig {});
  CHECK(r.dbn.w.isZero(0));
  CHECK(r.dbn.a.isZero(0));
  CHECK(alldata_baseline({ zero, zero }, DynotearsConfig {}).dbn.w.isZero(0));

  GenConfig gen;
  gen.d = 4;
  gen.p = 2;
  const auto data = gen_dataset(gen_truth(gen), 200, 0, 1.0, 1, false);
  DynotearsConfig huge;
  huge.lambda_w = huge.lambda_a = 1e6;
  const auto h = dynotears_fit(data, huge);
  CHECK(h.dbn.w.isZero(0));
  CHECK(h.dbn.a.isZero(0));
}

TEST_CASE("centralized fit ends acyclic on dense networks") {
  GenConfig gen;
  gen.d = 5;
  gen.p = 3;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    gen.seed = seed;
    const auto data = gen_dataset(gen_truth(gen), 500, 0, 1.0, derive_seed(seed, 99), false);
    const auto r = dynotears_fit(data, DynotearsConfig {});
    CHECK(r.h <= 1e-8);
    CHECK(r.converged);
    CHECK(is_acyclic(threshold(r.dbn, 0.3, 0.3)));
  }
}

TEST_CASE("centralized fit recovers a sparse network") {
  GenConfig gen;
  gen.d = 5;
  gen.p = 2;
  gen.intra_mean_degree = 1.5;
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    gen.seed = seed;
    const auto truth = gen_truth(gen);
    const auto data = gen_dataset(truth, 2000, 0, 1.0, derive_seed(seed, 99), false);
    const auto r = dynotears_fit(data, DynotearsConfig {});
    good += shd(threshold(r.dbn, 0.3, 0.3), threshold(truth, 0.3, 0.3)).w <= 1;
  }
  CHECK(good >= 4);
}

TEST_CASE("row order does not change the fit") {
  GenConfig gen;
  gen.d = 4;
  const auto data = gen_dataset(gen_truth(gen), 120, 0, 1.0, 3, false);
  std::vector<int> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  ClientDataset shuffled { data.x_t(perm, Eigen::all), data.x_lag(perm, Eigen::all) };
  const auto g1 = GramStats::from_designs(data.x_t, data.x_lag);
  const auto g2 = GramStats::from_designs(shuffled.x_t, shuffled.x_lag);
  CHECK((g1.s - g2.s).cwiseAbs().maxCoeff() <= 1e-13);
  const auto r1 = dynotears_fit(data, DynotearsConfig {});
  const auto r2 = dynotears_fit(shuffled, DynotearsConfig {});
  CHECK((r1.dbn.w - r2.dbn.w).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(threshold(r1.dbn, 0.3, 0.3).w_edges == threshold(r2.dbn, 0.3, 0.3).w_edges);
  const auto parts = partition(data.x_t, data.x_lag, 3);
  const auto a1 = alldata_baseline(parts, DynotearsConfig {});
  const auto a2 = alldata_baseline({ parts[2], parts[0], parts[1] }, DynotearsConfig {});
  CHECK((a1.dbn.w - a2.dbn.w).cwiseAbs().maxCoeff() <= 1e-4);
  CHECK(threshold(a1.dbn, 0.3, 0.3).w_edges == threshold(a2.dbn, 0.3, 0.3).w_edges);
}

TEST_CASE("alldata with one client is the centralized fit") {
  GenConfig gen;
  const auto data = gen_dataset(gen_truth(gen), 100, 0, 1.0, 4, false);
  const auto a = alldata_baseline({ data }, DynotearsConfig {});
  const auto b = dynotears_fit(data, DynotearsConfig {});
  CHECK(a.dbn.w == b.dbn.w);
  CHECK(a.dbn.a == b.dbn.a);
}

TEST_CASE("per-client fits do not depend on the pool") {
  GenConfig gen;
  const auto data = gen_dataset(gen_truth(gen), 120, 0, 1.0, 5, false);
  const auto parts = partition(data.x_t, data.x_lag, 4);
  const auto f1 = fit_clients(parts, DynotearsConfig {});
  ThreadPool pool(2);
  const auto f2 = fit_clients(parts, DynotearsConfig {}, &pool);
  REQUIRE(f1.size() == 4);
  for (int c = 0; c < 4; ++c)
    CHECK(f1[c].w == f2[c].w);
}

TEST_CASE("ave baseline") {
  std::mt19937_64 rng(157);
  const WeightedDbn fit(oracle::random_matrix(rng, 3, 3), oracle::random_matrix(rng, 3, 3));
  const auto same = ave_baseline({ fit, fit, fit }, 0.3, 0.3);
  CHECK((same.averaged.w - fit.w).cwiseAbs().maxCoeff() <= 1e-15);

  auto plus = WeightedDbn::zeros(3, 1), minus = WeightedDbn::zeros(3, 1);
  plus.w(0, 1) = 0.4;
  minus.w(0, 1) = -0.4;
  const auto cancel = ave_baseline({ plus, minus }, 0.3, 0.3);
  CHECK(cancel.averaged.w(0, 1) == 0.0);
  CHECK(cancel.graph.w_edges.empty());

  auto one = WeightedDbn::zeros(3, 1);
  one.w(1, 2) = 0.9;
  const auto z = WeightedDbn::zeros(3, 1);
  const auto diluted = ave_baseline({ one, z, z, z }, 0.3, 0.3);
  CHECK(diluted.averaged.w(1, 2) == doctest::Approx(0.225));
  CHECK(diluted.graph.w_edges.empty());
  CHECK_THROWS_AS(ave_baseline({}, 0.3, 0.3), ArgumentError);
}

TEST_CASE("ave keeps cycles") {
  auto a = WeightedDbn::zeros(2, 1), b = WeightedDbn::zeros(2, 1);
  a.w(0, 1) = 0.8;
  b.w(1, 0) = 0.8;
  CHECK_FALSE(is_acyclic(ave_baseline({ a, b }, 0.3, 0.3).graph));
}

TEST_CASE("best baseline") {
  auto truth_dbn = WeightedDbn::zeros(4, 1);
  truth_dbn.w(0, 1) = 0.5;
  truth_dbn.w(1, 2) = 0.5;
  truth_dbn.a(3, 3) = 0.4;
  const auto truth = threshold(truth_dbn, 0.3, 0.3);

  std::mt19937_64 rng(163);
  std::vector<WeightedDbn> fits;
  for (int c = 0; c < 3; ++c)
    fits.emplace_back(oracle::random_matrix(rng, 4, 4), oracle::random_matrix(rng, 4, 4));
  fits.push_back(truth_dbn);
  CHECK(best_baseline(fits, truth, 0.3, 0.3).client == 3);

  CHECK(best_baseline({ truth_dbn, truth_dbn }, truth, 0.3, 0.3).client == 0);

  auto three = truth_dbn, five = truth_dbn;
  three.w(2, 3) = three.w(3, 0) = three.w(0, 2) = 0.9;  // 3 extra edges
  five.w.setZero();
  five.a.setZero();
  five.w(2, 0) = five.w(3, 1) = five.w(2, 3) = 0.9;     // 2 missing + 3 extra + lag miss
  const auto best = best_baseline({ five, three }, truth, 0.3, 0.3);
  CHECK(best.client == 1);
  CHECK(shd(best.graph, truth).w == 3);
  CHECK_THROWS_AS(best_baseline({}, truth, 0.3, 0.3), ArgumentError);
}

}  // TEST_SUITE
