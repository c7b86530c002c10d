//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <cmath>
#include <limits>

#include "fdbn/baselines.h"
#include "fdbn/errors.h"
#include "fdbn/fdbnl.h"
#include "fdbn/metrics.h"
#include "fdbn/parallel.h"
#include "oracles.hpp"

using namespace fdbn;

namespace {

struct LocalInstance {
  oracle::LocalObjective obj;
  ClientDataset data;
};

LocalInstance random_local_instance(std::mt19937_64 &rng) {
  std::uniform_int_distribution<int> dd(2, 8), pp(1, 3), nn(10, 100);
  std::uniform_real_distribution<double> rr(0.2, 5.0);
  const int d = dd(rng), p = pp(rng), n = nn(rng);
  LocalInstance in;
  in.data.x_t = oracle::random_normal(rng, n, d);
  in.data.x_lag = oracle::random_normal(rng, n, p * d);
  in.obj = { in.data.x_t, in.data.x_lag, oracle::random_matrix(rng, d, d),
             oracle::random_matrix(rng, p * d, d),
             oracle::random_matrix(rng, d, d),
             oracle::random_matrix(rng, p * d, d), rr(rng) };
  return in;
}

// Unconstrained numerical minimization of the raw local objective.
LocalSolution numeric_local(const oracle::LocalObjective &obj) {
  const auto d = obj.w.rows(), pd = obj.a.rows();
  auto f = [&](const Vec &x, Vec &g) {
    const Mat b = Eigen::Map<const Mat>(x.data(), d, d);
    const Mat dk = Eigen::Map<const Mat>(x.data() + d * d, pd, d);
    const auto [gb, gd] = obj.gradient(b, dk);
    g.head(d * d) = Eigen::Map<const Vec>(gb.data(), d * d);
    g.tail(pd * d) = Eigen::Map<const Vec>(gd.data(), pd * d);
    return obj.value(b, dk);
  };
  BoundMinimizeConfig cfg;
  cfg.grad_tol = 1e-10;
  cfg.max_iter = 5000;
  const auto n = d * d + pd * d;
  const auto r = bound_minimize(
      f, Vec::Zero(n),
      Vec::Constant(n, -std::numeric_limits<double>::infinity()), cfg);
  REQUIRE(r.converged);
  return { Eigen::Map<const Mat>(r.x.data(), d, d),
           Eigen::Map<const Mat>(r.x.data() + d * d, pd, d) };
}

Mat soft_threshold(const Mat &x, double level) {
  return x.unaryExpr([level](double v) {
    return v > level ? v - level : (v < -level ? v + level : 0.0);
  });
}

}  // namespace

TEST_SUITE("fdbnl") {

TEST_CASE("config validation") {
  FdbnlConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.phi1 = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.rho2_0 = 0;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
  cfg = {};
  cfg.lambda_w = -1;
  CHECK_THROWS_AS(cfg.validate(), ArgumentError);
}

TEST_CASE("local update on zero data") {
  std::mt19937_64 rng(83);
  const int d = 3, p = 2;
  ClientDataset zero { Mat::Zero(10, d), Mat::Zero(10, p * d) };
  const Mat w = oracle::random_matrix(rng, d, d), a = oracle::random_matrix(rng, p * d, d);
  const Mat beta = oracle::random_matrix(rng, d, d);
  const Mat gamma = oracle::random_matrix(rng, p * d, d);
  const double rho = 2.5;
  const auto sol = local_update(zero, w, a, beta, gamma, rho);
  CHECK((sol.b - (w - beta / rho)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((sol.dk - (a - gamma / rho)).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("local update is stationary and matches a numerical minimizer") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 50; ++trial) {
    const auto in = random_local_instance(rng);
    const auto &o = in.obj;
    const auto sol = local_update(in.data, o.w, o.a, o.beta, o.gamma, o.rho);
    const auto [gb, gd] = o.gradient(sol.b, sol.dk);
    const Mat s = in.data.x_t.transpose() * in.data.x_t / in.data.n();
    const Mat m = in.data.x_t.transpose() * in.data.x_lag / in.data.n();
    const double b1 = (s - o.beta + o.rho * o.w).norm();
    const double b2 = (m.transpose() - o.gamma + o.rho * o.a).norm();
    const double grad_inf = std::max(gb.cwiseAbs().maxCoeff(), gd.cwiseAbs().maxCoeff());
    CHECK(grad_inf <= 1e-8 * (1 + b1 + b2));
    const auto ref = numeric_local(o);
    CHECK((sol.b - ref.b).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK((sol.dk - ref.dk).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("local update rejects a nonpositive penalty") {
  ClientDataset ds { Mat::Zero(4, 2), Mat::Zero(4, 2) };
  CHECK_THROWS(local_update(ds, Mat::Zero(2, 2), Mat::Zero(2, 2),
                            Mat::Zero(2, 2), Mat::Zero(2, 2), 0.0));
}

TEST_CASE("global update at exact consensus on zero") {
  FdbnlConfig cfg;
  cfg.lambda_w = cfg.lambda_a = 0;
  const auto g = global_update({ Mat::Zero(3, 3) }, { Mat::Zero(3, 3) },
                               { Mat::Zero(3, 3) }, { Mat::Zero(3, 3) }, 0,
                               1, 1, cfg, Mat::Zero(3, 3), Mat::Zero(3, 3));
  CHECK(g.w.isZero(0));
  CHECK(g.a.isZero(0));
}

TEST_CASE("huge lag penalty zeroes A") {
  std::mt19937_64 rng(97);
  FdbnlConfig cfg;
  cfg.lambda_a = 1e6;
  std::vector<Mat> b, dk, beta, gamma;
  for (int k = 0; k < 3; ++k) {
    b.push_back(oracle::random_matrix(rng, 3, 3));
    dk.push_back(oracle::random_matrix(rng, 6, 3));
    beta.push_back(oracle::random_matrix(rng, 3, 3));
    gamma.push_back(oracle::random_matrix(rng, 6, 3));
  }
  const auto g = global_update(b, dk, beta, gamma, 0, 1, 2, cfg,
                               Mat::Zero(3, 3), Mat::Zero(6, 3));
  CHECK(g.a.isZero(0));
  CHECK(global_a_closed_form(dk, gamma, 2, 1e6).isZero(0));
}

TEST_CASE("A block of the global step is a soft threshold") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + trial % 4, d = 3, pd = 3 * (1 + trial % 2);
    const double rho2 = 0.5 + trial, lambda_a = 0.3;
    std::vector<Mat> b, dk, beta, gamma;
    Mat mean = Mat::Zero(pd, d);
    for (int c = 0; c < k; ++c) {
      b.push_back(oracle::random_matrix(rng, d, d));
      dk.push_back(oracle::random_matrix(rng, pd, d));
      beta.push_back(oracle::random_matrix(rng, d, d));
      gamma.push_back(oracle::random_matrix(rng, pd, d));
      mean += (dk.back() + gamma.back() / rho2) / k;
    }
    const Mat expect = soft_threshold(mean, lambda_a / (k * rho2));
    CHECK((global_a_closed_form(dk, gamma, rho2, lambda_a) - expect)
              .cwiseAbs().maxCoeff() <= 1e-14);
    FdbnlConfig cfg;
    cfg.lambda_a = lambda_a;
    cfg.inner.grad_tol = 1e-10;
    cfg.inner.rel_ftol = 0;
    cfg.inner.max_iter = 5000;
    const auto g = global_update(b, dk, beta, gamma, 0.5, 2, rho2, cfg,
                                 Mat::Zero(d, d), Mat::Zero(pd, d));
    CHECK((g.a - expect).cwiseAbs().maxCoeff() <= 1e-6);
    cfg.closed_form_a = true;
    const auto gc = global_update(b, dk, beta, gamma, 0.5, 2, rho2, cfg,
                                  Mat::Zero(d, d), Mat::Zero(pd, d));
    CHECK((gc.a - expect).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((gc.w - g.w).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("W block of the global step satisfies the l1 optimality conditions") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 2 + trial % 3, d = 3 + trial % 3;
    const double alpha = 0.3, rho1 = 2, rho2 = 1.5, lambda = 0.1;
    std::vector<Mat> b, dk, beta, gamma;
    for (int c = 0; c < k; ++c) {
      b.push_back(oracle::random_matrix(rng, d, d, -0.5, 0.5));
      dk.push_back(Mat::Zero(d, d));
      beta.push_back(oracle::random_matrix(rng, d, d, -0.2, 0.2));
      gamma.push_back(Mat::Zero(d, d));
    }
    FdbnlConfig cfg;
    cfg.lambda_w = lambda;
    cfg.inner.grad_tol = 1e-10;
    cfg.inner.rel_ftol = 0;
    cfg.inner.max_iter = 5000;
    const auto g = global_update(b, dk, beta, gamma, alpha, rho1, rho2, cfg,
                                 Mat::Zero(d, d), Mat::Zero(d, d));
    CHECK(g.w.diagonal().isZero(0));
    // Smooth part written out directly, differentiated numerically.
    auto smooth = [&](const Mat &w) {
      const double h = oracle::series_acyclicity(w);
      double v = alpha * h + rho1 / 2 * h * h;
      for (int c = 0; c < k; ++c)
        v += (beta[c].array() * (b[c] - w).array()).sum()
             + rho2 / 2 * (b[c] - w).squaredNorm();
      return v;
    };
    const Mat grad = oracle::fd_gradient(smooth, g.w, 1e-6);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j)
          continue;
        if (g.w(i, j) > 0)
          CHECK(std::abs(grad(i, j) + lambda) <= 1e-5);
        else if (g.w(i, j) < 0)
          CHECK(std::abs(grad(i, j) - lambda) <= 1e-5);
        else
          CHECK(std::abs(grad(i, j)) <= lambda + 1e-5);
      }
  }
}

TEST_CASE("dual update at consensus only scales penalties") {
  FdbnlConfig cfg;
  auto s = FdbnlState::initial(3, 1, 2, cfg);
  std::mt19937_64 rng(107);
  s.w = oracle::random_matrix(rng, 3, 3).triangularView<Eigen::StrictlyLower>();
  s.a = oracle::random_matrix(rng, 3, 3);
  s.beta[0] = oracle::random_matrix(rng, 3, 3);
  for (int k = 0; k < 2; ++k) {
    s.b[k] = s.w;
    s.dk[k] = s.a;
  }
  const auto before = s;
  dual_update(s, cfg);
  CHECK(s.beta[0] == before.beta[0]);
  CHECK(s.beta[1] == before.beta[1]);
  CHECK(s.gamma[0] == before.gamma[0]);
  CHECK(s.alpha == before.alpha);
  CHECK(s.rho1 == doctest::Approx(1.6));
  CHECK(s.rho2 == doctest::Approx(1.1));
}

TEST_CASE("dual update ascent and penalty cap") {
  FdbnlConfig cfg;
  cfg.rho_max = 10;
  auto s = FdbnlState::initial(2, 1, 1, cfg);
  s.rho2 = 2;
  s.b[0] = Mat::Constant(2, 2, 1.0);
  s.dk[0] = Mat::Constant(2, 2, -1.0);
  s.w(0, 1) = s.w(1, 0) = 1;
  const double h = acyclicity_value(s.w);
  dual_update(s, cfg);
  CHECK(s.beta[0].isApprox(2 * (Mat::Constant(2, 2, 1.0) - s.w)));
  CHECK(s.gamma[0].isApprox(Mat::Constant(2, 2, -2.0)));
  CHECK(s.alpha == doctest::Approx(h));
  s.rho1 = s.rho2 = 10;
  dual_update(s, cfg);
  CHECK(s.rho1 == 10);
  CHECK(s.rho2 == 10);
}

TEST_CASE("all-zero clients give an all-zero model") {
  std::vector<ClientDataset> data(3, { Mat::Zero(20, 4), Mat::Zero(20, 8) });
  const auto r = run_fdbnl(data, FdbnlConfig {});
  CHECK(r.dbn.w.isZero(0));
  CHECK(r.dbn.a.isZero(0));
  CHECK(r.converged);
}

TEST_CASE("fdbnl objective adds losses and l1 terms") {
  std::mt19937_64 rng(109);
  std::vector<GramStats> stats;
  double loss = 0;
  const Mat w = oracle::random_matrix(rng, 3, 3), a = oracle::random_matrix(rng, 3, 3);
  for (int k = 0; k < 3; ++k) {
    const Mat xt = oracle::random_normal(rng, 15, 3), xl = oracle::random_normal(rng, 15, 3);
    stats.push_back(GramStats::from_designs(xt, xl));
    loss += (xt - xt * w - xl * a).squaredNorm() / 30;
  }
  CHECK(fdbnl_objective(stats, w, a, 0.2, 0.3)
        == doctest::Approx(loss + 0.2 * w.cwiseAbs().sum() + 0.3 * a.cwiseAbs().sum()));
}

TEST_CASE("runs: schedule, consensus, acyclicity and determinism") {
  GenConfig gen;
  gen.d = 5;
  gen.p = 2;
  FdbnlConfig cfg;
  cfg.lambda_w = cfg.lambda_a = 0.05;
  cfg.phi2 = 1.02;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    gen.seed = seed;
    const auto truth = gen_truth(gen);
    const auto all = gen_dataset(truth, 300, 0, 1.0, derive_seed(seed, 99), false);
    const auto clients = partition(all.x_t, all.x_lag, 5);
    const auto r = run_fdbnl(clients, cfg);
    REQUIRE(!r.trace.empty());
    CHECK(r.rounds == static_cast<int>(r.trace.size()));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      CHECK(r.trace[i].rho1 >= r.trace[i - 1].rho1);
      CHECK(r.trace[i].rho2 >= r.trace[i - 1].rho2);
      CHECK(r.trace[i].rho1 <= cfg.rho_max);
    }
    CHECK(r.dbn.w.diagonal().isZero(0));
    if (r.converged) {
      CHECK(r.max_primal_w <= cfg.primal_tol);
      CHECK(r.max_primal_a <= cfg.primal_tol);
      CHECK(r.h <= cfg.h_tol);
    }
    const auto g = threshold(r.dbn, 0.3, 0.3);
    CHECK(is_acyclic(g));
    CHECK(oracle::dfs_acyclic(oracle::adjacency(g)));

    ThreadPool pool(3);
    const auto rp = run_fdbnl(clients, cfg, &pool);
    REQUIRE(rp.trace.size() == r.trace.size());
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
      CHECK(rp.trace[i].h == r.trace[i].h);
      CHECK(rp.trace[i].objective == r.trace[i].objective);
      CHECK(rp.trace[i].max_primal_w == r.trace[i].max_primal_w);
    }
    CHECK(rp.dbn.w == r.dbn.w);
    CHECK(rp.dbn.a == r.dbn.a);
  }
}

TEST_CASE("a single client agrees with the centralized solver") {
  GenConfig gen;
  gen.d = 5;
  gen.p = 3;
  FdbnlConfig cfg;
  cfg.lambda_w = cfg.lambda_a = 0.05;
  cfg.phi2 = 1.02;
  DynotearsConfig dcfg;
  dcfg.lambda_w = dcfg.lambda_a = 0.05;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    gen.seed = seed;
    const auto truth = gen_truth(gen);
    const auto data = gen_dataset(truth, 500, 0, 1.0, derive_seed(seed, 99), false);
    const auto fed = threshold(run_fdbnl({ data }, cfg).dbn, 0.3, 0.3);
    const auto central = threshold(dynotears_fit(data, dcfg).dbn, 0.3, 0.3);
    CHECK(shd(fed, central).w <= 1);
  }
}

TEST_CASE("clients must agree on dimensions") {
  std::vector<ClientDataset> data { { Mat::Zero(5, 2), Mat::Zero(5, 2) },
                                    { Mat::Zero(5, 3), Mat::Zero(5, 3) } };
  CHECK_THROWS_AS(run_fdbnl(data, FdbnlConfig {}), DimensionError);
  CHECK_THROWS_AS(run_fdbnl({}, FdbnlConfig {}), ArgumentError);
}

}  // TEST_SUITE
