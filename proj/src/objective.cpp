//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/objective.h"

#include "fdbn/errors.h"

namespace fdbn {

GramStats GramStats::from_designs(const Mat &x_t, const Mat &x_lag) {
  if (x_t.rows() != x_lag.rows())
    throw DimensionError("GramStats: X_t and X_lag row counts differ");
  if (x_t.rows() == 0)
    throw ArgumentError("GramStats: empty design");
  GramStats g;
  g.rows = static_cast<int>(x_t.rows());
  const double inv = 1.0 / static_cast<double>(g.rows);
  g.s = x_t.transpose() * x_t * inv;
  g.m = x_t.transpose() * x_lag * inv;
  g.n = x_lag.transpose() * x_lag * inv;
  return g;
}

LossEval least_squares(const GramStats &g, const Mat &w, const Mat &a) {
  const auto d = g.s.rows();
  if (w.rows() != d || w.cols() != d || a.rows() != g.n.rows()
      || a.cols() != d)
    throw DimensionError("least_squares: parameter shape mismatch");
  const Mat c = Mat::Identity(d, d) - w;
  // g1 = S C - M A, g2 = M^T C - N A
  Mat g1 = g.s * c - g.m * a;
  Mat g2 = g.m.transpose() * c - g.n * a;
  LossEval out;
  out.value = 0.5 * (c.cwiseProduct(g1).sum() - a.cwiseProduct(g2).sum());
  out.grad_w = -std::move(g1);
  out.grad_a = -std::move(g2);
  return out;
}

PenaltyEval acyclicity_penalty(const Mat &w, double alpha, double rho) {
  auto ac = acyclicity(w);
  PenaltyEval out;
  out.h = ac.value;
  out.value = alpha * ac.value + 0.5 * rho * ac.value * ac.value;
  out.grad = (alpha + rho * ac.value) * ac.gradient;
  return out;
}

SplitLayout::SplitLayout(int d, int pd)
    : d_(d), pd_(pd), w_free_(static_cast<Eigen::Index>(d) * (d - 1)),
      a_size_(static_cast<Eigen::Index>(pd) * d) {
  if (d < 1 || pd < 0)
    throw ArgumentError("SplitLayout: invalid dimensions");
}

Mat SplitLayout::unpack_w(const Vec &x) const {
  Mat w = Mat::Zero(d_, d_);
  Eigen::Index k = 0;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (i != j) {
        w(i, j) = x[k] - x[w_free_ + k];
        ++k;
      }
  return w;
}

Mat SplitLayout::unpack_a(const Vec &x) const {
  Mat a(pd_, d_);
  const Eigen::Index base = 2 * w_free_;
  Eigen::Index k = 0;
  for (int i = 0; i < pd_; ++i)
    for (int j = 0; j < d_; ++j, ++k)
      a(i, j) = x[base + k] - x[base + a_size_ + k];
  return a;
}

Vec SplitLayout::pack(const Mat &w, const Mat &a) const {
  Vec x = Vec::Zero(size());
  Eigen::Index k = 0;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (i != j) {
        x[k] = std::max(w(i, j), 0.0);
        x[w_free_ + k] = std::max(-w(i, j), 0.0);
        ++k;
      }
  const Eigen::Index base = 2 * w_free_;
  k = 0;
  for (int i = 0; i < pd_; ++i)
    for (int j = 0; j < d_; ++j, ++k) {
      x[base + k] = std::max(a(i, j), 0.0);
      x[base + a_size_ + k] = std::max(-a(i, j), 0.0);
    }
  return x;
}

double SplitLayout::add_gradient(const Vec &x, const Mat &gw, const Mat &ga,
                                 double lambda_w, double lambda_a,
                                 Vec &grad) const {
  Eigen::Index k = 0;
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j)
      if (i != j) {
        grad[k] = gw(i, j) + lambda_w;
        grad[w_free_ + k] = -gw(i, j) + lambda_w;
        ++k;
      }
  const Eigen::Index base = 2 * w_free_;
  k = 0;
  for (int i = 0; i < pd_; ++i)
    for (int j = 0; j < d_; ++j, ++k) {
      grad[base + k] = ga(i, j) + lambda_a;
      grad[base + a_size_ + k] = -ga(i, j) + lambda_a;
    }
  return lambda_w * x.head(2 * w_free_).sum()
         + lambda_a * x.tail(2 * a_size_).sum();
}

}  // namespace fdbn
