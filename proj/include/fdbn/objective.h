//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_OBJECTIVE_H_
#define FDBN_OBJECTIVE_H_

#include "fdbn/numkit.h"

namespace fdbn {

/// Sufficient statistics of the least-squares loss for one dataset:
/// S = X_t^T X_t / n, M = X_t^T X_lag / n, N = X_lag^T X_lag / n.
struct GramStats {
  Mat s, m, n;
  int rows = 0;

  static GramStats from_designs(const Mat &x_t, const Mat &x_lag);

  int d() const { return static_cast<int>(s.rows()); }
  int pd() const { return static_cast<int>(n.rows()); }
};

struct LossEval {
  double value = 0;
  Mat grad_w;
  Mat grad_a;
};

/// 1/(2n) ||X_t - X_t W - X_lag A||_F^2 and its gradient, evaluated from
/// Gram statistics only.
LossEval least_squares(const GramStats &g, const Mat &w, const Mat &a);

struct PenaltyEval {
  double h = 0;
  double value = 0;   // alpha h + rho/2 h^2
  Mat grad;           // (alpha + rho h) grad h
};

/// Augmented-Lagrangian acyclicity terms for multiplier alpha and penalty
/// rho.
PenaltyEval acyclicity_penalty(const Mat &w, double alpha, double rho);

/// Nonnegative split W = W+ - W-, A = A+ - A-, packed as
/// [W+ offdiag | W- offdiag | A+ | A-] (row-major within each block). W's
/// diagonal has no coordinates and is held at zero.
class SplitLayout {
public:
  SplitLayout(int d, int pd);

  int d() const { return d_; }
  int pd() const { return pd_; }
  Eigen::Index size() const { return 2 * (w_free_ + a_size_); }

  Mat unpack_w(const Vec &x) const;
  Mat unpack_a(const Vec &x) const;

  /// Split of (W, A) into positive and negative parts.
  Vec pack(const Mat &w, const Mat &a) const;

  /// Scatters smooth gradients (gw, ga) into split coordinates and adds the
  /// l1 weights; returns lambda_w ||W||_1 + lambda_a ||A||_1 measured on the
  /// split variables.
  double add_gradient(const Vec &x, const Mat &gw, const Mat &ga,
                      double lambda_w, double lambda_a, Vec &grad) const;

  Vec lower_bounds() const { return Vec::Zero(size()); }

private:
  int d_, pd_;
  Eigen::Index w_free_, a_size_;
};

}  // namespace fdbn

#endif  // FDBN_OBJECTIVE_H_
