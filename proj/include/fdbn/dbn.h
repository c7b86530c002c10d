//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_DBN_H_
#define FDBN_DBN_H_

#include <compare>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "fdbn/numkit.h"

namespace fdbn {

/// Linear dynamic Bayesian network with intra-slice weights `w` (d x d,
/// w(i, j) != 0 means i -> j within a slice) and lag weights `a`
/// ((p*d) x d). Row block i-1 of `a` holds lag i: a(( i-1)*d + s, t) is the
/// effect of x_{t-i}[s] on x_t[t], so that X_t = X_t W + X_lag A + noise
/// with X_lag = [X_{t-1} ... X_{t-p}].
struct WeightedDbn {
  int d = 0;
  int p = 0;
  Mat w;
  Mat a;

  WeightedDbn() = default;
  WeightedDbn(Mat w_, Mat a_);

  static WeightedDbn zeros(int d, int p);
};

/// Builds the stacked lag matrix from per-lag blocks A_1..A_p.
Mat stack_lags(const std::vector<Mat> &blocks);

/// Lag block i (1-based) of a stacked lag matrix.
Mat lag_block(const WeightedDbn &dbn, int lag);

struct Edge {
  int from;
  int to;

  auto operator<=>(const Edge &) const = default;
};

struct LagEdge {
  int lag;
  int from;
  int to;

  auto operator<=>(const LagEdge &) const = default;
};

struct BinaryDbn {
  int d = 0;
  int p = 0;
  std::set<Edge> w_edges;
  std::set<LagEdge> a_edges;
};

/// Keeps an edge iff |weight| > tau. The diagonal of W never yields an edge.
BinaryDbn threshold(const WeightedDbn &dbn, double tau_w, double tau_a);

/// Binary graph of every nonzero off-diagonal weight.
BinaryDbn support(const WeightedDbn &dbn);

/// Kahn's algorithm over the intra-slice edges.
bool is_acyclic(const BinaryDbn &graph);

/// Copy of W with its diagonal set to zero.
Mat zero_diagonal(Mat w);

// Serialization --------------------------------------------------------------

/// Matrix CSV with header `j0,...,j{cols-1}`; values written round-trip
/// exact.
void write_matrix_csv(std::ostream &os, const Mat &m);
Mat read_matrix_csv(std::istream &is);

/// {"d": d, "p": p, "W": [[...]], "A": [[...]]}
std::string to_json(const WeightedDbn &dbn);
WeightedDbn dbn_from_json(const std::string &text);

/// Writes `<stem>_W.csv`, `<stem>_A.csv` and `<stem>.json` into `dir`.
void save_dbn(const WeightedDbn &dbn, const std::filesystem::path &dir,
              const std::string &stem);
WeightedDbn load_dbn_json(const std::filesystem::path &path);

}  // namespace fdbn

#endif  // FDBN_DBN_H_
