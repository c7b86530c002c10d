//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_METRICS_H_
#define FDBN_METRICS_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "fdbn/dbn.h"

namespace fdbn {

struct ConfusionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int reversed = 0;  // predicted edges whose reverse is a true edge (W only)
};

struct MatrixScores {
  ConfusionCounts counts;
  int shd = 0;
  double tpr = 0;
  double fdr = 0;
};

struct RankingScores {
  double auroc = 0;
  double aupr = 0;
};

struct MetricsReport {
  MatrixScores w;
  MatrixScores a;
  std::optional<RankingScores> ranking;
};

struct ShdPair {
  int w = 0;
  int a = 0;
};

/// Intra-slice SHD counts each unordered node pair once: a reversed edge
/// costs 1, otherwise every missing or extra directed edge costs 1. Lag
/// SHD is missing + extra.
ShdPair shd(const BinaryDbn &pred, const BinaryDbn &truth);

/// Exact-direction TPR and FDR. Empty truth gives TPR 1; empty prediction
/// gives FDR 0.
MetricsReport evaluate(const BinaryDbn &pred, const BinaryDbn &truth);

struct MeanMetrics {
  double shd_w = 0, tpr_w = 0, fdr_w = 0;
  double shd_a = 0, tpr_a = 0, fdr_a = 0;
};

MeanMetrics mean_metrics(const std::vector<MetricsReport> &reports);

/// |W| + sum over lags of |A_lag|, element-wise.
Mat combined_scores(const WeightedDbn &dbn);

/// AUROC from average ranks (Mann-Whitney) and AUPR as average precision
/// over tied score groups. Raises MetricError when the gold standard has
/// no positive or no negative cell after masking.
RankingScores auroc_aupr(const Mat &scores, const Mat &gold,
                         bool mask_diagonal = true);

/// Gold standard as a d x d 0/1 matrix, from either an edge list of lines
/// `G<i> G<j> <0|1>` (1-based gene ids) or a matrix CSV with a header row.
Mat read_gold_standard(std::istream &is, int d);
Mat read_gold_standard(const std::filesystem::path &path, int d);

}  // namespace fdbn

#endif  // FDBN_METRICS_H_
