//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/metrics.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "fdbn/errors.h"

namespace fdbn {
namespace {
  void check_shapes(const BinaryDbn &pred, const BinaryDbn &truth) {
    if (pred.d != truth.d || pred.p != truth.p)
      throw ArgumentError("metrics: graphs differ in (d, p): ("
                          + std::to_string(pred.d) + ", "
                          + std::to_string(pred.p) + ") vs ("
                          + std::to_string(truth.d) + ", "
                          + std::to_string(truth.p) + ")");
  }

  template <class Set>
  MatrixScores score_sets(const Set &pred, const Set &truth) {
    MatrixScores out;
    for (const auto &e: pred)
      (truth.count(e) ? out.counts.tp : out.counts.fp)++;
    out.counts.fn = static_cast<int>(truth.size()) - out.counts.tp;
    out.tpr = truth.empty() ? 1.0
                            : static_cast<double>(out.counts.tp)
                                  / static_cast<double>(truth.size());
    out.fdr = pred.empty() ? 0.0
                           : static_cast<double>(out.counts.fp)
                                 / static_cast<double>(pred.size());
    return out;
  }

  int shd_intra(const BinaryDbn &pred, const BinaryDbn &truth) {
    int total = 0;
    for (int i = 0; i < truth.d; ++i)
      for (int j = i + 1; j < truth.d; ++j) {
        const bool t_ij = truth.w_edges.count({ i, j }) > 0;
        const bool t_ji = truth.w_edges.count({ j, i }) > 0;
        const bool p_ij = pred.w_edges.count({ i, j }) > 0;
        const bool p_ji = pred.w_edges.count({ j, i }) > 0;
        if (t_ij == p_ij && t_ji == p_ji)
          continue;
        if (t_ij != t_ji && p_ij != p_ji)
          total += 1;  // single edge with the wrong orientation
        else
          total += (t_ij != p_ij) + (t_ji != p_ji);
      }
    return total;
  }

  int count_reversed(const BinaryDbn &pred, const BinaryDbn &truth) {
    int n = 0;
    for (const auto &e: pred.w_edges)
      if (!truth.w_edges.count(e) && truth.w_edges.count({ e.to, e.from }))
        ++n;
    return n;
  }

  std::vector<std::string> tokens(const std::string &line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t)
      out.push_back(t);
    return out;
  }

  int gene_index(const std::string &name, int d, std::size_t line) {
    std::size_t pos = 0;
    while (pos < name.size() && !std::isdigit(static_cast<unsigned char>(name[pos])))
      ++pos;
    if (pos == name.size())
      throw IngestError("gold standard: bad gene id '" + name + "'", line);
    int id = 0;
    try {
      id = std::stoi(name.substr(pos));
    } catch (const std::exception &) {
      throw IngestError("gold standard: bad gene id '" + name + "'", line);
    }
    if (id < 1 || id > d)
      throw IngestError("gold standard: gene id " + std::to_string(id)
                            + " outside 1.." + std::to_string(d),
                        line);
    return id - 1;
  }
}  // namespace

ShdPair shd(const BinaryDbn &pred, const BinaryDbn &truth) {
  check_shapes(pred, truth);
  ShdPair out;
  out.w = shd_intra(pred, truth);
  for (const auto &e: pred.a_edges)
    out.a += truth.a_edges.count(e) ? 0 : 1;
  for (const auto &e: truth.a_edges)
    out.a += pred.a_edges.count(e) ? 0 : 1;
  return out;
}

MetricsReport evaluate(const BinaryDbn &pred, const BinaryDbn &truth) {
  check_shapes(pred, truth);
  MetricsReport r;
  r.w = score_sets(pred.w_edges, truth.w_edges);
  r.w.counts.reversed = count_reversed(pred, truth);
  r.a = score_sets(pred.a_edges, truth.a_edges);
  const auto s = shd(pred, truth);
  r.w.shd = s.w;
  r.a.shd = s.a;
  return r;
}

MeanMetrics mean_metrics(const std::vector<MetricsReport> &reports) {
  if (reports.empty())
    throw ArgumentError("mean_metrics: no reports");
  MeanMetrics m;
  for (const auto &r: reports) {
    m.shd_w += r.w.shd;
    m.tpr_w += r.w.tpr;
    m.fdr_w += r.w.fdr;
    m.shd_a += r.a.shd;
    m.tpr_a += r.a.tpr;
    m.fdr_a += r.a.fdr;
  }
  const double k = static_cast<double>(reports.size());
  m.shd_w /= k;
  m.tpr_w /= k;
  m.fdr_w /= k;
  m.shd_a /= k;
  m.tpr_a /= k;
  m.fdr_a /= k;
  return m;
}

Mat combined_scores(const WeightedDbn &dbn) {
  Mat s = dbn.w.cwiseAbs();
  for (int lag = 1; lag <= dbn.p; ++lag)
    s += lag_block(dbn, lag).cwiseAbs();
  return s;
}

RankingScores auroc_aupr(const Mat &scores, const Mat &gold,
                         bool mask_diagonal) {
  if (scores.rows() != gold.rows() || scores.cols() != gold.cols())
    throw DimensionError("auroc_aupr: scores and gold differ in shape");
  std::vector<std::pair<double, bool>> cells;
  for (Eigen::Index i = 0; i < scores.rows(); ++i)
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (mask_diagonal && i == j)
        continue;
      if (!std::isfinite(scores(i, j)))
        throw MetricError("auroc_aupr: non-finite score");
      cells.emplace_back(scores(i, j), gold(i, j) != 0);
    }
  const auto positives = static_cast<double>(
      std::count_if(cells.begin(), cells.end(),
                    [](const auto &c) { return c.second; }));
  const double negatives = static_cast<double>(cells.size()) - positives;
  if (positives == 0 || negatives == 0)
    throw MetricError("auroc_aupr: gold standard needs at least one positive "
                      "and one negative cell");

  // Descending score order; tied groups are handled as one threshold.
  std::sort(cells.begin(), cells.end(),
            [](const auto &x, const auto &y) { return x.first > y.first; });

  double rank_sum = 0;   // ascending ranks of positives
  double ap = 0;
  double tp = 0, seen = 0;
  const double n = static_cast<double>(cells.size());
  for (std::size_t start = 0; start < cells.size();) {
    std::size_t end = start;
    double group_pos = 0;
    while (end < cells.size() && cells[end].first == cells[start].first) {
      group_pos += cells[end].second ? 1 : 0;
      ++end;
    }
    const double count = static_cast<double>(end - start);
    // Descending positions seen+1..seen+count map to ascending ranks
    // n-seen-count+1..n-seen; ties take the average.
    const double avg_rank = n - seen - (count - 1) / 2.0;
    rank_sum += group_pos * avg_rank;
    tp += group_pos;
    seen += count;
    if (group_pos > 0)
      ap += group_pos * (tp / seen);
    start = end;
  }
  RankingScores r;
  r.auroc = (rank_sum - positives * (positives + 1) / 2.0)
            / (positives * negatives);
  r.aupr = ap / positives;  // divide once so a perfect ranking gives exactly 1
  return r;
}

Mat read_gold_standard(std::istream &is, int d) {
  if (d < 1)
    throw ArgumentError("read_gold_standard: d must be positive");
  std::size_t lineno = 0;
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(line);
  }
  const auto first_data =
      std::find_if(lines.begin(), lines.end(),
                   [](const std::string &l) { return !tokens(l).empty(); });
  if (first_data == lines.end())
    throw IngestError("gold standard: empty input", 0);

  Mat gold = Mat::Zero(d, d);
  if (first_data->find(',') != std::string::npos) {
    std::stringstream ss;
    for (const auto &l: lines)
      ss << l << '\n';
    gold = read_matrix_csv(ss);
    if (gold.rows() != d || gold.cols() != d)
      throw IngestError("gold standard: matrix is "
                            + std::to_string(gold.rows()) + "x"
                            + std::to_string(gold.cols()) + ", expected "
                            + std::to_string(d) + "x" + std::to_string(d),
                        0);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        if (gold(i, j) != 0 && gold(i, j) != 1)
          throw IngestError("gold standard: entries must be 0 or 1",
                            static_cast<std::size_t>(i) + 2);
    return gold;
  }

  for (const auto &l: lines) {
    ++lineno;
    const auto t = tokens(l);
    if (t.empty())
      continue;
    if (t.size() != 3)
      throw IngestError("gold standard: expected 'Gi Gj flag', found "
                            + std::to_string(t.size()) + " fields",
                        lineno);
    const int i = gene_index(t[0], d, lineno);
    const int j = gene_index(t[1], d, lineno);
    if (t[2] != "0" && t[2] != "1")
      throw IngestError("gold standard: flag must be 0 or 1, found '" + t[2]
                            + "'",
                        lineno);
    gold(i, j) = t[2] == "1" ? 1.0 : 0.0;
  }
  return gold;
}

Mat read_gold_standard(const std::filesystem::path &path, int d) {
  std::ifstream is(path);
  if (!is)
    throw IngestError("cannot open " + path.string(), 0);
  return read_gold_standard(is, d);
}

}  // namespace fdbn
