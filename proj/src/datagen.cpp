//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/datagen.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include "fdbn/errors.h"

namespace fdbn {
namespace {
  constexpr int kBurnIn = 100;

  double edge_weight(Rng &rng, double scale) {
    std::uniform_real_distribution<double> mag(0.3, 0.5);
    std::bernoulli_distribution negative(0.5);
    const double w = mag(rng) * scale;
    return negative(rng) ? -w : w;
  }

  double edge_probability(double degree, int d) {
    return std::clamp(degree / static_cast<double>(d), 0.0, 1.0);
  }

  std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ','))
      out.push_back(cell);
    if (!line.empty() && line.back() == ',')
      out.emplace_back();
    return out;
  }

  long parse_int(const std::string &s, std::size_t line, const char *what) {
    try {
      std::size_t used = 0;
      const long v = std::stol(s, &used);
      if (used != s.size())
        throw std::invalid_argument(s);
      return v;
    } catch (const std::exception &) {
      throw IngestError(std::string("bad ") + what + " '" + s + "'", line);
    }
  }

  double parse_double(const std::string &s, std::size_t line) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() && s.substr(used) != "\r")
        throw std::invalid_argument(s);
      return v;
    } catch (const std::exception &) {
      throw IngestError("bad value '" + s + "'", line);
    }
  }
}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void GenConfig::validate() const {
  if (d < 2)
    throw ArgumentError("GenConfig: d must be >= 2");
  if (p < 1)
    throw ArgumentError("GenConfig: p must be >= 1");
  if (!(eta >= 1))
    throw ArgumentError("GenConfig: eta must be >= 1");
  if (!(noise_std > 0))
    throw ArgumentError("GenConfig: noise_std must be > 0");
  if (!(intra_mean_degree >= 0) || !(inter_mean_out_degree >= 0))
    throw ArgumentError("GenConfig: degrees must be nonnegative");
}

Mat gen_intra_dag(const GenConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::bernoulli_distribution edge(edge_probability(cfg.intra_mean_degree,
                                                    cfg.d));
  Mat lower = Mat::Zero(cfg.d, cfg.d);
  for (int i = 1; i < cfg.d; ++i)
    for (int j = 0; j < i; ++j)
      if (edge(rng))
        lower(i, j) = edge_weight(rng, 1.0);

  std::vector<int> perm(cfg.d);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Mat w = Mat::Zero(cfg.d, cfg.d);
  for (int i = 0; i < cfg.d; ++i)
    for (int j = 0; j < cfg.d; ++j)
      w(perm[i], perm[j]) = lower(i, j);
  return w;
}

Mat gen_inter_graphs(const GenConfig &cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::bernoulli_distribution edge(
      edge_probability(cfg.inter_mean_out_degree, cfg.d));
  Mat a = Mat::Zero(static_cast<Eigen::Index>(cfg.p) * cfg.d, cfg.d);
  for (int lag = 1; lag <= cfg.p; ++lag) {
    const int exponent = cfg.decay == LagDecay::kPerLag ? lag - 1 : cfg.p - 1;
    const double scale = 1.0 / std::pow(cfg.eta, exponent);
    for (int i = 0; i < cfg.d; ++i)
      for (int j = 0; j < cfg.d; ++j)
        if (edge(rng))
          a((lag - 1) * cfg.d + i, j) = edge_weight(rng, scale);
  }
  return a;
}

WeightedDbn gen_truth(const GenConfig &cfg) {
  GenConfig intra = cfg, inter = cfg;
  intra.seed = derive_seed(cfg.seed, 1);
  inter.seed = derive_seed(cfg.seed, 2);
  return WeightedDbn(gen_intra_dag(intra), gen_inter_graphs(inter));
}

std::vector<WeightedDbn> gen_hetero_truths(const GenConfig &cfg, int k) {
  if (k <= 0)
    throw ArgumentError("gen_hetero_truths: K must be positive");
  std::vector<WeightedDbn> out;
  out.reserve(k);
  for (int c = 0; c < k; ++c) {
    GenConfig sub = cfg;
    sub.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(c));
    out.push_back(gen_truth(sub));
  }
  return out;
}

SimulatedSeries simulate_svar(const WeightedDbn &truth, int t_len, int m,
                              double noise_std, std::uint64_t seed,
                              bool burn_in) {
  const int d = truth.d, p = truth.p;
  if (t_len < 0 || m <= 0)
    throw ArgumentError("simulate_svar: need T >= 0 and M >= 1");
  if (!(noise_std >= 0))
    throw ArgumentError("simulate_svar: noise_std must be >= 0");
  const Mat id = Mat::Identity(d, d);
  const Eigen::FullPivLU<Mat> lu(id - truth.w);
  if (!lu.isInvertible())
    throw NumericError("simulate_svar: I - W is singular");
  const Mat inv = lu.inverse();

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int skip = burn_in ? kBurnIn : 0;
  const int rows = t_len + 1 + skip;

  SimulatedSeries out;
  for (int r = 0; r < m; ++r) {
    Mat x(rows, d), u(rows, d);
    for (int t = 0; t < rows; ++t)
      for (int j = 0; j < d; ++j)
        u(t, j) = noise_std * normal(rng);
    for (int t = 0; t < rows; ++t) {
      if (t < p) {
        x.row(t) = u.row(t);
        continue;
      }
      Eigen::RowVectorXd drive = u.row(t);
      for (int lag = 1; lag <= p; ++lag)
        drive += x.row(t - lag) * truth.a.middleRows((lag - 1) * d, d);
      x.row(t) = drive * inv;
    }
    out.series.push_back(x.bottomRows(t_len + 1));
    out.noise.push_back(u.bottomRows(t_len + 1));
  }
  return out;
}

ClientDataset build_designs(const Mat &series, int p) {
  if (p < 1)
    throw ArgumentError("build_designs: p must be >= 1");
  if (series.rows() < p + 1)
    throw ArgumentError("build_designs: series of length "
                        + std::to_string(series.rows())
                        + " is shorter than p + 1 = " + std::to_string(p + 1));
  const auto d = series.cols();
  const auto n = series.rows() - p;
  ClientDataset out;
  out.x_t = series.bottomRows(n);
  out.x_lag.resize(n, p * d);
  for (int lag = 1; lag <= p; ++lag)
    out.x_lag.middleCols((lag - 1) * d, d) = series.middleRows(p - lag, n);
  return out;
}

ClientDataset build_designs(const std::vector<Mat> &series, int p) {
  std::vector<ClientDataset> parts;
  parts.reserve(series.size());
  for (const auto &s: series)
    parts.push_back(build_designs(s, p));
  return concatenate(parts);
}

std::vector<ClientDataset> partition(const Mat &x_t, const Mat &x_lag, int k) {
  if (k <= 0)
    throw ArgumentError("partition: K must be positive");
  if (x_t.rows() != x_lag.rows())
    throw DimensionError("partition: X_t and X_lag row counts differ");
  const auto n = x_t.rows();
  if (n < k)
    throw ArgumentError("partition: fewer rows than clients");
  const auto base = n / k, extra = n % k;
  std::vector<ClientDataset> out;
  out.reserve(k);
  Eigen::Index start = 0;
  for (int c = 0; c < k; ++c) {
    const auto rows = base + (c < extra ? 1 : 0);
    out.push_back({ x_t.middleRows(start, rows), x_lag.middleRows(start, rows) });
    start += rows;
  }
  return out;
}

ClientDataset concatenate(const std::vector<ClientDataset> &clients) {
  if (clients.empty())
    throw ArgumentError("concatenate: no datasets");
  Eigen::Index rows = 0;
  for (const auto &c: clients) {
    if (c.x_t.cols() != clients.front().x_t.cols()
        || c.x_lag.cols() != clients.front().x_lag.cols())
      throw DimensionError("concatenate: datasets disagree on d or p");
    rows += c.x_t.rows();
  }
  ClientDataset out;
  out.x_t.resize(rows, clients.front().x_t.cols());
  out.x_lag.resize(rows, clients.front().x_lag.cols());
  Eigen::Index start = 0;
  for (const auto &c: clients) {
    out.x_t.middleRows(start, c.x_t.rows()) = c.x_t;
    out.x_lag.middleRows(start, c.x_t.rows()) = c.x_lag;
    start += c.x_t.rows();
  }
  return out;
}

ClientDataset gen_dataset(const WeightedDbn &truth, int n, int realization_len,
                          double noise_std, std::uint64_t seed, bool burn_in) {
  if (n <= 0)
    throw ArgumentError("gen_dataset: n must be positive");
  const int p = truth.p;
  if (realization_len <= 0)
    realization_len = p + 1;
  if (realization_len < p + 1)
    throw ArgumentError("gen_dataset: realization length must exceed p");
  const int per = realization_len - p;
  const int m = (n + per - 1) / per;
  const auto sim =
      simulate_svar(truth, realization_len - 1, m, noise_std, seed, burn_in);
  ClientDataset all = build_designs(sim.series, p);
  return { all.x_t.topRows(n), all.x_lag.topRows(n) };
}

void write_series_csv(std::ostream &os, const std::vector<Mat> &series) {
  const auto d = series.empty() ? 0 : series.front().cols();
  os << "realization,t";
  for (Eigen::Index j = 0; j < d; ++j)
    os << ",v" << j;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < series.size(); ++r) {
    if (series[r].cols() != d)
      throw DimensionError("write_series_csv: realizations disagree on d");
    for (Eigen::Index t = 0; t < series[r].rows(); ++t) {
      os << r << ',' << t;
      for (Eigen::Index j = 0; j < d; ++j)
        os << ',' << series[r](t, j);
      os << '\n';
    }
  }
}

std::vector<Mat> read_series_csv(std::istream &is) {
  std::string line;
  if (!std::getline(is, line))
    throw IngestError("series CSV: empty input", 1);
  if (!line.empty() && line.back() == '\r')
    line.pop_back();
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "realization" || header[1] != "t")
    throw IngestError("series CSV: header must be realization,t,v0,...", 1);
  const std::size_t d = header.size() - 2;
  for (std::size_t j = 0; j < d; ++j)
    if (header[j + 2] != "v" + std::to_string(j))
      throw IngestError("series CSV: expected column v" + std::to_string(j)
                            + ", found '" + header[j + 2] + "'",
                        1);

  std::vector<Mat> out;
  std::vector<std::vector<double>> current;
  std::set<long> seen;
  long realization = -1, last_t = -1;
  std::size_t lineno = 1;

  auto flush = [&] {
    if (current.empty())
      return;
    Mat m(static_cast<Eigen::Index>(current.size()),
          static_cast<Eigen::Index>(d));
    for (std::size_t t = 0; t < current.size(); ++t)
      for (std::size_t j = 0; j < d; ++j)
        m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) =
            current[t][j];
    out.push_back(std::move(m));
    current.clear();
  };

  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const auto cells = split_csv(line);
    if (cells.size() != d + 2)
      throw IngestError("series CSV: expected " + std::to_string(d + 2)
                            + " fields, found " + std::to_string(cells.size()),
                        lineno);
    const long r = parse_int(cells[0], lineno, "realization");
    const long t = parse_int(cells[1], lineno, "time index");
    if (r != realization) {
      if (!seen.insert(r).second)
        throw IngestError("series CSV: realization " + std::to_string(r)
                              + " is not contiguous",
                          lineno);
      if (t != 0)
        throw IngestError("series CSV: realization " + std::to_string(r)
                              + " does not start at t = 0",
                          lineno);
      flush();
      realization = r;
    } else if (t != last_t + 1) {
      throw IngestError("series CSV: expected t = " + std::to_string(last_t + 1)
                            + ", found " + std::to_string(t),
                        lineno);
    }
    last_t = t;
    std::vector<double> row(d);
    for (std::size_t j = 0; j < d; ++j)
      row[j] = parse_double(cells[j + 2], lineno);
    current.push_back(std::move(row));
  }
  flush();
  if (out.empty())
    throw IngestError("series CSV: no data rows", lineno);
  return out;
}

}  // namespace fdbn
