//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/dbn.h"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "fdbn/errors.h"

namespace fdbn {

WeightedDbn::WeightedDbn(Mat w_, Mat a_): w(std::move(w_)), a(std::move(a_)) {
  if (w.rows() != w.cols())
    throw DimensionError("WeightedDbn: W must be square");
  d = static_cast<int>(w.rows());
  if (a.cols() != d || (d > 0 && a.rows() % d != 0))
    throw DimensionError("WeightedDbn: A must be (p*d) x d");
  p = d == 0 ? 0 : static_cast<int>(a.rows() / d);
}

WeightedDbn WeightedDbn::zeros(int d, int p) {
  if (d < 0 || p < 0)
    throw ArgumentError("WeightedDbn::zeros: negative dimension");
  return WeightedDbn(Mat::Zero(d, d), Mat::Zero(p * d, d));
}

Mat stack_lags(const std::vector<Mat> &blocks) {
  if (blocks.empty())
    throw ArgumentError("stack_lags: no lag blocks");
  const auto d = blocks.front().rows();
  Mat a(d * static_cast<Eigen::Index>(blocks.size()), d);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].rows() != d || blocks[i].cols() != d)
      throw DimensionError("stack_lags: lag blocks must all be d x d");
    a.middleRows(static_cast<Eigen::Index>(i) * d, d) = blocks[i];
  }
  return a;
}

Mat lag_block(const WeightedDbn &dbn, int lag) {
  if (lag < 1 || lag > dbn.p)
    throw ArgumentError("lag_block: lag " + std::to_string(lag)
                        + " outside 1.." + std::to_string(dbn.p));
  return dbn.a.middleRows(static_cast<Eigen::Index>(lag - 1) * dbn.d, dbn.d);
}

BinaryDbn threshold(const WeightedDbn &dbn, double tau_w, double tau_a) {
  if (!(tau_w >= 0) || !(tau_a >= 0))
    throw ArgumentError("threshold: thresholds must be nonnegative");
  BinaryDbn out { dbn.d, dbn.p, {}, {} };
  for (int i = 0; i < dbn.d; ++i)
    for (int j = 0; j < dbn.d; ++j)
      if (i != j && std::abs(dbn.w(i, j)) > tau_w)
        out.w_edges.insert({ i, j });
  for (int lag = 1; lag <= dbn.p; ++lag)
    for (int i = 0; i < dbn.d; ++i)
      for (int j = 0; j < dbn.d; ++j)
        if (std::abs(dbn.a((lag - 1) * dbn.d + i, j)) > tau_a)
          out.a_edges.insert({ lag, i, j });
  return out;
}

BinaryDbn support(const WeightedDbn &dbn) {
  return threshold(dbn, 0.0, 0.0);
}

bool is_acyclic(const BinaryDbn &graph) {
  std::vector<int> indegree(graph.d, 0);
  std::vector<std::vector<int>> children(graph.d);
  for (const auto &e: graph.w_edges) {
    if (e.from == e.to)
      return false;
    children[e.from].push_back(e.to);
    ++indegree[e.to];
  }
  std::queue<int> ready;
  for (int v = 0; v < graph.d; ++v)
    if (indegree[v] == 0)
      ready.push(v);
  int visited = 0;
  while (!ready.empty()) {
    const int v = ready.front();
    ready.pop();
    ++visited;
    for (int c: children[v])
      if (--indegree[c] == 0)
        ready.push(c);
  }
  return visited == graph.d;
}

Mat zero_diagonal(Mat w) {
  w.diagonal().setZero();
  return w;
}

void write_matrix_csv(std::ostream &os, const Mat &m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    os << (j ? "," : "") << 'j' << j;
  os << '\n';
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
}

Mat read_matrix_csv(std::istream &is) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(is, line))
    throw IngestError("matrix CSV: missing header", 1);
  const auto cols = static_cast<Eigen::Index>(
      std::count(line.begin(), line.end(), ',') + (line.empty() ? 0 : 1));

  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r")
      continue;
    std::stringstream ss(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception &) {
        throw IngestError("matrix CSV: bad number '" + cell + "'", lineno);
      }
      ++count;
    }
    if (count != cols)
      throw IngestError("matrix CSV: expected " + std::to_string(cols)
                            + " fields, found " + std::to_string(count),
                        lineno);
    ++rows;
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return m;
}

namespace {
  nlohmann::json matrix_to_json(const Mat &m) {
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        row.push_back(m(i, j));
      rows.push_back(std::move(row));
    }
    return rows;
  }

  Mat matrix_from_json(const nlohmann::json &j, Eigen::Index rows,
                       Eigen::Index cols, const char *name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
      throw DimensionError(std::string("dbn JSON: ") + name
                           + " has wrong row count");
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto &row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        throw DimensionError(std::string("dbn JSON: ") + name
                             + " has wrong column count");
      for (Eigen::Index c = 0; c < cols; ++c)
        m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
  }
}  // namespace

std::string to_json(const WeightedDbn &dbn) {
  nlohmann::json j;
  j["d"] = dbn.d;
  j["p"] = dbn.p;
  j["W"] = matrix_to_json(dbn.w);
  j["A"] = matrix_to_json(dbn.a);
  return j.dump();
}

WeightedDbn dbn_from_json(const std::string &text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw IngestError(std::string("dbn JSON: ") + e.what(), 0);
  }
  try {
    const int d = j.at("d").get<int>();
    const int p = j.at("p").get<int>();
    if (d < 0 || p < 0)
      throw ArgumentError("dbn JSON: negative dimension");
    return WeightedDbn(matrix_from_json(j.at("W"), d, d, "W"),
                       matrix_from_json(j.at("A"), p * d, d, "A"));
  } catch (const nlohmann::json::exception &e) {
    throw IngestError(std::string("dbn JSON: ") + e.what(), 0);
  }
}

void save_dbn(const WeightedDbn &dbn, const std::filesystem::path &dir,
              const std::string &stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / (stem + "_W.csv"));
    write_matrix_csv(os, dbn.w);
  }
  {
    std::ofstream os(dir / (stem + "_A.csv"));
    write_matrix_csv(os, dbn.a);
  }
  std::ofstream os(dir / (stem + ".json"));
  os << to_json(dbn) << '\n';
  if (!os)
    throw std::runtime_error("save_dbn: failed writing " + dir.string());
}

WeightedDbn load_dbn_json(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IngestError("cannot open " + path.string(), 0);
  std::stringstream ss;
  ss << is.rdbuf();
  return dbn_from_json(ss.str());
}

}  // namespace fdbn
