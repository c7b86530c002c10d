//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef FDBN_EXPERIMENT_H_
#define FDBN_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "fdbn/baselines.h"
#include "fdbn/datagen.h"
#include "fdbn/fdbnl.h"
#include "fdbn/pfdbnl.h"

namespace fdbn {

enum class Scenario {
  kVaryD,
  kVaryK,
  kHeteroVaryD,
  kHeteroVaryK,
  kPartialParticipation,
  kSingleRun,
};

enum class Method { kFdbnl, kPfdbnl, kAve, kBest, kAlldata };

// Intra-slice mean degree used for a grid point.
enum class Connectivity {
  kFixed,  // GenConfig::intra_mean_degree
  kLow,    // floor(d/2) - d/5
  kHigh,   // d - d/5
};

std::string to_string(Scenario s);
std::string to_string(Method m);
std::string to_string(Connectivity c);
Scenario parse_scenario(const std::string &s);
Method parse_method(const std::string &s);
Connectivity parse_connectivity(const std::string &s);

bool is_heterogeneous(Scenario s);

struct ExperimentSpec {
  Scenario scenario = Scenario::kSingleRun;
  std::vector<Method> methods { Method::kFdbnl };
  GenConfig gen;  // gen.d and gen.seed are overridden per grid point
  Connectivity connectivity = Connectivity::kFixed;
  FdbnlConfig fdbnl;
  PfdbnlConfig pfdbnl;
  DynotearsConfig dynotears;
  // Lambda 0.1 for d <= 10 and 0.01 above, for fdbnl and pfdbnl alike.
  bool hetero_lambda_rule = false;
  std::vector<std::uint64_t> seeds { 0 };
  std::vector<int> d_values;   // empty: gen.d
  std::vector<int> k_values;   // empty: k
  std::vector<int> j_values;   // empty: pfdbnl.participants
  int k = 10;
  int n = 0;             // homogeneous total rows; 0 applies the 5d/6d rule
  int n_per_client = 0;  // heterogeneous rows per client; 0 means K * d
  int realization_len = 0;
  double tau_w = 0.3;
  double tau_a = 0.3;
  bool timing = false;   // runtime_ms stays 0 unless set

  /// Throws ArgumentError on an empty seed list or method set, a grid
  /// value out of range (d < 2, K < 1, j < 0 or j > K) or an invalid
  /// nested config.
  void validate() const;
};

/// Per-scenario defaults for the published grids.
ExperimentSpec default_spec(Scenario s);

/// `key = value` lines; `#` starts a comment. Throws ArgumentError naming
/// the line for malformed lines or duplicate keys.
std::map<std::string, std::string> parse_config(std::istream &is);
std::map<std::string, std::string>
parse_config(const std::filesystem::path &path);

/// Applies keys on top of `spec`. Unknown keys and bad values throw
/// ArgumentError. `scenario` is ignored here; pick the base with
/// default_spec first.
void apply_config(ExperimentSpec &spec,
                  const std::map<std::string, std::string> &kv);

std::vector<std::string> config_keys();

struct ResultRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int d = 0;
  int p = 0;
  int k = 0;
  int j = 0;
  std::string method;
  std::string matrix;  // "W" or "A"
  double shd = 0;      // client means in the heterogeneous scenarios
  double tpr = 0;
  double fdr = 0;
  double runtime_ms = 0;
  std::string error;   // nonempty on error rows; metrics are NaN there
};

struct RunContext {
  Scenario scenario;
  std::uint64_t seed;
  int d, p, k, j;
};

// Everything a method produced for one grid point.
struct MethodRun {
  Method method;
  WeightedDbn global;                 // unused for pfdbnl-only consumers
  std::vector<WeightedDbn> personal;  // pfdbnl
  std::vector<BinaryDbn> predicted;   // one per client
  std::vector<BinaryDbn> truths;      // one per client
  std::vector<FdbnlTraceRow> fdbnl_trace;
  std::vector<PfdbnlTraceRow> pfdbnl_trace;
  bool converged = true;
  int rounds = 0;
  double h = 0;             // fdbnl: h(W); pfdbnl: mean h(W_k)
  double max_primal_w = 0;
  double max_primal_a = 0;
};

using RunObserver = std::function<void(const RunContext &, const MethodRun &)>;

/// Every seed x grid point x method. A throwing method yields two error
/// rows and the run continues. Results do not depend on the pool size.
std::vector<ResultRow> run_experiment(const ExperimentSpec &spec,
                                      ThreadPool *pool = nullptr,
                                      const RunObserver &observer = {});

/// Realizations grouped into clients. `clients_spec` is
/// `per-client:R` (R consecutive realizations per client),
/// `round-robin:K`, or a comma list giving each realization's client id.
std::vector<ClientDataset> group_clients(const std::vector<Mat> &series,
                                         int p,
                                         const std::string &clients_spec);
std::vector<ClientDataset> ingest_timeseries(const std::filesystem::path &path,
                                             int p,
                                             const std::string &clients_spec);

void write_results_csv(std::ostream &os, const std::vector<ResultRow> &rows);
void write_results_json(std::ostream &os, const std::vector<ResultRow> &rows);
/// Writes `path` as CSV and `path` with extension .json as the mirror.
void emit_results(const std::vector<ResultRow> &rows,
                  const std::filesystem::path &path);

void write_trace_csv(std::ostream &os, const std::vector<FdbnlTraceRow> &t);
void write_trace_csv(std::ostream &os, const std::vector<PfdbnlTraceRow> &t);
void emit_trace(const std::vector<FdbnlTraceRow> &trace,
                const std::filesystem::path &path);
void emit_trace(const std::vector<PfdbnlTraceRow> &trace,
                const std::filesystem::path &path);

}  // namespace fdbn

#endif  // FDBN_EXPERIMENT_H_
