//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: generate, fit, experiment, evaluate.
//

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fdbn/baselines.h"
#include "fdbn/datagen.h"
#include "fdbn/dbn.h"
#include "fdbn/errors.h"
#include "fdbn/experiment.h"
#include "fdbn/fdbnl.h"
#include "fdbn/log.h"
#include "fdbn/metrics.h"
#include "fdbn/parallel.h"
#include "fdbn/pfdbnl.h"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
};

void add_common(CLI::App *cmd, CommonOptions &common) {
  cmd->add_option("--seed", common.seed, "Master seed");
  cmd->add_option("--out-dir", common.out_dir, "Output directory");
  cmd->add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  os << text;
}

void write_series(const fs::path &path, const std::vector<fdbn::Mat> &series) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  fdbn::write_series_csv(os, series);
}

// DREAM4-style edge list over the combined intra and lag support.
void write_gold(const fs::path &path, const fdbn::WeightedDbn &truth) {
  const fdbn::Mat scores = fdbn::combined_scores(truth);
  std::ofstream os(path, std::ios::binary);
  for (int i = 0; i < truth.d; ++i)
    for (int j = 0; j < truth.d; ++j)
      if (i != j)
        os << 'G' << i + 1 << "\tG" << j + 1 << '\t'
           << (scores(i, j) != 0 ? 1 : 0) << '\n';
}

// One file: realizations grouped by `clients`. Several files: one client
// per file.
std::vector<fdbn::ClientDataset>
load_clients(const std::vector<std::string> &series, int p,
             const std::string &clients) {
  if (series.size() == 1)
    return fdbn::ingest_timeseries(series.front(), p, clients);
  std::vector<fdbn::ClientDataset> out;
  for (const auto &path: series) {
    std::ifstream is(path);
    if (!is)
      throw fdbn::IngestError("cannot open series '" + path + "'", 0);
    out.push_back(fdbn::build_designs(fdbn::read_series_csv(is), p));
  }
  return out;
}

// ---- generate ----

struct GenerateOptions {
  fdbn::GenConfig gen;
  int n = 500;
  int k = 1;
  bool hetero = false;
  int realization_len = 0;
};

int run_generate(const GenerateOptions &o, const CommonOptions &common) {
  fdbn::GenConfig gen = o.gen;
  gen.seed = common.seed;
  gen.validate();
  if (o.n < 1 || o.k < 1)
    throw fdbn::ArgumentError("generate: --n and --k must be positive");
  const fs::path dir = common.out_dir;
  fs::create_directories(dir);

  const int len = o.realization_len > 0 ? o.realization_len : gen.p + 1;
  if (len < gen.p + 1)
    throw fdbn::ArgumentError("generate: realization length must exceed p");
  const int per = len - gen.p;
  const std::uint64_t data_seed = fdbn::derive_seed(common.seed, 99);

  ordered_json summary { { "d", gen.d }, { "p", gen.p }, { "seed", common.seed },
                         { "realization_len", len }, { "files", ordered_json::array() } };
  auto emit = [&](const fdbn::WeightedDbn &truth, const std::string &suffix,
                  int rows, std::uint64_t seed) {
    const int m = (rows + per - 1) / per;
    const auto sim =
        fdbn::simulate_svar(truth, len - 1, m, gen.noise_std, seed, gen.burn_in);
    fdbn::save_dbn(truth, dir, "truth" + suffix);
    write_series(dir / ("series" + suffix + ".csv"), sim.series);
    write_gold(dir / ("gold" + suffix + ".tsv"), truth);
    summary["files"].push_back("series" + suffix + ".csv");
  };

  if (o.hetero) {
    const auto truths = fdbn::gen_hetero_truths(gen, o.k);
    for (int c = 0; c < o.k; ++c)
      emit(truths[c], "_c" + std::to_string(c), o.n,
           fdbn::derive_seed(data_seed, c));
    summary["clients"] = o.k;
    summary["rows_per_client"] = o.n;
  } else {
    emit(fdbn::gen_truth(gen), "", o.n, data_seed);
    summary["rows"] = o.n;
    summary["rows_per_realization"] = per;
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---- fit ----

struct FitOptions {
  std::string method = "fdbnl";
  std::vector<std::string> series;
  std::string clients = "round-robin:1";
  int p = 1;
  std::string truth;
  std::vector<std::string> truths;
  fdbn::PfdbnlConfig pfdbnl;
  fdbn::FdbnlConfig fdbnl;
  fdbn::DynotearsConfig dynotears;
  double lambda = -1;
  double tau_w = 0.3;
  double tau_a = 0.3;
};

int run_fit(FitOptions o, const CommonOptions &common) {
  const auto method = fdbn::parse_method(o.method);
  const auto clients = load_clients(o.series, o.p, o.clients);
  const fs::path dir = common.out_dir;
  fs::create_directories(dir);
  fdbn::ThreadPool pool(common.threads);
  // ADMM options are parsed into o.fdbnl; pfdbnl keeps its own lambdas.
  const double pf_lambda_w = o.pfdbnl.lambda_w, pf_lambda_a = o.pfdbnl.lambda_a;
  static_cast<fdbn::FdbnlConfig &>(o.pfdbnl) = o.fdbnl;
  o.pfdbnl.lambda_w = pf_lambda_w;
  o.pfdbnl.lambda_a = pf_lambda_a;
  if (o.lambda >= 0) {
    o.fdbnl.lambda_w = o.fdbnl.lambda_a = o.lambda;
    o.pfdbnl.lambda_w = o.pfdbnl.lambda_a = o.lambda;
    o.dynotears.lambda_w = o.dynotears.lambda_a = o.lambda;
  }

  std::vector<fdbn::WeightedDbn> truths;
  if (!o.truth.empty())
    truths.assign(clients.size(), fdbn::load_dbn_json(o.truth));
  if (!o.truths.empty()) {
    if (o.truths.size() != clients.size())
      throw fdbn::ArgumentError("fit: --truths needs one file per client");
    for (const auto &t: o.truths)
      truths.push_back(fdbn::load_dbn_json(t));
  }

  ordered_json summary { { "method", o.method },
                         { "clients", clients.size() } };
  std::vector<fdbn::WeightedDbn> models;  // one per client, for evaluation
  switch (method) {
    case fdbn::Method::kFdbnl: {
      auto r = fdbn::run_fdbnl(clients, o.fdbnl, &pool);
      fdbn::save_dbn(r.dbn, dir, "model");
      fdbn::emit_trace(r.trace, dir / "trace.csv");
      summary["converged"] = r.converged;
      summary["rounds"] = r.rounds;
      summary["h"] = r.h;
      summary["max_primal_W"] = r.max_primal_w;
      summary["max_primal_A"] = r.max_primal_a;
      models.assign(clients.size(), r.dbn);
      break;
    }
    case fdbn::Method::kPfdbnl: {
      auto r = fdbn::run_pfdbnl(clients, o.pfdbnl, common.seed, &pool);
      fdbn::save_dbn(r.global, dir, "model");
      for (std::size_t c = 0; c < r.personal.size(); ++c)
        fdbn::save_dbn(r.personal[c], dir, "model_c" + std::to_string(c));
      fdbn::emit_trace(r.trace, dir / "trace.csv");
      summary["converged"] = r.converged;
      summary["rounds"] = r.rounds;
      summary["mean_h_personal"] = r.mean_h_personal;
      models = r.personal;
      break;
    }
    case fdbn::Method::kAve: {
      auto fits = fdbn::fit_clients(clients, o.dynotears, &pool);
      auto r = fdbn::ave_baseline(fits, o.tau_w, o.tau_a);
      fdbn::save_dbn(r.averaged, dir, "model");
      models.assign(clients.size(), r.averaged);
      break;
    }
    case fdbn::Method::kBest: {
      if (truths.empty())
        throw fdbn::ArgumentError("fit: best needs --truth");
      auto fits = fdbn::fit_clients(clients, o.dynotears, &pool);
      auto r = fdbn::best_baseline(
          fits, fdbn::threshold(truths.front(), o.tau_w, o.tau_a), o.tau_w,
          o.tau_a);
      fdbn::save_dbn(fits[r.client], dir, "model");
      summary["best_client"] = r.client;
      models.assign(clients.size(), fits[r.client]);
      break;
    }
    case fdbn::Method::kAlldata: {
      auto r = fdbn::alldata_baseline(clients, o.dynotears);
      fdbn::save_dbn(r.dbn, dir, "model");
      summary["converged"] = r.converged;
      summary["h"] = r.h;
      models.assign(clients.size(), r.dbn);
      break;
    }
  }

  if (!truths.empty()) {
    std::vector<fdbn::MetricsReport> reports;
    for (std::size_t c = 0; c < models.size(); ++c)
      reports.push_back(fdbn::evaluate(
          fdbn::threshold(models[c], o.tau_w, o.tau_a),
          fdbn::threshold(truths[c], o.tau_w, o.tau_a)));
    const auto m = fdbn::mean_metrics(reports);
    summary["metrics"] = {
      { "W", { { "shd", m.shd_w }, { "tpr", m.tpr_w }, { "fdr", m.fdr_w } } },
      { "A", { { "shd", m.shd_a }, { "tpr", m.tpr_a }, { "fdr", m.fdr_a } } },
    };
  }
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump(2) << '\n';
  return 0;
}

// ---- experiment ----

struct ExperimentOptions {
  std::string scenario = "single_run";
  std::string config;
  std::vector<std::string> overrides;
  bool timing = false;
  bool traces = false;
  std::optional<std::uint64_t> seed;
};

int run_experiment_cmd(const ExperimentOptions &o, const CommonOptions &common) {
  auto spec = fdbn::default_spec(fdbn::parse_scenario(o.scenario));
  std::map<std::string, std::string> kv;
  if (!o.config.empty()) {
    kv = fdbn::parse_config(fs::path(o.config));
    if (auto it = kv.find("scenario"); it != kv.end()
        && fdbn::parse_scenario(it->second) != spec.scenario)
      spec = fdbn::default_spec(fdbn::parse_scenario(it->second));
  }
  for (const auto &item: o.overrides) {
    std::istringstream line(item);
    for (auto &[k, v]: fdbn::parse_config(line))
      kv[k] = v;
  }
  fdbn::apply_config(spec, kv);
  if (o.timing)
    spec.timing = true;
  if (o.seed) {
    // --seed shifts the seed list to start at the given value.
    const auto count = spec.seeds.size();
    spec.seeds.clear();
    for (std::size_t i = 0; i < count; ++i)
      spec.seeds.push_back(*o.seed + i);
  }

  const fs::path dir = common.out_dir;
  fs::create_directories(dir);
  fdbn::ThreadPool pool(common.threads);
  fdbn::RunObserver observer;
  if (o.traces)
    observer = [&](const fdbn::RunContext &ctx, const fdbn::MethodRun &run) {
      const std::string stem = "trace_" + fdbn::to_string(run.method) + "_s"
                               + std::to_string(ctx.seed) + "_d"
                               + std::to_string(ctx.d) + "_K"
                               + std::to_string(ctx.k) + "_j"
                               + std::to_string(ctx.j) + ".csv";
      if (!run.fdbnl_trace.empty())
        fdbn::emit_trace(run.fdbnl_trace, dir / stem);
      else if (!run.pfdbnl_trace.empty())
        fdbn::emit_trace(run.pfdbnl_trace, dir / stem);
    };
  const auto rows = fdbn::run_experiment(spec, &pool, observer);
  fdbn::emit_results(rows, dir / "results.csv");
  int errors = 0;
  for (const auto &r: rows)
    errors += !r.error.empty();
  std::cout << ordered_json { { "scenario", o.scenario },
                              { "rows", rows.size() },
                              { "error_rows", errors },
                              { "results", (dir / "results.csv").string() } }
                   .dump(2)
            << '\n';
  return 0;
}

// ---- evaluate ----

struct EvaluateOptions {
  std::string gold;
  std::string model;
  std::vector<std::string> series;
  std::string clients = "round-robin:1";
  int p = 1;
  std::string method = "fdbnl";
  double lambda = -1;
  fdbn::FdbnlConfig fdbnl;
  bool keep_diagonal = false;
};

int run_evaluate(const EvaluateOptions &o, const CommonOptions &common) {
  std::vector<fdbn::WeightedDbn> models;
  if (!o.model.empty()) {
    models.push_back(fdbn::load_dbn_json(o.model));
  } else {
    if (o.series.empty())
      throw fdbn::ArgumentError("evaluate: give --model or --series");
    const auto clients = load_clients(o.series, o.p, o.clients);
    fdbn::ThreadPool pool(common.threads);
    const auto method = fdbn::parse_method(o.method);
    if (method == fdbn::Method::kFdbnl) {
      auto cfg = o.fdbnl;
      if (o.lambda >= 0)
        cfg.lambda_w = cfg.lambda_a = o.lambda;
      models.push_back(fdbn::run_fdbnl(clients, cfg, &pool).dbn);
    } else if (method == fdbn::Method::kPfdbnl) {
      fdbn::PfdbnlConfig cfg;
      if (o.lambda >= 0)
        cfg.lambda_w = cfg.lambda_a = o.lambda;
      models = fdbn::run_pfdbnl(clients, cfg, common.seed, &pool).personal;
    } else {
      throw fdbn::ArgumentError("evaluate: method must be fdbnl or pfdbnl");
    }
  }
  const int d = models.front().d;
  const fdbn::Mat gold = fdbn::read_gold_standard(fs::path(o.gold), d);

  ordered_json out { { "gold", o.gold }, { "models", ordered_json::array() } };
  double auroc = 0, aupr = 0;
  for (const auto &m: models) {
    const auto r =
        fdbn::auroc_aupr(fdbn::combined_scores(m), gold, !o.keep_diagonal);
    out["models"].push_back({ { "auroc", r.auroc }, { "aupr", r.aupr } });
    auroc += r.auroc;
    aupr += r.aupr;
  }
  out["mean_auroc"] = auroc / models.size();
  out["mean_aupr"] = aupr / models.size();
  const fs::path dir = common.out_dir;
  fs::create_directories(dir);
  write_file(dir / "evaluation.json", out.dump(2) + "\n");
  std::cout << out.dump(2) << '\n';
  return 0;
}

std::string error_kind(const std::exception &e) {
  if (dynamic_cast<const fdbn::IngestError *>(&e))
    return "ingest_error";
  if (dynamic_cast<const fdbn::DimensionError *>(&e))
    return "dimension_error";
  if (dynamic_cast<const fdbn::ArgumentError *>(&e))
    return "argument_error";
  if (dynamic_cast<const fdbn::NumericError *>(&e))
    return "numeric_error";
  if (dynamic_cast<const fdbn::MetricError *>(&e))
    return "metric_error";
  return "error";
}

void report_error(const std::string &kind, const std::string &message) {
  std::cerr << ordered_json { { "error", { { "kind", kind },
                                           { "message", message } } } }
                   .dump()
            << '\n';
}

void add_admm_options(CLI::App *cmd, fdbn::FdbnlConfig &cfg) {
  cmd->add_option("--rho1", cfg.rho1_0, "Initial rho1");
  cmd->add_option("--rho2", cfg.rho2_0, "Initial rho2");
  cmd->add_option("--phi1", cfg.phi1, "rho1 growth factor");
  cmd->add_option("--phi2", cfg.phi2, "rho2 growth factor");
  cmd->add_option("--max-rounds", cfg.max_rounds, "ADMM round cap");
  cmd->add_flag("--closed-form-a", cfg.closed_form_a,
                "Soft-threshold closed form for the global A block");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app { "Federated dynamic Bayesian network structure learning" };
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages on stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  CommonOptions common;

  GenerateOptions gen;
  auto *generate = app.add_subcommand("generate", "Simulate a DBN and series");
  add_common(generate, common);
  generate->add_option("--d", gen.gen.d, "Variables");
  generate->add_option("--p", gen.gen.p, "Autoregressive order");
  generate->add_option("--n", gen.n, "Design rows (per client with --hetero)");
  generate->add_option("--k", gen.k, "Clients (with --hetero)");
  generate->add_flag("--hetero", gen.hetero, "One truth and series per client");
  generate->add_option("--realization-len", gen.realization_len,
                       "Rows per realization (default p + 1)");
  generate->add_option("--intra-degree", gen.gen.intra_mean_degree,
                       "Intra-slice mean degree");
  generate->add_option("--inter-degree", gen.gen.inter_mean_out_degree,
                       "Mean out-degree per lag");
  generate->add_option("--eta", gen.gen.eta, "Lag decay base");
  generate->add_option("--noise-std", gen.gen.noise_std, "Noise scale");
  generate->add_flag("--burn-in", gen.gen.burn_in, "Drop 100 warm-up steps");

  FitOptions fit;
  auto *fitcmd = app.add_subcommand("fit", "Learn a DBN from series CSV files");
  add_common(fitcmd, common);
  fitcmd->add_option("--method", fit.method, "fdbnl|pfdbnl|ave|best|alldata");
  fitcmd->add_option("--series", fit.series, "Series CSV (repeat: one per client)")
      ->required();
  fitcmd->add_option("--clients", fit.clients,
                     "per-client:R | round-robin:K | comma list of ids");
  fitcmd->add_option("--p", fit.p, "Autoregressive order");
  fitcmd->add_option("--truth", fit.truth, "Truth JSON for metrics (and best)");
  fitcmd->add_option("--truths", fit.truths, "Per-client truth JSON files");
  fitcmd->add_option("--lambda", fit.lambda, "Sets lambda_w = lambda_a");
  fitcmd->add_option("--mu", fit.pfdbnl.mu, "Proximal weight (pfdbnl)");
  fitcmd->add_option("--participants", fit.pfdbnl.participants,
                     "Clients per round (pfdbnl; 0 = all)");
  fitcmd->add_option("--tau-w", fit.tau_w, "Threshold for W");
  fitcmd->add_option("--tau-a", fit.tau_a, "Threshold for A");
  add_admm_options(fitcmd, fit.fdbnl);

  ExperimentOptions exp;
  CommonOptions exp_common;
  std::uint64_t exp_seed = 0;
  auto *expcmd = app.add_subcommand("experiment", "Run a scenario grid");
  expcmd->add_option("--scenario", exp.scenario,
                     "vary_d|vary_k|hetero_vary_d|hetero_vary_k|"
                     "partial_participation|single_run");
  expcmd->add_option("--config", exp.config, "key = value file");
  expcmd->add_option("--set", exp.overrides, "key=value override (repeatable)");
  expcmd->add_flag("--timing", exp.timing, "Record runtime_ms");
  expcmd->add_flag("--traces", exp.traces, "Write one trace CSV per run");
  auto *seed_opt = expcmd->add_option("--seed", exp_seed, "First seed");
  expcmd->add_option("--out-dir", exp_common.out_dir, "Output directory");
  expcmd->add_option("--threads", exp_common.threads, "Worker threads")
      ->check(CLI::PositiveNumber);

  EvaluateOptions ev;
  auto *evalcmd = app.add_subcommand(
      "evaluate", "AUROC/AUPR of combined scores against a gold standard");
  add_common(evalcmd, common);
  evalcmd->add_option("--gold", ev.gold, "Edge list or matrix CSV")->required();
  evalcmd->add_option("--model", ev.model, "Model JSON (skips fitting)");
  evalcmd->add_option("--series", ev.series, "Series CSV (repeat: one per client)");
  evalcmd->add_option("--clients", ev.clients,
                      "per-client:R | round-robin:K | comma list of ids");
  evalcmd->add_option("--p", ev.p, "Autoregressive order");
  evalcmd->add_option("--method", ev.method, "fdbnl|pfdbnl");
  evalcmd->add_option("--lambda", ev.lambda, "Sets lambda_w = lambda_a");
  evalcmd->add_flag("--keep-diagonal", ev.keep_diagonal,
                    "Score self-edges too");
  add_admm_options(evalcmd, ev.fdbnl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    report_error("usage_error", e.what());
    return 2;
  }

  fdbn::set_log_level(quiet     ? fdbn::LogLevel::kQuiet
                      : verbose ? fdbn::LogLevel::kInfo
                                : fdbn::LogLevel::kWarning);
  try {
    if (generate->parsed())
      return run_generate(gen, common);
    if (fitcmd->parsed())
      return run_fit(fit, common);
    if (expcmd->parsed()) {
      if (seed_opt->count() > 0)
        exp.seed = exp_seed;
      return run_experiment_cmd(exp, exp_common);
    }
    if (evalcmd->parsed())
      return run_evaluate(ev, common);
  } catch (const std::exception &e) {
    report_error(error_kind(e), e.what());
    return 1;
  }
  return 0;
}
