//
// Project fdbn - Copyright 2026 The fdbn Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "fdbn/experiment.h"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

#include "fdbn/errors.h"
#include "fdbn/log.h"
#include "fdbn/metrics.h"
#include "fdbn/parallel.h"

namespace fdbn {

namespace {

  constexpr std::uint64_t kDataStream = 99;
  constexpr std::uint64_t kSamplerStream = 7;

  template <typename E>
  struct NamedValue {
    E value;
    const char *name;
  };

  constexpr NamedValue<Scenario> kScenarios[] = {
    { Scenario::kVaryD, "vary_d" },
    { Scenario::kVaryK, "vary_k" },
    { Scenario::kHeteroVaryD, "hetero_vary_d" },
    { Scenario::kHeteroVaryK, "hetero_vary_k" },
    { Scenario::kPartialParticipation, "partial_participation" },
    { Scenario::kSingleRun, "single_run" },
  };

  constexpr NamedValue<Method> kMethods[] = {
    { Method::kFdbnl, "fdbnl" },     { Method::kPfdbnl, "pfdbnl" },
    { Method::kAve, "ave" },         { Method::kBest, "best" },
    { Method::kAlldata, "alldata" },
  };

  constexpr NamedValue<Connectivity> kConnectivity[] = {
    { Connectivity::kFixed, "fixed" },
    { Connectivity::kLow, "low" },
    { Connectivity::kHigh, "high" },
  };

  template <typename E, std::size_t N>
  std::string name_of(const NamedValue<E> (&table)[N], E value) {
    for (const auto &entry: table)
      if (entry.value == value)
        return entry.name;
    throw ArgumentError("unknown enum value");
  }

  template <typename E, std::size_t N>
  E value_of(const NamedValue<E> (&table)[N], const std::string &name,
             const char *what) {
    for (const auto &entry: table)
      if (name == entry.name)
        return entry.value;
    std::string known;
    for (const auto &entry: table)
      known += (known.empty() ? "" : ", ") + std::string(entry.name);
    throw ArgumentError("unknown " + std::string(what) + " '" + name
                        + "' (expected one of: " + known + ")");
  }

  std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
      return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
      out.push_back(trim(item));
    return out;
  }

  template <typename T>
  T parse_number(const std::string &key, const std::string &s) {
    T value {};
    const auto *end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, value);
    if (ec != std::errc() || ptr != end || s.empty())
      throw ArgumentError("config key '" + key + "': bad value '" + s + "'");
    return value;
  }

  bool parse_bool(const std::string &key, const std::string &s) {
    if (s == "true" || s == "1" || s == "yes")
      return true;
    if (s == "false" || s == "0" || s == "no")
      return false;
    throw ArgumentError("config key '" + key + "': expected true or false, got '"
                        + s + "'");
  }

  template <typename T>
  std::vector<T> parse_list(const std::string &key, const std::string &s) {
    std::vector<T> out;
    for (const auto &item: split(s, ','))
      out.push_back(parse_number<T>(key, item));
    return out;
  }

  using Setter = std::function<void(ExperimentSpec &, const std::string &,
                                    const std::string &)>;

  void set_admm(FdbnlConfig &c, const std::string &field, const std::string &key,
                const std::string &v) {
    if (field == "lambda_w")
      c.lambda_w = parse_number<double>(key, v);
    else if (field == "lambda_a")
      c.lambda_a = parse_number<double>(key, v);
    else if (field == "rho1")
      c.rho1_0 = parse_number<double>(key, v);
    else if (field == "rho2")
      c.rho2_0 = parse_number<double>(key, v);
    else if (field == "phi1")
      c.phi1 = parse_number<double>(key, v);
    else if (field == "phi2")
      c.phi2 = parse_number<double>(key, v);
    else if (field == "max_rounds")
      c.max_rounds = parse_number<int>(key, v);
    else if (field == "h_tol")
      c.h_tol = parse_number<double>(key, v);
    else if (field == "primal_tol")
      c.primal_tol = parse_number<double>(key, v);
    else if (field == "rho_max")
      c.rho_max = parse_number<double>(key, v);
    else if (field == "closed_form_a")
      c.closed_form_a = parse_bool(key, v);
    else
      throw ArgumentError("unknown config key '" + key + "'");
  }

  const std::map<std::string, Setter> &setters() {
    static const std::map<std::string, Setter> table = [] {
      std::map<std::string, Setter> t;
      t["scenario"] = [](ExperimentSpec &, const std::string &,
                         const std::string &v) { parse_scenario(v); };
      t["methods"] = [](ExperimentSpec &s, const std::string &,
                        const std::string &v) {
        s.methods.clear();
        for (const auto &m: split(v, ','))
          s.methods.push_back(parse_method(m));
      };
      t["seeds"] = [](ExperimentSpec &s, const std::string &k,
                      const std::string &v) {
        s.seeds = parse_list<std::uint64_t>(k, v);
      };
      t["d"] = [](ExperimentSpec &s, const std::string &k, const std::string &v) {
        s.gen.d = parse_number<int>(k, v);
      };
      t["p"] = [](ExperimentSpec &s, const std::string &k, const std::string &v) {
        s.gen.p = parse_number<int>(k, v);
      };
      t["k"] = [](ExperimentSpec &s, const std::string &k, const std::string &v) {
        s.k = parse_number<int>(k, v);
      };
      t["n"] = [](ExperimentSpec &s, const std::string &k, const std::string &v) {
        s.n = parse_number<int>(k, v);
      };
      t["n_per_client"] = [](ExperimentSpec &s, const std::string &k,
                             const std::string &v) {
        s.n_per_client = parse_number<int>(k, v);
      };
      t["d_values"] = [](ExperimentSpec &s, const std::string &k,
                         const std::string &v) {
        s.d_values = parse_list<int>(k, v);
      };
      t["k_values"] = [](ExperimentSpec &s, const std::string &k,
                         const std::string &v) {
        s.k_values = parse_list<int>(k, v);
      };
      t["j_values"] = [](ExperimentSpec &s, const std::string &k,
                         const std::string &v) {
        s.j_values = parse_list<int>(k, v);
      };
      t["intra_degree"] = [](ExperimentSpec &s, const std::string &k,
                             const std::string &v) {
        s.gen.intra_mean_degree = parse_number<double>(k, v);
      };
      t["inter_degree"] = [](ExperimentSpec &s, const std::string &k,
                             const std::string &v) {
        s.gen.inter_mean_out_degree = parse_number<double>(k, v);
      };
      t["connectivity"] = [](ExperimentSpec &s, const std::string &,
                             const std::string &v) {
        s.connectivity = parse_connectivity(v);
      };
      t["eta"] = [](ExperimentSpec &s, const std::string &k,
                    const std::string &v) { s.gen.eta = parse_number<double>(k, v); };
      t["noise_std"] = [](ExperimentSpec &s, const std::string &k,
                          const std::string &v) {
        s.gen.noise_std = parse_number<double>(k, v);
      };
      t["burn_in"] = [](ExperimentSpec &s, const std::string &k,
                        const std::string &v) { s.gen.burn_in = parse_bool(k, v); };
      t["realization_len"] = [](ExperimentSpec &s, const std::string &k,
                                const std::string &v) {
        s.realization_len = parse_number<int>(k, v);
      };
      t["tau_w"] = [](ExperimentSpec &s, const std::string &k,
                      const std::string &v) { s.tau_w = parse_number<double>(k, v); };
      t["tau_a"] = [](ExperimentSpec &s, const std::string &k,
                      const std::string &v) { s.tau_a = parse_number<double>(k, v); };
      t["timing"] = [](ExperimentSpec &s, const std::string &k,
                       const std::string &v) { s.timing = parse_bool(k, v); };
      t["hetero_lambda_rule"] = [](ExperimentSpec &s, const std::string &k,
                                   const std::string &v) {
        s.hetero_lambda_rule = parse_bool(k, v);
      };
      for (const char *f: { "lambda_w", "lambda_a", "rho1", "rho2", "phi1",
                            "phi2", "max_rounds", "h_tol", "primal_tol",
                            "rho_max", "closed_form_a" }) {
        const std::string field = f;
        t["fdbnl." + field] = [field](ExperimentSpec &s, const std::string &k,
                                      const std::string &v) {
          set_admm(s.fdbnl, field, k, v);
        };
        t["pfdbnl." + field] = [field](ExperimentSpec &s, const std::string &k,
                                       const std::string &v) {
          set_admm(s.pfdbnl, field, k, v);
        };
      }
      t["pfdbnl.mu"] = [](ExperimentSpec &s, const std::string &k,
                          const std::string &v) {
        s.pfdbnl.mu = parse_number<double>(k, v);
      };
      t["pfdbnl.participants"] = [](ExperimentSpec &s, const std::string &k,
                                    const std::string &v) {
        s.pfdbnl.participants = parse_number<int>(k, v);
      };
      t["dynotears.lambda_w"] = [](ExperimentSpec &s, const std::string &k,
                                   const std::string &v) {
        s.dynotears.lambda_w = parse_number<double>(k, v);
      };
      t["dynotears.lambda_a"] = [](ExperimentSpec &s, const std::string &k,
                                   const std::string &v) {
        s.dynotears.lambda_a = parse_number<double>(k, v);
      };
      t["dynotears.max_outer"] = [](ExperimentSpec &s, const std::string &k,
                                    const std::string &v) {
        s.dynotears.max_outer = parse_number<int>(k, v);
      };
      t["dynotears.h_tol"] = [](ExperimentSpec &s, const std::string &k,
                                const std::string &v) {
        s.dynotears.h_tol = parse_number<double>(k, v);
      };
      auto inner = [](auto member) {
        return [member](ExperimentSpec &s, const std::string &k,
                        const std::string &v) {
          using T = std::remove_reference_t<decltype(s.fdbnl.inner.*member)>;
          const T value = parse_number<T>(k, v);
          s.fdbnl.inner.*member = value;
          s.pfdbnl.inner.*member = value;
          s.dynotears.inner.*member = value;
        };
      };
      t["inner.max_iter"] = inner(&BoundMinimizeConfig::max_iter);
      t["inner.grad_tol"] = inner(&BoundMinimizeConfig::grad_tol);
      t["inner.rel_ftol"] = inner(&BoundMinimizeConfig::rel_ftol);
      return t;
    }();
    return table;
  }

  int homogeneous_rows(const ExperimentSpec &spec, int d, int k) {
    if (spec.n > 0)
      return spec.n;
    return (5 * d) % k == 0 ? 5 * d : 6 * d;
  }

  int rows_per_client(const ExperimentSpec &spec, int d, int k) {
    if (spec.n_per_client > 0)
      return spec.n_per_client;
    if (spec.n > 0)
      return spec.n / k;
    return k * d;
  }

  double intra_degree(const ExperimentSpec &spec, int d) {
    switch (spec.connectivity) {
      case Connectivity::kLow:
        return std::floor(d / 2.0) - d / 5.0;
      case Connectivity::kHigh:
        return d - d / 5.0;
      case Connectivity::kFixed:
        break;
    }
    return spec.gen.intra_mean_degree;
  }

  struct GridPoint {
    int d, k, j;
  };

  std::vector<GridPoint> grid(const ExperimentSpec &spec) {
    const std::vector<int> ds =
        spec.d_values.empty() ? std::vector<int> { spec.gen.d } : spec.d_values;
    const std::vector<int> ks =
        spec.k_values.empty() ? std::vector<int> { spec.k } : spec.k_values;
    const std::vector<int> js = spec.j_values.empty()
                                    ? std::vector<int> { spec.pfdbnl.participants }
                                    : spec.j_values;
    std::vector<GridPoint> out;
    for (int d: ds)
      for (int k: ks)
        for (int j: js)
          out.push_back({ d, k, j });
    return out;
  }

  // Data and truths of one (seed, grid point).
  struct Instance {
    std::vector<WeightedDbn> truths;  // one per client
    std::vector<BinaryDbn> targets;   // thresholded truths
    std::vector<ClientDataset> clients;
  };

  Instance make_instance(const ExperimentSpec &spec, std::uint64_t seed,
                         const GridPoint &gp) {
    GenConfig gen = spec.gen;
    gen.d = gp.d;
    gen.seed = seed;
    gen.intra_mean_degree = intra_degree(spec, gp.d);
    Instance inst;
    const std::uint64_t data_seed = derive_seed(seed, kDataStream);
    if (is_heterogeneous(spec.scenario)) {
      inst.truths = gen_hetero_truths(gen, gp.k);
      const int nk = rows_per_client(spec, gp.d, gp.k);
      for (int c = 0; c < gp.k; ++c)
        inst.clients.push_back(gen_dataset(inst.truths[c], nk,
                                           spec.realization_len, gen.noise_std,
                                           derive_seed(data_seed, c),
                                           gen.burn_in));
    } else {
      const WeightedDbn truth = gen_truth(gen);
      inst.truths.assign(gp.k, truth);
      const auto all = gen_dataset(truth, homogeneous_rows(spec, gp.d, gp.k),
                                   spec.realization_len, gen.noise_std,
                                   data_seed, gen.burn_in);
      inst.clients = partition(all.x_t, all.x_lag, gp.k);
    }
    for (const auto &t: inst.truths)
      inst.targets.push_back(threshold(t, spec.tau_w, spec.tau_a));
    return inst;
  }

  void apply_lambda_rule(FdbnlConfig &cfg, int d) {
    const double lambda = d <= 10 ? 0.1 : 0.01;
    cfg.lambda_w = lambda;
    cfg.lambda_a = lambda;
  }

  int total_shd(const BinaryDbn &pred, const std::vector<BinaryDbn> &targets) {
    int total = 0;
    for (const auto &t: targets) {
      const auto s = shd(pred, t);
      total += s.w + s.a;
    }
    return total;
  }

  MethodRun run_method(Method method, const ExperimentSpec &spec,
                       std::uint64_t seed, const GridPoint &gp,
                       const Instance &inst,
                       std::optional<std::vector<WeightedDbn>> &client_fits,
                       ThreadPool *pool) {
    MethodRun run;
    run.method = method;
    run.truths = inst.targets;
    const auto global_prediction = [&](const WeightedDbn &dbn) {
      run.global = dbn;
      run.predicted.assign(inst.clients.size(),
                           threshold(dbn, spec.tau_w, spec.tau_a));
    };
    auto fits = [&]() -> const std::vector<WeightedDbn> & {
      if (!client_fits)
        client_fits = fit_clients(inst.clients, spec.dynotears, pool);
      return *client_fits;
    };

    switch (method) {
      case Method::kFdbnl: {
        FdbnlConfig cfg = spec.fdbnl;
        if (spec.hetero_lambda_rule)
          apply_lambda_rule(cfg, gp.d);
        auto r = run_fdbnl(inst.clients, cfg, pool);
        global_prediction(r.dbn);
        run.fdbnl_trace = std::move(r.trace);
        run.converged = r.converged;
        run.rounds = r.rounds;
        run.h = r.h;
        run.max_primal_w = r.max_primal_w;
        run.max_primal_a = r.max_primal_a;
        break;
      }
      case Method::kPfdbnl: {
        PfdbnlConfig cfg = spec.pfdbnl;
        if (spec.hetero_lambda_rule)
          apply_lambda_rule(cfg, gp.d);
        cfg.participants = gp.j;
        auto r = run_pfdbnl(inst.clients, cfg,
                            derive_seed(seed, kSamplerStream), pool);
        run.global = r.global;
        for (const auto &m: r.personal)
          run.predicted.push_back(threshold(m, spec.tau_w, spec.tau_a));
        run.personal = std::move(r.personal);
        run.pfdbnl_trace = std::move(r.trace);
        run.converged = r.converged;
        run.rounds = r.rounds;
        run.h = r.mean_h_personal;
        run.max_primal_w = r.max_primal_w;
        run.max_primal_a = r.max_primal_a;
        break;
      }
      case Method::kAve:
        global_prediction(ave_baseline(fits(), spec.tau_w, spec.tau_a).averaged);
        break;
      case Method::kBest: {
        const auto &all = fits();
        std::size_t best = 0;
        int best_score = std::numeric_limits<int>::max();
        for (std::size_t c = 0; c < all.size(); ++c) {
          const int s = total_shd(threshold(all[c], spec.tau_w, spec.tau_a),
                                  inst.targets);
          if (s < best_score) {
            best_score = s;
            best = c;
          }
        }
        global_prediction(all[best]);
        break;
      }
      case Method::kAlldata: {
        auto r = alldata_baseline(inst.clients, spec.dynotears);
        global_prediction(r.dbn);
        run.converged = r.converged;
        run.h = r.h;
        break;
      }
    }
    return run;
  }

  std::string format_number(double v) {
    if (std::isnan(v))
      return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
  }

  void write_text(const std::filesystem::path &path, const std::string &text) {
    if (path.has_parent_path())
      std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os)
      throw std::runtime_error("cannot open '" + path.string()
                               + "' for writing");
    os << text;
    if (!os)
      throw std::runtime_error("write to '" + path.string() + "' failed");
  }

  std::filesystem::path json_path(const std::filesystem::path &csv) {
    auto p = csv;
    p.replace_extension(".json");
    return p;
  }

  nlohmann::json number_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  }

}  // namespace

std::string to_string(Scenario s) { return name_of(kScenarios, s); }
std::string to_string(Method m) { return name_of(kMethods, m); }
std::string to_string(Connectivity c) { return name_of(kConnectivity, c); }

Scenario parse_scenario(const std::string &s) {
  return value_of(kScenarios, s, "scenario");
}

Method parse_method(const std::string &s) {
  return value_of(kMethods, s, "method");
}

Connectivity parse_connectivity(const std::string &s) {
  return value_of(kConnectivity, s, "connectivity");
}

bool is_heterogeneous(Scenario s) {
  return s == Scenario::kHeteroVaryD || s == Scenario::kHeteroVaryK
         || s == Scenario::kPartialParticipation;
}

void ExperimentSpec::validate() const {
  if (seeds.empty())
    throw ArgumentError("experiment: seed list is empty");
  if (methods.empty())
    throw ArgumentError("experiment: method set is empty");
  if (!(tau_w >= 0) || !(tau_a >= 0))
    throw ArgumentError("experiment: thresholds must be nonnegative");
  if (n < 0 || n_per_client < 0)
    throw ArgumentError("experiment: n and n_per_client must be >= 0");
  for (const auto &gp: grid(*this)) {
    if (gp.d < 2)
      throw ArgumentError("experiment: d must be >= 2");
    if (gp.k < 1)
      throw ArgumentError("experiment: K must be >= 1");
    if (gp.j < 0 || gp.j > gp.k)
      throw ArgumentError("experiment: j = " + std::to_string(gp.j)
                          + " outside 0.." + std::to_string(gp.k));
    if (is_heterogeneous(scenario) ? rows_per_client(*this, gp.d, gp.k) < 1
                                   : homogeneous_rows(*this, gp.d, gp.k) < gp.k)
      throw ArgumentError("experiment: fewer rows than clients at d = "
                          + std::to_string(gp.d) + ", K = "
                          + std::to_string(gp.k));
  }
  GenConfig g = gen;
  g.validate();
  fdbnl.validate();
  dynotears.validate();
  if (!(pfdbnl.mu > 0))
    throw ArgumentError("experiment: pfdbnl.mu must be positive");
}

ExperimentSpec default_spec(Scenario s) {
  ExperimentSpec spec;
  spec.scenario = s;
  spec.seeds.clear();
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    spec.seeds.push_back(seed);
  // Calibrated penalty growth for consensus runs (see README).
  spec.fdbnl.phi2 = 1.02;
  switch (s) {
    case Scenario::kVaryD:
      spec.methods = { Method::kFdbnl, Method::kAve, Method::kBest,
                       Method::kAlldata };
      spec.d_values = { 5, 10, 15, 20 };
      spec.k = 10;
      spec.fdbnl.lambda_w = spec.fdbnl.lambda_a = 0.05;
      break;
    case Scenario::kVaryK:
      spec.methods = { Method::kFdbnl, Method::kAve, Method::kBest,
                       Method::kAlldata };
      spec.d_values = { 20 };
      spec.k_values = { 2, 4, 8, 16, 32, 64 };
      spec.n = 512;
      spec.fdbnl.lambda_w = spec.fdbnl.lambda_a = 0.5;
      break;
    case Scenario::kHeteroVaryD:
    case Scenario::kHeteroVaryK:
    case Scenario::kPartialParticipation:
      spec.methods = { Method::kPfdbnl, Method::kFdbnl };
      spec.fdbnl.phi2 = 1.1;
      spec.connectivity = Connectivity::kHigh;
      spec.hetero_lambda_rule = true;
      spec.k = 6;
      spec.tau_w = spec.tau_a = 0.1;
      if (s == Scenario::kHeteroVaryD) {
        spec.d_values = { 5, 10, 15, 20 };
      } else if (s == Scenario::kHeteroVaryK) {
        spec.d_values = { 10, 20 };
        spec.k_values = { 2, 4, 8, 16, 32 };
        spec.n = 512;
      } else {
        spec.methods = { Method::kPfdbnl };
        spec.d_values = { 10 };
        spec.j_values = { 1, 2, 3, 4, 5 };
      }
      break;
    case Scenario::kSingleRun:
      spec.methods = { Method::kFdbnl };
      spec.seeds = { 0 };
      spec.n = 500;
      spec.fdbnl.lambda_w = spec.fdbnl.lambda_a = 0.05;
      break;
  }
  return spec;
}

std::map<std::string, std::string> parse_config(std::istream &is) {
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("config line " + std::to_string(number)
                          + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ArgumentError("config line " + std::to_string(number)
                          + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ArgumentError("config line " + std::to_string(number)
                          + ": duplicate key '" + key + "'");
  }
  return kv;
}

std::map<std::string, std::string>
parse_config(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw IngestError("cannot open config '" + path.string() + "'", 0);
  return parse_config(is);
}

void apply_config(ExperimentSpec &spec,
                  const std::map<std::string, std::string> &kv) {
  const auto &table = setters();
  bool lambda_given = false;
  for (const auto &[key, value]: kv) {
    const auto it = table.find(key);
    if (it == table.end())
      throw ArgumentError("unknown config key '" + key + "'");
    it->second(spec, key, value);
    if (key.find(".lambda_") != std::string::npos
        && key.rfind("dynotears.", 0) != 0)
      lambda_given = true;
  }
  // A scalar key replaces the scenario's grid unless the grid key is also set.
  if (kv.count("d") && !kv.count("d_values"))
    spec.d_values.clear();
  if (kv.count("k") && !kv.count("k_values"))
    spec.k_values.clear();
  if (kv.count("pfdbnl.participants") && !kv.count("j_values"))
    spec.j_values.clear();
  if (kv.count("intra_degree") && !kv.count("connectivity"))
    spec.connectivity = Connectivity::kFixed;
  if (lambda_given && !kv.count("hetero_lambda_rule"))
    spec.hetero_lambda_rule = false;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto &entry: setters())
    keys.push_back(entry.first);
  return keys;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec &spec,
                                      ThreadPool *pool,
                                      const RunObserver &observer) {
  spec.validate();
  std::vector<ResultRow> rows;
  const std::string scenario = to_string(spec.scenario);
  for (const auto seed: spec.seeds) {
    for (const auto &gp: grid(spec)) {
      const Instance inst = make_instance(spec, seed, gp);
      std::optional<std::vector<WeightedDbn>> client_fits;
      const RunContext ctx { spec.scenario, seed, gp.d, spec.gen.p, gp.k,
                             gp.j };
      for (const Method method: spec.methods) {
        const int j = method == Method::kPfdbnl && gp.j > 0 ? gp.j : gp.k;
        ResultRow base { scenario, seed, gp.d, spec.gen.p, gp.k, j,
                         to_string(method), "", 0, 0, 0, 0, "" };
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const MethodRun run =
              run_method(method, spec, seed, gp, inst, client_fits, pool);
          const double ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - t0)
                                .count();
          std::vector<MetricsReport> reports;
          for (std::size_t c = 0; c < run.predicted.size(); ++c)
            reports.push_back(evaluate(run.predicted[c], run.truths[c]));
          const auto mean = mean_metrics(reports);
          ResultRow w = base, a = base;
          w.matrix = "W";
          w.shd = mean.shd_w;
          w.tpr = mean.tpr_w;
          w.fdr = mean.fdr_w;
          a.matrix = "A";
          a.shd = mean.shd_a;
          a.tpr = mean.tpr_a;
          a.fdr = mean.fdr_a;
          w.runtime_ms = a.runtime_ms = spec.timing ? ms : 0;
          rows.push_back(std::move(w));
          rows.push_back(std::move(a));
          if (observer)
            observer(ctx, run);
        } catch (const std::exception &e) {
          log_warning(scenario + " seed " + std::to_string(seed) + " d "
                      + std::to_string(gp.d) + " K " + std::to_string(gp.k)
                      + " " + base.method + ": " + e.what());
          const double nan = std::numeric_limits<double>::quiet_NaN();
          for (const char *m: { "W", "A" }) {
            ResultRow r = base;
            r.matrix = m;
            r.shd = r.tpr = r.fdr = nan;
            r.error = e.what();
            rows.push_back(std::move(r));
          }
        }
      }
    }
  }
  return rows;
}

std::vector<ClientDataset> group_clients(const std::vector<Mat> &series, int p,
                                         const std::string &clients_spec) {
  if (series.empty())
    throw ArgumentError("clients: no realizations");
  const int m = static_cast<int>(series.size());
  std::vector<int> owner(m);
  const auto colon = clients_spec.find(':');
  const std::string kind =
      colon == std::string::npos ? "" : clients_spec.substr(0, colon);
  if (kind == "per-client" || kind == "round-robin") {
    const int count = parse_number<int>("clients", clients_spec.substr(colon + 1));
    if (count < 1)
      throw ArgumentError("clients: count must be >= 1");
    if (kind == "per-client") {
      if (m % count != 0)
        throw ArgumentError("clients: " + std::to_string(m)
                            + " realizations do not split into groups of "
                            + std::to_string(count));
      for (int r = 0; r < m; ++r)
        owner[r] = r / count;
    } else {
      if (count > m)
        throw ArgumentError("clients: " + std::to_string(count)
                            + " clients but only " + std::to_string(m)
                            + " realizations");
      for (int r = 0; r < m; ++r)
        owner[r] = r % count;
    }
  } else {
    const auto ids = parse_list<int>("clients", clients_spec);
    if (static_cast<int>(ids.size()) != m)
      throw ArgumentError("clients: " + std::to_string(ids.size())
                          + " assignments for " + std::to_string(m)
                          + " realizations");
    owner = ids;
  }
  const int k = *std::max_element(owner.begin(), owner.end()) + 1;
  std::vector<std::vector<Mat>> groups(k);
  for (int r = 0; r < m; ++r) {
    if (owner[r] < 0)
      throw ArgumentError("clients: negative client id");
    groups[owner[r]].push_back(series[r]);
  }
  std::vector<ClientDataset> out;
  for (int c = 0; c < k; ++c) {
    if (groups[c].empty())
      throw ArgumentError("clients: client " + std::to_string(c)
                          + " has no realizations");
    out.push_back(build_designs(groups[c], p));
  }
  return out;
}

std::vector<ClientDataset> ingest_timeseries(const std::filesystem::path &path,
                                             int p,
                                             const std::string &clients_spec) {
  std::ifstream is(path);
  if (!is)
    throw IngestError("cannot open series '" + path.string() + "'", 0);
  return group_clients(read_series_csv(is), p, clients_spec);
}

void write_results_csv(std::ostream &os, const std::vector<ResultRow> &rows) {
  os << "scenario,seed,d,p,K,j,method,matrix,shd,tpr,fdr,runtime_ms\n";
  for (const auto &r: rows)
    os << r.scenario << ',' << r.seed << ',' << r.d << ',' << r.p << ','
       << r.k << ',' << r.j << ',' << r.method << ',' << r.matrix << ','
       << format_number(r.shd) << ',' << format_number(r.tpr) << ','
       << format_number(r.fdr) << ',' << format_number(r.runtime_ms) << '\n';
}

void write_results_json(std::ostream &os, const std::vector<ResultRow> &rows) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto &r: rows) {
    nlohmann::ordered_json j;
    j["scenario"] = r.scenario;
    j["seed"] = r.seed;
    j["d"] = r.d;
    j["p"] = r.p;
    j["K"] = r.k;
    j["j"] = r.j;
    j["method"] = r.method;
    j["matrix"] = r.matrix;
    j["shd"] = number_or_null(r.shd);
    j["tpr"] = number_or_null(r.tpr);
    j["fdr"] = number_or_null(r.fdr);
    j["runtime_ms"] = number_or_null(r.runtime_ms);
    if (!r.error.empty())
      j["error"] = r.error;
    out.push_back(std::move(j));
  }
  os << out.dump(2) << '\n';
}

void emit_results(const std::vector<ResultRow> &rows,
                  const std::filesystem::path &path) {
  std::ostringstream csv, json;
  write_results_csv(csv, rows);
  write_results_json(json, rows);
  write_text(path, csv.str());
  write_text(json_path(path), json.str());
}

void write_trace_csv(std::ostream &os, const std::vector<FdbnlTraceRow> &t) {
  os << "round,h,max_primal_W,max_primal_A,objective,rho1,rho2\n";
  for (const auto &r: t)
    os << r.round << ',' << format_number(r.h) << ','
       << format_number(r.max_primal_w) << ',' << format_number(r.max_primal_a)
       << ',' << format_number(r.objective) << ',' << format_number(r.rho1)
       << ',' << format_number(r.rho2) << '\n';
}

void write_trace_csv(std::ostream &os, const std::vector<PfdbnlTraceRow> &t) {
  os << "round,h,max_primal_W,max_primal_A,objective,rho1,rho2,participants,"
        "mean_h_personal\n";
  for (const auto &r: t) {
    std::string ids;
    for (int c: r.participants)
      ids += (ids.empty() ? "" : ";") + std::to_string(c);
    os << r.round << ',' << format_number(r.h) << ','
       << format_number(r.max_primal_w) << ',' << format_number(r.max_primal_a)
       << ',' << format_number(r.objective) << ',' << format_number(r.rho1)
       << ',' << format_number(r.rho2) << ',' << ids << ','
       << format_number(r.mean_h_personal) << '\n';
  }
}

void emit_trace(const std::vector<FdbnlTraceRow> &trace,
                const std::filesystem::path &path) {
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  for (const auto &r: trace)
    json.push_back({ { "round", r.round },
                     { "h", number_or_null(r.h) },
                     { "max_primal_W", number_or_null(r.max_primal_w) },
                     { "max_primal_A", number_or_null(r.max_primal_a) },
                     { "objective", number_or_null(r.objective) },
                     { "rho1", number_or_null(r.rho1) },
                     { "rho2", number_or_null(r.rho2) } });
  write_text(path, csv.str());
  write_text(json_path(path), json.dump(2) + "\n");
}

void emit_trace(const std::vector<PfdbnlTraceRow> &trace,
                const std::filesystem::path &path) {
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  nlohmann::ordered_json json = nlohmann::ordered_json::array();
  for (const auto &r: trace)
    json.push_back({ { "round", r.round },
                     { "h", number_or_null(r.h) },
                     { "max_primal_W", number_or_null(r.max_primal_w) },
                     { "max_primal_A", number_or_null(r.max_primal_a) },
                     { "objective", number_or_null(r.objective) },
                     { "rho1", number_or_null(r.rho1) },
                     { "rho2", number_or_null(r.rho2) },
                     { "participants", r.participants },
                     { "mean_h_personal", number_or_null(r.mean_h_personal) } });
  write_text(path, csv.str());
  write_text(json_path(path), json.dump(2) + "\n");
}

}  // namespace fdbn
