#include "splab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "splab/design.hpp"
#include "splab/dr.hpp"
#include "splab/drl.hpp"
#include "splab/inference.hpp"
#include "splab/lattice.hpp"
#include "splab/ols.hpp"
#include "splab/rng.hpp"

namespace splab {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

// ---- config parsing ----

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError("unknown key '" + where + "." + key + "' (allowed: " + list + ")");
    }
  }
}

template <class T, class F>
std::vector<T> grid(const json& v, const std::string& key, F convert) {
  std::vector<T> out;
  try {
    if (v.is_array()) {
      for (const auto& e : v) out.push_back(convert(e));
    } else {
      out.push_back(convert(v));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
  if (out.empty()) throw ConfigError("'" + key + "' must not be empty");
  return out;
}

template <class T>
T scalar(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const std::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
  return v.get<int>();
}

// ---- Monte Carlo ----

struct CellKey {
  Tiling tiling;
  int R;
  double rho;
  double s;
};

struct DesignKey {
  SpatialKind spatial;
  TemporalKind temporal;
  double p;
};

struct LayoutBundle {
  SpatialLayout layout;
  std::optional<ClusterPartition> partition;
  std::optional<LayoutDiagnostics> diag;
};

struct CellContext {
  CellKey key;
  const LayoutBundle* bundle = nullptr;
  DgpSpec spec;
  NoiseModel noise;
  TrueAte truth;
};

struct Outcome {
  double tau_hat = 0.0;
  double var_hat = 0.0;
  double stat = 0.0;
  bool reject = false;
  bool ok = true;
  std::string error;
  double ms = 0.0;
};

DesignSpec make_design(const DesignKey& d, const LayoutBundle& b) {
  switch (d.spatial) {
    case SpatialKind::Global: return DesignSpec::global(d.p, d.temporal);
    case SpatialKind::Individual: return DesignSpec::individual(b.layout, d.p, d.temporal);
    case SpatialKind::Cluster: return DesignSpec::cluster(*b.partition, d.p, d.temporal);
  }
  throw InvalidInput("unknown design");
}

Outcome estimate_one(const ExperimentConfig& cfg, const CellContext& cell, const DesignSpec& design,
                     const PanelData& panel, Method method, std::uint64_t seed) {
  Outcome out;
  const auto start = std::chrono::steady_clock::now();
  try {
    const LayoutBundle& b = *cell.bundle;
    const ClusterPartition* part = b.partition ? &*b.partition : nullptr;
    const LayoutDiagnostics* diag = b.diag ? &*b.diag : nullptr;
    AteEstimate est;
    switch (method) {
      case Method::OLS:
        if (panel.intervals() == 1) {
          est = tau_ols(panel, design.spatial, b.layout, part, diag);
        } else {
          est = tau_ols_dynamic(panel, design.spatial, b.layout, part, diag, {cfg.estimators.bootstrap, seed});
        }
        break;
      case Method::DR: {
        DrOptions o;
        o.folds = cfg.estimators.folds;
        o.seed = seed;
        o.clip_weights = cfg.estimators.clip_weights;
        est = dr_crossfit(panel, design, b.layout, o).est;
        break;
      }
      case Method::DRL: {
        DrlOptions o;
        o.folds = cfg.estimators.folds;
        o.seed = seed;
        o.clip_weights = cfg.estimators.clip_weights;
        est = drl_estimate(panel, design, b.layout, o).est;
        break;
      }
    }
    out.tau_hat = est.tau_hat;
    out.var_hat = est.var_hat;
    if (!std::isfinite(est.tau_hat) || !std::isfinite(est.var_hat)) throw NumericalError("non-finite estimate");
    if (est.var_hat <= 1e-24 * (1.0 + est.tau_hat * est.tau_hat)) {
      // numerically exact estimate (noise-free data): decide on the sign alone
      out.stat = est.tau_hat > 1e-8 ? INFINITY : 0.0;
      out.reject = est.tau_hat > 1e-8;
    } else {
      const WaldTest w = wald(est, cfg.estimators.delta);
      out.stat = w.stat;
      out.reject = w.reject;
    }
  } catch (const InvalidInput& e) {
    out.ok = false;
    out.error = e.what();
  } catch (const NumericalError& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' ? ' ' : c);
  }
  return out + "\"";
}

std::string design_label(const ReportRow& row, bool multiple_p) {
  std::string s(to_string(row.design));
  if (multiple_p) s += "@" + fmt(row.p);
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("error writing " + path.string());
}

std::string header_comment(std::uint64_t seed) {
  return std::string("# splab ") + kVersion + " master_seed=" + std::to_string(seed) + "\n";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (layout.tiling.empty() || layout.R.empty()) throw ConfigError("layout grids must not be empty");
  if (design.spatial.empty() || design.temporal.empty() || design.p.empty()) {
    throw ConfigError("design grids must not be empty");
  }
  if (dgp.s.empty() || dgp.rho.empty()) throw ConfigError("dgp grids must not be empty");
  if (estimators.methods.empty()) throw ConfigError("estimators.methods must not be empty");
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (layout.cluster_size < 1) throw ConfigError("layout.cluster_size must be positive");
  for (double p : design.p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("design.p entries must lie in (0,1)");
  }
  for (double s : dgp.s) {
    if (!std::isfinite(s) || s < 0.0) throw ConfigError("dgp.s entries must be finite and non-negative");
  }
  for (double r : dgp.rho) {
    if (!(r >= 0.0 && r < 1.0)) throw ConfigError("dgp.rho entries must lie in [0,1)");
  }
  if (dgp.N < 2) throw ConfigError("dgp.N must be >= 2");
  if (dgp.M < 1) throw ConfigError("dgp.M must be >= 1");
  if (dgp.d < 1) throw ConfigError("dgp.d must be >= 1");
  const bool is_static = dgp.kind == DgpKind::ParamStatic || dgp.kind == DgpKind::SemiparamStatic;
  if (is_static && dgp.M != 1) throw ConfigError(std::string(to_string(dgp.kind)) + " needs dgp.M = 1");
  if ((dgp.kind == DgpKind::SemiparamStatic || dgp.kind == DgpKind::NonparamDynamic) && dgp.d != 1) {
    throw ConfigError(std::string(to_string(dgp.kind)) + " has a scalar covariate (dgp.d = 1)");
  }
  if (!(dgp.kind == DgpKind::ParamStatic || dgp.kind == DgpKind::ParamDynamic) && dgp.true_tau_samples < 10000) {
    throw ConfigError("dgp.true_tau_samples must be >= 10000 for Monte Carlo ATEs");
  }
  if (!(estimators.delta > 0.0 && estimators.delta < 0.5)) throw ConfigError("estimators.delta must lie in (0,0.5)");
  for (Method m : estimators.methods) {
    if (m == Method::DR && dgp.M != 1) throw ConfigError("the dr method needs a nondynamic panel (dgp.M = 1)");
    if (m != Method::OLS) {
      if (estimators.folds < 2) throw ConfigError("estimators.folds must be >= 2");
      if (dgp.N < 2 * estimators.folds) throw ConfigError("dgp.N must be at least 2 * estimators.folds");
    }
    if (m == Method::DRL && dgp.M >= 2) {
      for (TemporalKind t : design.temporal) {
        if (t == TemporalKind::Switchback) {
          throw ConfigError("drl cannot be paired with switchback designs when M >= 2 (zero importance weights)");
        }
      }
    }
    if (m == Method::OLS && dgp.M > 1 && estimators.bootstrap < 100) {
      throw ConfigError("estimators.bootstrap must be >= 100 for dynamic OLS");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "config", {"layout", "design", "dgp", "estimators", "replications", "seed", "output"});
  ExperimentConfig c;
  if (j.contains("layout")) {
    const json& l = j["layout"];
    check_keys(l, "layout", {"tiling", "R", "cluster_size"});
    if (l.contains("tiling")) {
      c.layout.tiling = grid<Tiling>(l["tiling"], "layout.tiling", [](const json& e) { return parse_tiling(e.get<std::string>()); });
    }
    if (l.contains("R")) c.layout.R = grid<int>(l["R"], "layout.R", [](const json& e) { return as_int(e, "layout.R"); });
    if (l.contains("cluster_size")) c.layout.cluster_size = as_int(l["cluster_size"], "layout.cluster_size");
  }
  if (j.contains("design")) {
    const json& d = j["design"];
    check_keys(d, "design", {"spatial", "temporal", "p"});
    if (d.contains("spatial")) {
      c.design.spatial = grid<SpatialKind>(d["spatial"], "design.spatial", [](const json& e) { return parse_spatial(e.get<std::string>()); });
    }
    if (d.contains("temporal")) {
      c.design.temporal = grid<TemporalKind>(d["temporal"], "design.temporal", [](const json& e) { return parse_temporal(e.get<std::string>()); });
    }
    if (d.contains("p")) c.design.p = grid<double>(d["p"], "design.p", [](const json& e) { return e.get<double>(); });
  }
  if (j.contains("dgp")) {
    const json& g = j["dgp"];
    check_keys(g, "dgp", {"kind", "s", "rho", "noise", "M", "N", "d", "zero_noise", "true_tau_samples"});
    if (g.contains("kind")) c.dgp.kind = parse_dgp(scalar<std::string>(g["kind"], "dgp.kind"));
    if (g.contains("s")) c.dgp.s = grid<double>(g["s"], "dgp.s", [](const json& e) { return e.get<double>(); });
    if (g.contains("rho")) c.dgp.rho = grid<double>(g["rho"], "dgp.rho", [](const json& e) { return e.get<double>(); });
    if (g.contains("noise")) c.dgp.noise = parse_noise_kind(scalar<std::string>(g["noise"], "dgp.noise"));
    if (g.contains("M")) c.dgp.M = as_int(g["M"], "dgp.M");
    if (g.contains("N")) c.dgp.N = as_int(g["N"], "dgp.N");
    if (g.contains("d")) c.dgp.d = as_int(g["d"], "dgp.d");
    if (g.contains("zero_noise")) c.dgp.zero_noise = scalar<bool>(g["zero_noise"], "dgp.zero_noise");
    if (g.contains("true_tau_samples")) c.dgp.true_tau_samples = as_int(g["true_tau_samples"], "dgp.true_tau_samples");
  }
  if (j.contains("estimators")) {
    const json& e = j["estimators"];
    check_keys(e, "estimators", {"methods", "folds", "clip_weights", "bootstrap", "delta"});
    if (e.contains("methods")) {
      c.estimators.methods = grid<Method>(e["methods"], "estimators.methods", [](const json& v) { return parse_method(v.get<std::string>()); });
    }
    if (e.contains("folds")) c.estimators.folds = as_int(e["folds"], "estimators.folds");
    if (e.contains("clip_weights")) c.estimators.clip_weights = scalar<bool>(e["clip_weights"], "estimators.clip_weights");
    if (e.contains("bootstrap")) c.estimators.bootstrap = as_int(e["bootstrap"], "estimators.bootstrap");
    if (e.contains("delta")) c.estimators.delta = scalar<double>(e["delta"], "estimators.delta");
  }
  if (j.contains("replications")) c.replications = as_int(j["replications"], "replications");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) c.output = scalar<std::string>(j["output"], "output");
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  auto names = [](const auto& v) {
    json a = json::array();
    for (const auto& x : v) a.push_back(std::string(to_string(x)));
    return a;
  };
  j["layout"] = {{"tiling", names(c.layout.tiling)}, {"R", c.layout.R}, {"cluster_size", c.layout.cluster_size}};
  j["design"] = {{"spatial", names(c.design.spatial)}, {"temporal", names(c.design.temporal)}, {"p", c.design.p}};
  j["dgp"] = {{"kind", std::string(to_string(c.dgp.kind))},
              {"s", c.dgp.s},
              {"rho", c.dgp.rho},
              {"noise", std::string(to_string(c.dgp.noise))},
              {"M", c.dgp.M},
              {"N", c.dgp.N},
              {"d", c.dgp.d},
              {"zero_noise", c.dgp.zero_noise},
              {"true_tau_samples", c.dgp.true_tau_samples}};
  j["estimators"] = {{"methods", names(c.estimators.methods)},
                     {"folds", c.estimators.folds},
                     {"clip_weights", c.estimators.clip_weights},
                     {"bootstrap", c.estimators.bootstrap},
                     {"delta", c.estimators.delta}};
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["output"] = c.output;
  return j.dump(2);
}

bool MonteCarloReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
}

MonteCarloReport run_mc(const ExperimentConfig& config, int threads) {
  config.validate();
  if (threads < 1) throw InvalidInput("thread count must be positive");
  const auto& cfg = config;
  const bool need_partition =
      std::find(cfg.design.spatial.begin(), cfg.design.spatial.end(), SpatialKind::Cluster) != cfg.design.spatial.end();

  // layouts and partitions, shared by every cell on them
  std::map<std::pair<int, int>, LayoutBundle> bundles;
  for (Tiling t : cfg.layout.tiling) {
    for (int R : cfg.layout.R) {
      LayoutBundle b;
      try {
        b.layout = build_layout(t, R);
        if (need_partition) {
          b.partition = build_clusters(b.layout, cfg.layout.cluster_size);
          b.diag = diagnostics(b.layout, *b.partition);
        }
      } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
      }
      bundles.emplace(std::make_pair(static_cast<int>(t), R), std::move(b));
    }
  }

  std::vector<DesignKey> designs;
  for (SpatialKind sp : cfg.design.spatial) {
    for (TemporalKind tk : cfg.design.temporal) {
      for (double p : cfg.design.p) designs.push_back({sp, tk, p});
    }
  }
  const int n_designs = static_cast<int>(designs.size());
  const int n_methods = static_cast<int>(cfg.estimators.methods.size());
  const int per_cell = n_designs * n_methods;

  // cells: DGP coefficients depend on (master seed, layout) only, so the
  // signal grid rescales one fixed draw
  std::vector<CellContext> cells;
  for (Tiling t : cfg.layout.tiling) {
    for (int R : cfg.layout.R) {
      const LayoutBundle& b = bundles.at({static_cast<int>(t), R});
      for (double rho : cfg.dgp.rho) {
        Stream noise_rng(cfg.seed, {0x401feULL, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(R), bits(rho)});
        const NoiseModel noise = make_noise(cfg.dgp.noise, rho, b.layout, noise_rng);
        for (double s : cfg.dgp.s) {
          CellContext cell;
          cell.key = {t, R, rho, s};
          cell.bundle = &b;
          Stream coef_rng(cfg.seed, {0xc0efULL, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(R)});
          cell.spec = make_dgp_spec(cfg.dgp.kind, b.layout, cfg.dgp.M, s, coef_rng, cfg.dgp.d);
          cell.noise = noise;
          cell.truth = true_ate(cell.spec, b.layout, cfg.dgp.true_tau_samples,
                                counter_key(cfg.seed, {0x7a0ULL, static_cast<std::uint64_t>(t),
                                                       static_cast<std::uint64_t>(R), bits(s)}));
          cells.push_back(std::move(cell));
        }
      }
    }
  }

  MonteCarloReport report;
  report.seed = cfg.seed;
  report.replications = cfg.replications;
  report.multiple_p = cfg.design.p.size() > 1;
  const int n_cells = static_cast<int>(cells.size());
  const int reps = cfg.replications;
  std::vector<std::vector<Outcome>> results(static_cast<std::size_t>(n_cells) * reps);
  std::vector<std::uint64_t> rep_seeds(results.size());

  NoiseSwitches switches;
  if (cfg.dgp.zero_noise) {
    switches.outcome = false;
    switches.state = false;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < results.size(); task = next++) {
      const CellContext& cell = cells[task / reps];
      const int rep = static_cast<int>(task % reps);
      const CellKey& k = cell.key;
      const std::uint64_t rep_seed = counter_key(
          cfg.seed, {static_cast<std::uint64_t>(k.tiling), static_cast<std::uint64_t>(k.R), bits(k.rho), bits(k.s),
                     static_cast<std::uint64_t>(rep)});
      rep_seeds[task] = rep_seed;
      std::vector<Outcome> outcomes;
      outcomes.reserve(per_cell);
      for (const DesignKey& dk : designs) {
        std::optional<PanelData> panel;
        std::optional<DesignSpec> spec;
        std::string setup_error;
        try {
          spec = make_design(dk, *cell.bundle);
          const std::uint64_t assign_seed =
              counter_key(rep_seed, {1, static_cast<std::uint64_t>(dk.spatial), static_cast<std::uint64_t>(dk.temporal), bits(dk.p)});
          const AssignmentTensor A = assign(*spec, cell.bundle->layout, cfg.dgp.N, cfg.dgp.M, assign_seed);
          // same simulation seed for every design: shared covariates and noise
          panel = simulate(cell.spec, cell.bundle->layout, A, cell.noise, counter_key(rep_seed, {2}), switches);
        } catch (const std::exception& e) {
          setup_error = e.what();
        }
        for (Method m : cfg.estimators.methods) {
          if (!panel) {
            Outcome o;
            o.ok = false;
            o.error = setup_error;
            outcomes.push_back(o);
            continue;
          }
          outcomes.push_back(estimate_one(cfg, cell, *spec, *panel, m, counter_key(rep_seed, {3})));
        }
      }
      results[task] = std::move(outcomes);
    }
  };
  const int n_threads = std::max(1, std::min<int>(threads, static_cast<int>(results.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // deterministic fold over (cell, design, method, rep)
  for (int c = 0; c < n_cells; ++c) {
    const CellContext& cell = cells[c];
    for (int di = 0; di < n_designs; ++di) {
      for (int mi = 0; mi < n_methods; ++mi) {
        ReportRow row;
        row.tiling = cell.key.tiling;
        row.R = cell.key.R;
        row.r = nominal_degree(cell.key.tiling);
        row.rho = cell.key.rho;
        row.s = cell.key.s;
        row.M = cfg.dgp.M;
        row.N = cfg.dgp.N;
        row.design = designs[di].spatial;
        row.temporal = designs[di].temporal;
        row.p = designs[di].p;
        row.method = cfg.estimators.methods[mi];
        row.true_tau = cell.truth.tau;
        row.true_tau_se = cell.truth.se;
        const int row_index = static_cast<int>(report.rows.size());
        double sum = 0.0;
        double ms = 0.0;
        int rejects = 0;
        std::vector<double> taus;
        for (int rep = 0; rep < reps; ++rep) {
          const std::size_t task = static_cast<std::size_t>(c) * reps + rep;
          const Outcome& o = results[task][di * n_methods + mi];
          ReplicationRecord rec;
          rec.row = row_index;
          rec.rep = rep;
          rec.seed = rep_seeds[task];
          rec.tau_hat = o.tau_hat;
          rec.var_hat = o.var_hat;
          rec.stat = o.stat;
          rec.reject = o.reject;
          rec.ok = o.ok;
          rec.error = o.error;
          report.records.push_back(rec);
          ms += o.ms;
          if (!o.ok) {
            ++row.failures;
            continue;
          }
          taus.push_back(o.tau_hat);
          sum += o.tau_hat;
          rejects += o.reject;
        }
        row.reps = static_cast<int>(taus.size());
        row.mean_runtime_ms = ms / reps;
        row.failed = row.failures > 0.05 * reps;
        if (row.reps > 0) {
          const double mean = sum / row.reps;
          double ss = 0.0;
          for (double t : taus) ss += (t - mean) * (t - mean);
          row.bias = mean - row.true_tau;
          row.var = ss / row.reps;
          row.mse = row.bias * row.bias + row.var;
          row.reject_rate = static_cast<double>(rejects) / row.reps;
        } else {
          row.bias = row.var = row.mse = row.reject_rate = NAN;
        }
        report.rows.push_back(row);
      }
    }
  }

  // MSE ratios against the global design of the same cell, temporal design, p and method
  for (auto& row : report.rows) {
    auto mse_of = [&](SpatialKind sp) {
      for (const auto& o : report.rows) {
        if (o.tiling == row.tiling && o.R == row.R && o.rho == row.rho && o.s == row.s && o.temporal == row.temporal &&
            o.p == row.p && o.method == row.method && o.design == sp) {
          return o.mse;
        }
      }
      return static_cast<double>(NAN);
    };
    const double g = mse_of(SpatialKind::Global);
    row.r1 = mse_of(SpatialKind::Individual) / g;
    row.r2 = mse_of(SpatialKind::Cluster) / g;
  }
  return report;
}

std::string report_csv(const MonteCarloReport& report) {
  std::string out = header_comment(report.seed);
  out += "R,r,rho,s,M,N,design,temporal,method,bias,var,mse,reject_rate,r1,r2,reps,seed\n";
  for (const auto& row : report.rows) {
    out += std::to_string(row.R) + "," + std::to_string(row.r) + "," + fmt(row.rho) + "," + fmt(row.s) + "," +
           std::to_string(row.M) + "," + std::to_string(row.N) + "," + design_label(row, report.multiple_p) + "," +
           std::string(to_string(row.temporal)) + "," + std::string(to_string(row.method)) + "," + fmt(row.bias) +
           "," + fmt(row.var) + "," + fmt(row.mse) + "," + fmt(row.reject_rate) + "," + fmt(row.r1) + "," +
           fmt(row.r2) + "," + std::to_string(row.reps) + "," + std::to_string(report.seed) + "\n";
  }
  return out;
}

std::string power_svg(const std::string& title, const std::vector<PowerSeries>& series, std::uint64_t seed) {
  const double W = 640, H = 420, left = 70, right = 150, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  double xmin = INFINITY, xmax = -INFINITY;
  for (const auto& s : series) {
    for (double x : s.x) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
  }
  if (!(xmax > xmin)) {
    xmin = std::isfinite(xmin) ? xmin - 0.5 : 0.0;
    xmax = xmin + 1.0;
  }
  auto X = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto Y = [&](double y) { return top + (1.0 - std::clamp(y, 0.0, 1.0)) * ph; };
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o << "<!-- splab " << kVersion << " master_seed=" << seed << " -->\n";
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = k / 5.0;
    o << "<line x1=\"" << left - 4 << "\" y1=\"" << Y(y) << "\" x2=\"" << left + pw << "\" y2=\"" << Y(y)
      << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << Y(y) + 4 << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double x = xmin + (xmax - xmin) * k / 4.0;
    o << "<line x1=\"" << X(x) << "\" y1=\"" << top + ph << "\" x2=\"" << X(x) << "\" y2=\"" << top + ph + 4
      << "\" stroke=\"#333\"/>\n";
    o << "<text x=\"" << X(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">signal s</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">rejection rate</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    o << "<polyline class=\"series\" data-label=\"" << s.label << "\" fill=\"none\" stroke=\"" << s.color
      << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) o << (k ? " " : "") << fmt(X(s.x[k])) << "," << fmt(Y(s.y[k]));
    o << "\"/>\n";
    const double ly = top + 20 + 20.0 * i;
    o << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
      << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void emit_reports(const MonteCarloReport& report, const std::filesystem::path& dir) {
  if (report.rows.empty()) throw InvalidInput("empty report");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  write_file(dir / "report.csv", report_csv(report));

  std::string cells = header_comment(report.seed);
  cells += "tiling,R,r,rho,s,design,temporal,p,method,true_tau,true_tau_se,reps,failures,failed\n";
  for (const auto& row : report.rows) {
    cells += std::string(to_string(row.tiling)) + "," + std::to_string(row.R) + "," + std::to_string(row.r) + "," +
             fmt(row.rho) + "," + fmt(row.s) + "," + std::string(to_string(row.design)) + "," +
             std::string(to_string(row.temporal)) + "," + fmt(row.p) + "," + std::string(to_string(row.method)) + "," +
             fmt(row.true_tau) + "," + fmt(row.true_tau_se) + "," + std::to_string(row.reps) + "," +
             std::to_string(row.failures) + "," + (row.failed ? "true" : "false") + "\n";
  }
  write_file(dir / "cells.csv", cells);

  std::string reps = header_comment(report.seed);
  reps += "row,tiling,R,rho,s,design,temporal,p,method,rep,seed,tau_hat,var_hat,stat,reject,status\n";
  for (const auto& rec : report.records) {
    const auto& row = report.rows[rec.row];
    reps += std::to_string(rec.row) + "," + std::string(to_string(row.tiling)) + "," + std::to_string(row.R) + "," +
            fmt(row.rho) + "," + fmt(row.s) + "," + std::string(to_string(row.design)) + "," +
            std::string(to_string(row.temporal)) + "," + fmt(row.p) + "," + std::string(to_string(row.method)) + "," +
            std::to_string(rec.rep) + "," + std::to_string(rec.seed) + "," + fmt(rec.tau_hat) + "," +
            fmt(rec.var_hat) + "," + fmt(rec.stat) + "," + (rec.reject ? "1" : "0") + "," +
            (rec.ok ? std::string("ok") : csv_escape(rec.error)) + "\n";
  }
  write_file(dir / "replications.csv", reps);

  std::string timing = header_comment(report.seed);
  timing += "row,R,rho,s,design,method,mean_runtime_ms\n";
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& row = report.rows[i];
    timing += std::to_string(i) + "," + std::to_string(row.R) + "," + fmt(row.rho) + "," + fmt(row.s) + "," +
              std::string(to_string(row.design)) + "," + std::string(to_string(row.method)) + "," +
              fmt(row.mean_runtime_ms) + "\n";
  }
  write_file(dir / "timing.csv", timing);

  // power curves: one chart per (layout, rho, temporal, p, method)
  struct Group {
    std::string title;
    std::string file;
    std::map<int, PowerSeries> series;
  };
  std::map<std::string, Group> groups;
  for (const auto& row : report.rows) {
    std::string key = std::string(to_string(row.tiling)) + "_R" + std::to_string(row.R) + "_rho" + fmt(row.rho) + "_" +
                      std::string(to_string(row.temporal)) + "_" + std::string(to_string(row.method));
    if (report.multiple_p) key += "_p" + fmt(row.p);
    Group& g = groups[key];
    g.file = "power_" + key + ".svg";
    g.title = "Power: " + std::string(to_string(row.tiling)) + " R=" + std::to_string(row.R) + " rho=" + fmt(row.rho) +
              " " + std::string(to_string(row.temporal)) + " " + std::string(to_string(row.method));
    PowerSeries& s = g.series[static_cast<int>(row.design)];
    s.label = std::string(to_string(row.design));
    s.color = row.design == SpatialKind::Global ? "black" : row.design == SpatialKind::Individual ? "red" : "blue";
    s.x.push_back(row.s);
    s.y.push_back(row.reject_rate);
  }
  for (const auto& [key, g] : groups) {
    std::vector<PowerSeries> series;
    for (const auto& [_, s] : g.series) series.push_back(s);
    if (series.empty() || series.front().x.size() < 2) continue;
    write_file(dir / g.file, power_svg(g.title, series, report.seed));
  }
}

}  // namespace splab
