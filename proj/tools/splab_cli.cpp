// Command line front end: layout / assign / simulate / estimate / mc.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "splab/design.hpp"
#include "splab/dgp.hpp"
#include "splab/dr.hpp"
#include "splab/drl.hpp"
#include "splab/harness.hpp"
#include "splab/inference.hpp"
#include "splab/io.hpp"
#include "splab/lattice.hpp"
#include "splab/ols.hpp"
#include "splab/rng.hpp"

using namespace splab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCellFailure = 3;

struct LayoutArgs {
  std::string tiling = "sq";
  int units = 36;
  int cluster_size = 9;
};

struct DesignArgs {
  std::string design = "individual";
  std::string temporal = "constant";
  double p = 0.5;
};

void add_layout_options(CLI::App* app, LayoutArgs& a) {
  app->add_option("--tiling", a.tiling, "tri, sq or hex")->capture_default_str();
  app->add_option("--units,-R", a.units, "number of spatial units")->capture_default_str();
  app->add_option("--cluster-size", a.cluster_size, "units per cluster")->capture_default_str();
}

void add_design_options(CLI::App* app, DesignArgs& a) {
  app->add_option("--design", a.design, "global, individual or cluster")->capture_default_str();
  app->add_option("--temporal", a.temporal, "constant, independent or switchback")->capture_default_str();
  app->add_option("--p", a.p, "treatment probability")->capture_default_str();
}

struct Built {
  SpatialLayout layout;
  std::optional<ClusterPartition> partition;
};

Built build(const LayoutArgs& a, bool need_partition) {
  Built b{build_layout(parse_tiling(a.tiling), a.units), std::nullopt};
  if (need_partition) b.partition = build_clusters(b.layout, a.cluster_size);
  return b;
}

DesignSpec make_spec(const DesignArgs& a, const Built& b) {
  const SpatialKind sp = parse_spatial(a.design);
  const TemporalKind tk = parse_temporal(a.temporal);
  switch (sp) {
    case SpatialKind::Global: return DesignSpec::global(a.p, tk);
    case SpatialKind::Individual: return DesignSpec::individual(b.layout, a.p, tk);
    case SpatialKind::Cluster: return DesignSpec::cluster(*b.partition, a.p, tk);
  }
  throw InvalidInput("unknown design");
}

// Output file or stdout.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
  std::ofstream file_;
};

std::string header(std::uint64_t seed) {
  return std::string("# splab ") + kVersion + " master_seed=" + std::to_string(seed) + "\n";
}

int thread_count(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("SPLAB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string("SPLAB_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatio-temporal experiment laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  LayoutArgs lay;
  DesignArgs des;
  std::string out;
  std::uint64_t seed = 1;

  auto* layout_cmd = app.add_subcommand("layout", "write a tiling layout with its clusters");
  add_layout_options(layout_cmd, lay);
  layout_cmd->add_option("--out", out, "output file (stdout if omitted)");

  int days = 1;
  int intervals = 1;
  auto* assign_cmd = app.add_subcommand("assign", "draw treatment assignments");
  add_layout_options(assign_cmd, lay);
  add_design_options(assign_cmd, des);
  assign_cmd->add_option("--days,-N", days, "days")->capture_default_str();
  assign_cmd->add_option("--intervals,-M", intervals, "intervals per day")->capture_default_str();
  assign_cmd->add_option("--seed", seed, "seed")->capture_default_str();
  assign_cmd->add_option("--out", out, "output CSV (stdout if omitted)");

  std::string dgp = "param_static";
  std::string noise = "exponential";
  double s = 1.0;
  double rho = 0.6;
  int dim = 1;
  bool zero_noise = false;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate a panel");
  add_layout_options(sim_cmd, lay);
  add_design_options(sim_cmd, des);
  sim_cmd->add_option("--dgp", dgp, "param_static, semiparam_static, param_dynamic or nonparam_dynamic")
      ->capture_default_str();
  sim_cmd->add_option("--noise", noise, "exponential or lowrank")->capture_default_str();
  sim_cmd->add_option("--s", s, "signal")->capture_default_str();
  sim_cmd->add_option("--rho", rho, "noise correlation")->capture_default_str();
  sim_cmd->add_option("--days,-N", days, "days")->capture_default_str();
  sim_cmd->add_option("--intervals,-M", intervals, "intervals per day")->capture_default_str();
  sim_cmd->add_option("--dim", dim, "covariate dimension")->capture_default_str();
  sim_cmd->add_option("--seed", seed, "seed")->capture_default_str();
  sim_cmd->add_flag("--zero-noise", zero_noise, "disable outcome and state noise");
  sim_cmd->add_option("--out", out, "output CSV (stdout if omitted)");

  std::string method = "ols";
  std::string in;
  int folds = 2;
  bool clip = false;
  int bootstrap = 200;
  double delta = 0.05;
  auto* est_cmd = app.add_subcommand("estimate", "estimate the ATE from a panel CSV");
  add_layout_options(est_cmd, lay);
  add_design_options(est_cmd, des);
  est_cmd->add_option("--method", method, "ols, dr or drl")->capture_default_str();
  est_cmd->add_option("--in", in, "panel CSV")->required();
  est_cmd->add_option("--folds", folds, "cross-fitting folds")->capture_default_str();
  est_cmd->add_flag("--clip-weights", clip, "cap inverse propensity weights at 1e4");
  est_cmd->add_option("--bootstrap", bootstrap, "day resamples for dynamic OLS")->capture_default_str();
  est_cmd->add_option("--delta", delta, "test level")->capture_default_str();
  est_cmd->add_option("--seed", seed, "seed for fold splits and resampling")->capture_default_str();
  est_cmd->add_option("--out", out, "output JSON (stdout if omitted)");

  std::string config_path;
  int threads = 0;
  auto* mc_cmd = app.add_subcommand("mc", "run a Monte Carlo experiment");
  mc_cmd->add_option("--config", config_path, "JSON config")->required();
  mc_cmd->add_option("--out", out, "output directory (overrides the config)");
  mc_cmd->add_option("--threads", threads, "worker threads (default $SPLAB_THREADS or 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*layout_cmd) {
      const Built b = build(lay, true);
      Sink sink(out);
      write_layout(sink.stream(), b.layout, *b.partition);
    } else if (*assign_cmd) {
      const Built b = build(lay, parse_spatial(des.design) == SpatialKind::Cluster);
      const DesignSpec spec = make_spec(des, b);
      const AssignmentTensor A = assign(spec, b.layout, days, intervals, seed);
      Sink sink(out);
      sink.stream() << header(seed);
      write_assignments_csv(sink.stream(), A);
    } else if (*sim_cmd) {
      const Built b = build(lay, parse_spatial(des.design) == SpatialKind::Cluster);
      const DesignSpec spec = make_spec(des, b);
      const DgpKind kind = parse_dgp(dgp);
      Stream coef_rng(seed, {0xc0efULL});
      const DgpSpec dspec = make_dgp_spec(kind, b.layout, intervals, s, coef_rng, dim);
      Stream noise_rng(seed, {0x401feULL});
      const NoiseModel nm = make_noise(parse_noise_kind(noise), rho, b.layout, noise_rng);
      const AssignmentTensor A = assign(spec, b.layout, days, dspec.intervals, counter_key(seed, {1}));
      NoiseSwitches sw;
      if (zero_noise) sw.outcome = sw.state = false;
      const PanelData panel = simulate(dspec, b.layout, A, nm, counter_key(seed, {2}), sw);
      Sink sink(out);
      sink.stream() << header(seed);
      write_panel_csv(sink.stream(), panel);
      if (dspec.parametric()) std::cerr << "true_tau " << dspec.true_tau << "\n";
    } else if (*est_cmd) {
      const SpatialKind sp = parse_spatial(des.design);
      const Built b = build(lay, sp == SpatialKind::Cluster);
      const DesignSpec spec = make_spec(des, b);
      std::ifstream f(in);
      if (!f) throw ConfigError("cannot read panel " + in);
      const PanelData panel = read_panel_csv(f, b.layout);
      const Method m = parse_method(method);
      nlohmann::ordered_json j;
      AteEstimate est;
      const ClusterPartition* part = b.partition ? &*b.partition : nullptr;
      if (m == Method::OLS) {
        est = tau_ols_dynamic(panel, sp, b.layout, part, nullptr, {bootstrap, seed});
      } else if (m == Method::DR) {
        DrOptions o;
        o.folds = folds;
        o.seed = seed;
        o.clip_weights = clip;
        const DrEstimate r = dr_crossfit(panel, spec, b.layout, o);
        est = r.est;
        j["sigma_O2_hat"] = r.sigma_O2_hat;
        j["min_arm_count"] = r.diagnostics.min_arm_count;
        j["max_weight"] = r.diagnostics.max_weight;
      } else {
        DrlOptions o;
        o.folds = folds;
        o.seed = seed;
        o.clip_weights = clip;
        const DrlEstimate r = drl_estimate(panel, spec, b.layout, o);
        est = r.est;
        auto w = nlohmann::ordered_json::array();
        for (const auto& ws : r.weights) w.push_back({{"mean", ws.mean}, {"max", ws.max}});
        j["weights"] = w;
      }
      nlohmann::ordered_json o;
      o["tau_hat"] = est.tau_hat;
      o["var_hat"] = est.var_hat;
      o["method"] = std::string(to_string(m));
      o["design"] = std::string(to_string(sp));
      o["N"] = est.n_days;
      o["R"] = est.units;
      o["M"] = est.intervals;
      o["seed"] = seed;
      if (est.var_hat > 0.0) {
        const WaldTest w = wald(est, delta);
        o["stat"] = w.stat;
        o["p_value"] = w.p_value;
        o["reject"] = w.reject;
      }
      o["delta"] = delta;
      if (!j.is_null()) o.update(j);
      o["version"] = kVersion;
      Sink sink(out);
      sink.stream() << o.dump(2) << "\n";
    } else if (*mc_cmd) {
      ExperimentConfig cfg = load_config(config_path);
      if (!out.empty()) cfg.output = out;
      const MonteCarloReport report = run_mc(cfg, thread_count(threads));
      emit_reports(report, cfg.output);
      std::cout << report_csv(report);
      if (report.any_failed()) {
        std::cerr << "error: at least one cell exceeded the 5% replication failure budget\n";
        return kExitCellFailure;
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
