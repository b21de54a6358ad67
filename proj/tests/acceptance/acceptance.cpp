// Acceptance runner. One PASS/FAIL line per criterion; exit status 1 if any
// criterion fails. Thread count comes from SPLAB_THREADS (default: hardware).
#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "splab/design.hpp"
#include "splab/dgp.hpp"
#include "splab/dr.hpp"
#include "splab/drl.hpp"
#include "splab/harness.hpp"
#include "splab/lattice.hpp"
#include "splab/ols.hpp"

using namespace splab;

namespace {

int threads() {
  if (const char* env = std::getenv("SPLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [fail: " << what << "]";
    }
  }
};

std::string f3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const ReportRow& row_of(const MonteCarloReport& r, Tiling t, int R, SpatialKind d, double s = NAN) {
  for (const auto& row : r.rows) {
    if (row.tiling == t && row.R == R && row.design == d && (std::isnan(s) || std::fabs(row.s - s) < 1e-12)) return row;
  }
  throw std::runtime_error("missing report row");
}

// Deterministic reruns of every run_mc call feed criterion 11.
std::vector<ExperimentConfig> g_runs;
std::vector<std::string> g_csv;

MonteCarloReport mc(const ExperimentConfig& c) {
  MonteCarloReport r = run_mc(c, threads());
  g_runs.push_back(c);
  g_csv.push_back(report_csv(r));
  return r;
}

ExperimentConfig base(Tiling t, std::vector<int> R, DgpKind kind, std::vector<double> s, std::vector<double> rho,
                      int reps, std::uint64_t seed) {
  ExperimentConfig c;
  c.layout.tiling = {t};
  c.layout.R = std::move(R);
  c.layout.cluster_size = 9;
  c.dgp.kind = kind;
  c.dgp.s = std::move(s);
  c.dgp.rho = std::move(rho);
  c.dgp.N = 30;
  c.replications = reps;
  c.seed = seed;
  return c;
}

// ---- 1 -------------------------------------------------------------------

std::array<double, 2> enumerate_propensity(const DesignSpec& spec, const SpatialLayout& L, int u) {
  std::vector<int> members{u};
  members.insert(members.end(), L.neighbors(u).begin(), L.neighbors(u).end());
  std::vector<int> coins;
  for (int v : members) coins.push_back(spec.randomizer_of(v));
  std::sort(coins.begin(), coins.end());
  coins.erase(std::unique(coins.begin(), coins.end()), coins.end());
  std::array<double, 2> out{0.0, 0.0};
  for (unsigned mask = 0; mask < (1u << coins.size()); ++mask) {
    double prob = 1.0;
    for (std::size_t k = 0; k < coins.size(); ++k) {
      const double p = spec.probs[coins[k]];
      prob *= (mask >> k & 1u) ? p : 1.0 - p;
    }
    auto value = [&](int v) {
      const auto pos = std::lower_bound(coins.begin(), coins.end(), spec.randomizer_of(v)) - coins.begin();
      return static_cast<int>(mask >> pos & 1u);
    };
    double abar = 0.0;
    for (int v : L.neighbors(u)) abar += value(v);
    abar /= L.degree(u);
    for (int a = 0; a < 2; ++a) {
      if (value(u) == a && abar == a) out[a] += prob;
    }
  }
  return out;
}

Outcome propensity_oracle() {
  Outcome o;
  double worst = 0.0;
  int checked = 0;
  for (Tiling t : {Tiling::Square, Tiling::Triangular, Tiling::Hexagonal}) {
    const SpatialLayout L = build_layout(t, 36);
    const ClusterPartition P = build_clusters(L, 9);
    const LayoutDiagnostics D = diagnostics(L, P);
    for (double p : {0.5, 0.3}) {
      for (const DesignSpec& d : {DesignSpec::global(p), DesignSpec::individual(L, p), DesignSpec::cluster(P, p)}) {
        const PropensityModel pi = propensity(d, L, &D);
        for (int u = 0; u < L.size(); ++u) {
          const auto e = enumerate_propensity(d, L, u);
          for (int a = 0; a < 2; ++a) {
            worst = std::max(worst, std::fabs(pi(u, a) - e[a]));
            ++checked;
          }
        }
      }
    }
  }
  o.detail << "max |closed form - enumeration| = " << f3(worst) << " over " << checked << " values";
  o.require(worst <= 1e-12, "tolerance 1e-12");
  return o;
}

// ---- 2 -------------------------------------------------------------------

QFunction linear_q(const DgpSpec& spec) {
  return [&spec](int u, int t, int a, const double* x) {
    Eigen::VectorXd o(spec.dim);
    for (int k = 0; k < spec.dim; ++k) o[k] = x[2 + k];
    double A = x[0], Abar = x[1], value = 0.0;
    for (int k = t; k < spec.intervals; ++k) {
      const auto& c = spec.cell(u, k);
      value += c.alpha + c.beta.dot(o) + c.gamma * A + c.theta * Abar;
      o = c.Lambda + c.B * o + c.Gamma * A + c.Theta * Abar;
      A = Abar = a;
    }
    return value;
  };
}

// Noiseless Q of the nonparametric dynamic model: the state only depends on
// the previous action.
QFunction nonparam_q(const DgpSpec& spec) {
  return [&spec](int u, int t, int a, const double* x) {
    const int M = spec.intervals;
    const double b = M_PI / 8.0 * (spec.coords[u].x + spec.coords[u].y);
    double value = 5.0 + 2.0 * x[2] * std::sin(b + M_PI / 8.0 * (t + 1.0) / M + spec.s * (x[0] + x[1]));
    for (int k = t + 1; k < M; ++k) {
      value += 5.0 + 2.0 * (2.0 + a) * std::sin(b + M_PI / 8.0 * (k + 1.0) / M + 2.0 * spec.s * a);
    }
    return value;
  };
}

double nonparam_tau(const DgpSpec& spec) {
  const double x1[4] = {1, 1, 2, 2}, x0[4] = {0, 0, 2, 2};
  const QFunction q = nonparam_q(spec);
  double tau = 0.0;
  for (int u = 0; u < spec.units; ++u) tau += q(u, 0, 1, x1) - q(u, 0, 0, x0);
  return tau;
}

Outcome zero_noise() {
  Outcome o;
  NoiseSwitches off;
  off.outcome = off.state = false;
  double worst_static_ols = 0.0, worst = 0.0;
  int runs = 0;
  auto rel = [](double est, double tau) { return std::fabs(est - tau) / std::max(1.0, std::fabs(tau)); };
  for (Tiling t : {Tiling::Square, Tiling::Triangular, Tiling::Hexagonal}) {
    const SpatialLayout L = build_layout(t, 36);
    const ClusterPartition P = build_clusters(L, 9);
    const LayoutDiagnostics D = diagnostics(L, P);
    Stream rng(static_cast<std::uint64_t>(t) + 10, {});
    const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);

    // parametric static: OLS and DR with the true outcome model
    const DgpSpec ps = make_param_static_spec(L, 1.0, rng);
    for (SpatialKind sp : {SpatialKind::Global, SpatialKind::Individual, SpatialKind::Cluster}) {
      const DesignSpec d = sp == SpatialKind::Global     ? DesignSpec::global(0.5)
                           : sp == SpatialKind::Individual ? DesignSpec::individual(L, 0.5)
                                                           : DesignSpec::cluster(P, 0.5);
      const PanelData p = simulate(ps, L, assign(d, L, 30, 1, 3), nm, 4, off);
      worst_static_ols = std::max(worst_static_ols, rel(tau_ols(p, sp, L, &P, &D).tau_hat, ps.true_tau));
      NoiseSwitches fixed = off;
      fixed.covariates = false;
      const PanelData q = simulate(ps, L, assign(d, L, 30, 1, 3), nm, 4, fixed);
      DrOptions dro;
      dro.outcome = [&](int u, const double* x) {
        const auto& c = ps.cell(u, 0);
        return c.alpha + c.beta[0] * x[2] + c.gamma * x[0] + c.theta * x[1];
      };
      worst = std::max(worst, rel(dr_crossfit(q, d, L, dro).est.tau_hat, ps.true_tau));
      runs += 2;

      // semiparametric static: DR with the true outcome model at fixed covariates
      const double s = 0.01;
      const DgpSpec ss = make_semiparam_static_spec(L, s);
      const PanelData sp_panel = simulate(ss, L, assign(d, L, 30, 1, 5), nm, 6, fixed);
      DrOptions semi;
      semi.outcome = [&](int u, const double* x) {
        return 5.0 + 3.0 * (x[2] + x[3]) * std::sin(M_PI / 8 * (L.coord(u).x + L.coord(u).y) + s * x[0] + 0.5 * s * x[1]);
      };
      double tau = 0.0;
      for (int u = 0; u < L.size(); ++u) {
        const double b = M_PI / 8 * (L.coord(u).x + L.coord(u).y);
        tau += 24.0 * (std::sin(b + 1.5 * s) - std::sin(b));
      }
      worst = std::max(worst, rel(dr_crossfit(sp_panel, d, L, semi).est.tau_hat, tau));
      ++runs;

      // dynamic kinds under independent temporal randomization
      const DesignSpec dd = sp == SpatialKind::Global     ? DesignSpec::global(0.5, TemporalKind::Independent)
                            : sp == SpatialKind::Individual ? DesignSpec::individual(L, 0.5, TemporalKind::Independent)
                                                            : DesignSpec::cluster(P, 0.5, TemporalKind::Independent);
      for (int M : {2, 3}) {
        const DgpSpec pd = make_param_dynamic_spec(L, M, 1.0, rng);
        const PanelData p2 = simulate(pd, L, assign(dd, L, 30, M, 7), nm, 8, off);
        worst = std::max(worst, rel(tau_ols_dynamic(p2, sp, L, &P, &D, {0, 1}).tau_hat, pd.true_tau));
        DrlOptions dlo;
        dlo.q = linear_q(pd);
        worst = std::max(worst, rel(drl_estimate(p2, dd, L, dlo).est.tau_hat, pd.true_tau));

        const DgpSpec nd = make_nonparam_dynamic_spec(L, M, 0.5);
        const PanelData p3 = simulate(nd, L, assign(dd, L, 30, M, 9), nm, 10, off);
        DrlOptions nq;
        nq.q = nonparam_q(nd);
        worst = std::max(worst, rel(drl_estimate(p3, dd, L, nq).est.tau_hat, nonparam_tau(nd)));
        runs += 3;
      }
    }
  }
  o.detail << runs << " noiseless fits; static OLS max rel err " << f3(worst_static_ols) << ", others "
           << f3(worst);
  o.require(worst_static_ols <= 1e-8, "static OLS 1e-8");
  o.require(worst <= 1e-6, "other estimators 1e-6");
  return o;
}

// ---- 3 -------------------------------------------------------------------

Outcome closed_form_identity() {
  Outcome o;
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  double worst = 0.0;
  int draws = 0;
  for (int M : {1, 2, 3, 6}) {
    for (int k = 0; k < 20; ++k) {
      Stream rng(1000 + 31 * M + k, {});
      const DgpSpec spec = make_param_dynamic_spec(L, M, 1.0, rng, 1 + k % 2);
      const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
      NoiseSwitches off;
      off.outcome = off.state = false;
      double total[2] = {0, 0};
      for (int a = 0; a < 2; ++a) {
        AssignmentTensor A(1, L.size(), M);
        for (int u = 0; u < L.size(); ++u)
          for (int t = 0; t < M; ++t) A.set(0, u, t, a);
        refresh_mean_field(A, L);
        const PanelData p = simulate(spec, L, A, nm, 77, off);
        for (int u = 0; u < L.size(); ++u)
          for (int t = 0; t < M; ++t) total[a] += p.y(0, u, t);
      }
      const double rollout = total[1] - total[0];
      worst = std::max(worst, std::fabs(linear_true_ate(spec) - rollout) / std::max(1.0, std::fabs(rollout)));
      ++draws;
    }
  }
  o.detail << draws << " draws, max rel |closed form - rollout| = " << f3(worst);
  o.require(worst <= 1e-8, "tolerance 1e-8");
  return o;
}

// ---- 4 -------------------------------------------------------------------

Outcome type_one() {
  Outcome o;
  ExperimentConfig c = base(Tiling::Square, {36}, DgpKind::ParamStatic, {0.0}, {0.6}, 500, 2024);
  const MonteCarloReport r = mc(c);
  for (SpatialKind d : {SpatialKind::Global, SpatialKind::Individual, SpatialKind::Cluster}) {
    const ReportRow& row = row_of(r, Tiling::Square, 36, d);
    o.detail << to_string(d) << "=" << f3(row.reject_rate) << " ";
    o.require(row.reject_rate >= 0.03 && row.reject_rate <= 0.08, std::string(to_string(d)) + " outside [0.03,0.08]");
    o.require(!row.failed, "failure budget");
  }
  return o;
}

// ---- 5 -------------------------------------------------------------------

Outcome parametric_ratios() {
  Outcome o;
  const MonteCarloReport big = mc(base(Tiling::Triangular, {144}, DgpKind::ParamStatic, {1.0}, {0.9}, 500, 5));
  const ReportRow& g = row_of(big, Tiling::Triangular, 144, SpatialKind::Global);
  o.detail << "tri R=144: r1=" << f3(g.r1) << " r2=" << f3(g.r2);
  o.require(g.r1 > 0.05 && g.r1 < 0.30, "r1 band at R=144");
  o.require(g.r2 > 0.08 && g.r2 < 0.35, "r2 band at R=144");

  const MonteCarloReport tri = mc(base(Tiling::Triangular, {36}, DgpKind::ParamStatic, {1.0}, {0.9}, 500, 5));
  const MonteCarloReport hex = mc(base(Tiling::Hexagonal, {36}, DgpKind::ParamStatic, {1.0}, {0.9}, 500, 5));
  const ReportRow& t36 = row_of(tri, Tiling::Triangular, 36, SpatialKind::Global);
  const ReportRow& h36 = row_of(hex, Tiling::Hexagonal, 36, SpatialKind::Global);
  o.detail << "; R=36 tri r1=" << f3(t36.r1) << " r2=" << f3(t36.r2) << ", hex r1=" << f3(h36.r1)
           << " r2=" << f3(h36.r2);
  o.require(t36.r1 < t36.r2, "tri R=36 r1 < r2");
  o.require(h36.r1 > h36.r2, "hex R=36 r1 > r2");
  return o;
}

// ---- 6 -------------------------------------------------------------------

Outcome semiparametric_ratios() {
  Outcome o;
  ExperimentConfig c = base(Tiling::Triangular, {36, 144}, DgpKind::SemiparamStatic, {0.01}, {0.9}, 200, 6);
  c.estimators.methods = {Method::DR};
  const MonteCarloReport r = mc(c);
  const ReportRow& a = row_of(r, Tiling::Triangular, 36, SpatialKind::Global);
  const ReportRow& b = row_of(r, Tiling::Triangular, 144, SpatialKind::Global);
  o.detail << "tri DR R=36 r1=" << f3(a.r1) << " r2=" << f3(a.r2) << "; R=144 r1=" << f3(b.r1) << " r2=" << f3(b.r2);
  o.require(b.r1 > 0.03 && b.r1 < 0.35, "r1 band at R=144");
  o.require(b.r2 > 0.03 && b.r2 < 0.35, "r2 band at R=144");
  o.require(b.r1 < 0.30 && b.r2 < 0.35, "below the parametric upper bands");
  o.require(b.r1 < a.r1, "r1 decreasing in R");
  for (const auto& row : r.rows) o.require(!row.failed, "failure budget");
  return o;
}

// ---- 7 -------------------------------------------------------------------

Outcome scaling_law() {
  Outcome o;
  ExperimentConfig c = base(Tiling::Square, {36, 144, 324}, DgpKind::ParamStatic, {1.0}, {0.9}, 500, 7);
  c.design.spatial = {SpatialKind::Global, SpatialKind::Individual};
  const MonteCarloReport r = mc(c);
  std::vector<double> x, y;
  for (int R : {36, 144, 324}) {
    const double r1 = row_of(r, Tiling::Square, R, SpatialKind::Global).r1;
    o.detail << "R=" << R << " r1=" << f3(r1) << " ";
    x.push_back(std::log(R));
    y.push_back(std::log(r1));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / 3, my = std::accumulate(y.begin(), y.end(), 0.0) / 3;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 3; ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  const double slope = sxy / sxx;
  o.detail << "slope=" << f3(slope);
  o.require(slope >= -1.4 && slope <= -0.6, "slope in [-1.4,-0.6]");
  return o;
}

// ---- 8 -------------------------------------------------------------------

Outcome power() {
  Outcome o;
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(0.25 * k);
  const MonteCarloReport r = mc(base(Tiling::Square, {144}, DgpKind::ParamStatic, grid, {0.6}, 500, 8));
  const double g = row_of(r, Tiling::Square, 144, SpatialKind::Global, 1.0).reject_rate;
  const double i = row_of(r, Tiling::Square, 144, SpatialKind::Individual, 1.0).reject_rate;
  const double c = row_of(r, Tiling::Square, 144, SpatialKind::Cluster, 1.0).reject_rate;
  o.detail << "s=1: global=" << f3(g) << " individual=" << f3(i) << " cluster=" << f3(c);
  o.require(i >= g + 0.15, "individual >= global + 0.15");
  o.require(c >= g + 0.15, "cluster >= global + 0.15");
  for (SpatialKind d : {SpatialKind::Global, SpatialKind::Individual, SpatialKind::Cluster}) {
    double best = -1.0;
    for (double s : grid) {
      const double rate = row_of(r, Tiling::Square, 144, d, s).reject_rate;
      o.require(rate >= best - 0.05, std::string(to_string(d)) + " not monotone in s");
      best = std::max(best, rate);
    }
  }
  return o;
}

// ---- 9 -------------------------------------------------------------------

Outcome double_robustness() {
  Outcome o;
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const DesignSpec d = DesignSpec::individual(L, 0.5);
  const double s = 0.01;
  const DgpSpec spec = make_semiparam_static_spec(L, s);
  const double tau = true_ate(spec, L, 200000, 91).tau;
  const PropensityModel wrong_pi = propensity(SpatialKind::Individual, L, nullptr, 0.4);

  DrOptions wrong_h;  // misspecified outcome model, correct propensities
  wrong_h.outcome = [](int, const double* x) { return 5.0 + x[2]; };
  DrOptions wrong_p;  // fitted outcome model, corrupted propensities
  wrong_p.propensity = wrong_pi;

  const int reps = 200;
  std::vector<double> e1(reps), e2(reps);
  std::vector<std::thread> pool;
  const int T = threads();
  for (int w = 0; w < T; ++w) {
    pool.emplace_back([&, w] {
      for (int r = w; r < reps; r += T) {
        Stream rng(9000 + r, {5});
        const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
        const PanelData p = simulate(spec, L, assign(d, L, 2000, 1, 9000 + r), nm, 19000 + r);
        e1[r] = dr_crossfit(p, d, L, wrong_h).est.tau_hat - tau;
        DrOptions opt = wrong_p;
        opt.seed = r;
        e2[r] = dr_crossfit(p, d, L, opt).est.tau_hat - tau;
      }
    });
  }
  for (auto& t : pool) t.join();
  auto summarize = [&](const std::vector<double>& e, const char* name) {
    const double m = std::accumulate(e.begin(), e.end(), 0.0) / reps;
    double ss = 0;
    for (double v : e) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / (reps - 1) / reps);
    o.detail << name << ": bias=" << f3(m) << " se=" << f3(se) << " ";
    o.require(std::fabs(m) <= 3 * se, std::string(name) + " |bias| > 3 SE");
  };
  summarize(e1, "wrong-h/right-pi");
  summarize(e2, "right-h/wrong-pi");
  return o;
}

// ---- 10 ------------------------------------------------------------------

Outcome drl_reduction_and_coverage() {
  Outcome o;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Tiling t = static_cast<Tiling>(k % 3);
    const SpatialLayout L = build_layout(t, 36);
    const ClusterPartition P = build_clusters(L, 9);
    const DesignSpec designs[] = {DesignSpec::global(0.5), DesignSpec::individual(L, 0.5), DesignSpec::cluster(P, 0.5)};
    const DesignSpec& d = designs[k % 3];
    Stream rng(300 + k, {});
    const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
    const DgpSpec spec = k % 2 ? make_semiparam_static_spec(L, 0.5) : make_param_static_spec(L, 1.0, rng);
    const PanelData p = simulate(spec, L, assign(d, L, 30, 1, 400 + k), nm, 500 + k);
    DrOptions a;
    a.seed = k;
    DrlOptions b;
    b.seed = k;
    const double x = dr_crossfit(p, d, L, a).est.tau_hat;
    const double y = drl_estimate(p, d, L, b).est.tau_hat;
    worst = std::max(worst, std::fabs(x - y) / std::max(1.0, std::fabs(x)));
  }
  o.detail << "M=1 max rel |DRL - DR| = " << f3(worst);
  o.require(worst <= 1e-10, "M=1 equality 1e-10");

  ExperimentConfig c = base(Tiling::Square, {16}, DgpKind::ParamDynamic, {1.0}, {0.6}, 200, 10);
  c.layout.cluster_size = 4;
  c.dgp.M = 2;
  c.dgp.N = 2000;
  c.design.spatial = {SpatialKind::Global};
  c.design.temporal = {TemporalKind::Independent};
  c.estimators.methods = {Method::DRL};
  const MonteCarloReport r = mc(c);
  int covered = 0, covered95 = 0, n = 0;
  const double tau = r.rows.at(0).true_tau;
  for (const auto& rec : r.records) {
    if (!rec.ok) continue;
    ++n;
    const double err = std::fabs(rec.tau_hat - tau), se = std::sqrt(rec.var_hat);
    covered += err <= 3 * se;
    covered95 += err <= 1.959963984540054 * se;
  }
  const double cov = n ? static_cast<double>(covered) / n : 0.0;
  o.detail << "; dynamic coverage (3 se) = " << f3(cov) << " over " << n << " reps, 1.96 se = "
           << f3(n ? static_cast<double>(covered95) / n : 0.0);
  o.require(cov >= 0.93, "coverage >= 0.93");
  o.require(!r.rows.at(0).failed, "failure budget");
  return o;
}

// ---- 11 ------------------------------------------------------------------

Outcome determinism(const std::vector<std::string>& first) {
  Outcome o;
  int same = 0;
  for (std::size_t k = 0; k < g_runs.size(); ++k) {
    // rerun with a different worker count; the report must not change
    const std::string again = report_csv(run_mc(g_runs[k], std::max(1, threads() == 1 ? 2 : 1)));
    if (again == first[k]) ++same;
  }
  o.detail << same << "/" << g_runs.size() << " Monte Carlo runs byte-identical on rerun";
  o.require(same == static_cast<int>(g_runs.size()) && !g_runs.empty(), "rerun differs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int k = 1; k < argc; ++k) only.push_back(std::atoi(argv[k]));
  auto wanted = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "propensity oracle", propensity_oracle},
      {2, "zero-noise exactness", zero_noise},
      {3, "dynamic ATE closed form", closed_form_identity},
      {4, "type-I error", type_one},
      {5, "parametric MSE ratios", parametric_ratios},
      {6, "semiparametric DR MSE ratios", semiparametric_ratios},
      {7, "scaling of r1 in R", scaling_law},
      {8, "power dominance", power},
      {9, "double robustness", double_robustness},
      {10, "DRL reduction and coverage", drl_reduction_and_coverage},
  };

  bool all = true;
  for (const auto& c : criteria) {
    if (!wanted(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && out.pass;
    std::printf("%s %2d %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  if (wanted(11)) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    if (g_runs.empty()) {
      // nothing ran yet: use a small type-I cell
      mc(base(Tiling::Square, {36}, DgpKind::ParamStatic, {0.0}, {0.6}, 100, 2024));
    }
    out = determinism(g_csv);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all = all && out.pass;
    std::printf("%s %2d %s: %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", 11, "determinism", out.detail.str().c_str(),
                secs);
  }
  return all ? 0 : 1;
}
