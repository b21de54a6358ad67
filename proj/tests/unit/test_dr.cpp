#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "splab/dgp.hpp"
#include "splab/dr.hpp"

using namespace splab;

namespace {

// P(A_u = a and every neighbour of u has a) by summing over all coin
// configurations of the randomization units that reach {u} + N(u).
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

PanelData semiparam_panel(const SpatialLayout& L, const DesignSpec& d, int N, double s, std::uint64_t seed,
                          bool noise = true, bool covariates = true) {
  Stream rng(seed, {5});
  const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
  NoiseSwitches sw;
  sw.outcome = noise;
  sw.covariates = covariates;
  return simulate(make_semiparam_static_spec(L, s), L, assign(d, L, N, 1, seed), nm, seed + 1, sw);
}

}  // namespace

TEST_CASE("closed-form propensities match enumeration") {
  for (Tiling t : {Tiling::Square, Tiling::Triangular, Tiling::Hexagonal}) {
    const SpatialLayout L = build_layout(t, 36);
    const ClusterPartition P = build_clusters(L, 9);
    const LayoutDiagnostics D = diagnostics(L, P);
    Stream rng(static_cast<std::uint64_t>(t), {});
    std::vector<double> unit_p(36), cluster_p(P.m);
    for (double& p : unit_p) p = rng.uniform(0.1, 0.9);
    for (double& p : cluster_p) p = rng.uniform(0.1, 0.9);
    const DesignSpec specs[] = {DesignSpec::global(0.3), DesignSpec::individual(unit_p),
                                DesignSpec::cluster(P, cluster_p), DesignSpec::individual(L, 0.5),
                                DesignSpec::cluster(P, 0.7)};
    for (const DesignSpec& spec : specs) {
      const PropensityModel pi = propensity(spec, L, &D);
      for (int u = 0; u < 36; ++u) {
        const auto ref = enumerate_propensity(spec, L, u);
        CHECK(std::fabs(pi(u, 0) - ref[0]) <= 1e-12);
        CHECK(std::fabs(pi(u, 1) - ref[1]) <= 1e-12);
        CHECK(pi(u, 0) + pi(u, 1) <= 1.0 + 1e-15);
      }
    }
  }
}

TEST_CASE("propensity examples") {
  const SpatialLayout L = build_layout(Tiling::Square, 36);
  const ClusterPartition P = build_clusters(L, 9);
  const LayoutDiagnostics D = diagnostics(L, P);
  const PropensityModel ind = propensity(SpatialKind::Individual, L, nullptr, 0.5);
  CHECK(ind(14, 1) == doctest::Approx(0.03125));
  const PropensityModel cl = propensity(SpatialKind::Cluster, L, &D, 0.5);
  for (int u = 0; u < 36; ++u) {
    if (D.is_interior[u]) CHECK(cl(u, 1) == 0.5);
    CHECK(cl(u, 1) == doctest::Approx(std::pow(0.5, D.r_c_per_unit[u])));
  }
  const PropensityModel gl = propensity(SpatialKind::Global, L, nullptr, 0.5);
  CHECK(gl(0, 0) == 0.5);
  CHECK(gl(0, 1) == 0.5);
  CHECK_THROWS_AS(propensity(SpatialKind::Cluster, L, nullptr, 0.5), InvalidInput);
  // switchback coins are fair whatever p says
  const PropensityModel sw = interval_propensity(DesignSpec::global(0.2, TemporalKind::Switchback), L);
  CHECK(sw(0, 1) == 0.5);
}

TEST_CASE("DR estimating function") {
  CHECK(nu_dr(1, 0.0, 1.0, 9.0, 2.5, 0.25) == 2.5);
  CHECK(nu_dr(1, 1.0, 0.75, 9.0, 2.5, 0.25) == 2.5);
  CHECK(nu_dr(1, 1.0, 1.0, 9.0, 0.0, 0.25) == doctest::Approx(36.0));
  CHECK(nu_dr(0, 0.0, 0.0, 3.0, 1.0, 0.5) == doctest::Approx(5.0));
  CHECK(nu_dr(1, 1.0, 1.0, 9.0, 0.0, 1e-6, 1e4) == doctest::Approx(9e4));
  CHECK_THROWS_AS(nu_dr(1, 1.0, 1.0, 9.0, 0.0, 0.0), InvalidInput);
  // Abar within the matching tolerance counts as a hit
  CHECK(nu_dr(1, 1.0, 1.0 - 1e-14, 4.0, 0.0, 0.5) == doctest::Approx(8.0));
}

TEST_CASE("kernel regression") {
  Stream rng(1, {});
  const int n = 1000;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd c3 = Eigen::VectorXd::Constant(n, 3.0);
  Eigen::VectorXd lin(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.uniform(2.0, 6.0);
    X(i, 1) = 1.0;  // constant column, dropped
    lin[i] = X(i, 0);
  }
  const KernelRegressor k3 = KernelRegressor::fit(X, c3);
  for (double x : {-100.0, 2.0, 4.0, 1e6}) {
    const double q[2] = {x, 1.0};
    CHECK(k3.predict(q) == doctest::Approx(3.0));
  }
  const KernelRegressor kl = KernelRegressor::fit(X, lin);
  CHECK(kl.active() == std::vector<int>{0});
  CHECK(kl.bandwidths().size() == 1);
  for (double x : {3.0, 3.7, 4.0, 5.0}) {
    const double q[2] = {x, 1.0};
    CHECK(std::fabs(kl.predict(q) - x) < 0.1);
    CHECK_FALSE(kl.extrapolates(q));
  }
  const double far[2] = {1e8, 1.0};
  CHECK(std::isfinite(kl.predict(far)));
  CHECK(kl.extrapolates(far));
  const double other[2] = {4.0, 0.0};
  CHECK(kl.extrapolates(other));

  // row order does not matter
  Eigen::MatrixXd Xr = X.colwise().reverse();
  Eigen::VectorXd yr = lin.reverse();
  const KernelRegressor kr = KernelRegressor::fit(Xr, yr);
  const double q[2] = {4.2, 1.0};
  CHECK(kr.predict(q) == doctest::Approx(kl.predict(q)).epsilon(1e-12));
}

TEST_CASE("single-arm training data") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  PanelData p = semiparam_panel(L, DesignSpec::global(0.5), 20, 0.01, 3);
  for (int i = 0; i < 20; ++i)
    for (int u = 0; u < 16; ++u) p.set_a(i, u, 0, 1);
  p.refresh_neighbor_means(L);
  std::vector<int> days(20);
  std::iota(days.begin(), days.end(), 0);
  const KernelRegressor h = fit_h(p, days, 5);
  std::vector<double> x(4);
  features(p, 0, 5, 0, x.data());
  CHECK(std::isfinite(h.predict(x.data())));
  CHECK_FALSE(h.extrapolates(x.data()));
  x[0] = x[1] = 0.0;
  CHECK(std::isfinite(h.predict(x.data())));
  CHECK(h.extrapolates(x.data()));
  CHECK_THROWS_AS(fit_h(p, std::span<const int>(days.data(), 4), 5), InvalidInput);

  DrOptions o;
  const DrEstimate est = dr_crossfit(p, DesignSpec::global(0.5), L, o);
  CHECK(std::isfinite(est.est.tau_hat));
  // every control query is off the treatment support; some treated queries
  // also fall outside the training range of the covariates
  CHECK(est.diagnostics.extrapolated >= 20 * 16);
  CHECK(est.diagnostics.extrapolated < 2 * 20 * 16);
  CHECK(est.diagnostics.min_arm_count == 0);
}

TEST_CASE("fold assignment") {
  const auto f = fold_assignment(31, 3, 7);
  std::vector<int> sizes(3, 0);
  for (int k : f) ++sizes[k];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(fold_assignment(31, 3, 7) == f);
  CHECK(fold_assignment(31, 3, 8) != f);
  CHECK_THROWS_AS(fold_assignment(31, 1, 7), InvalidInput);
  CHECK_THROWS_AS(fold_assignment(5, 3, 7), InvalidInput);
}

TEST_CASE("true outcome model and no noise give the exact ATE") {
  const SpatialLayout L = build_layout(Tiling::Hexagonal, 36);
  const ClusterPartition P = build_clusters(L, 9);
  const double s = 0.01;
  const DgpSpec spec = make_semiparam_static_spec(L, s);
  auto truth = [&](int u, const double* x) {
    return 5.0 + 3.0 * (x[2] + x[3]) * std::sin(M_PI / 8 * (L.coord(u).x + L.coord(u).y) + s * x[0] + 0.5 * s * x[1]);
  };
  // fixed covariates O = 4, so the sample ATE is the population ATE
  double tau = 0.0;
  for (int u = 0; u < 36; ++u) {
    const double b = M_PI / 8 * (L.coord(u).x + L.coord(u).y);
    tau += 24.0 * (std::sin(b + 1.5 * s) - std::sin(b));
  }
  const TrueAte mc = true_ate(spec, L, 20000, 1);
  CHECK(std::fabs(mc.tau - tau) <= 4 * mc.se);
  for (const DesignSpec& d : {DesignSpec::global(0.5), DesignSpec::individual(L, 0.5), DesignSpec::cluster(P, 0.5)}) {
    const PanelData p = semiparam_panel(L, d, 30, s, 4, false, false);
    DrOptions o;
    o.outcome = truth;
    const DrEstimate est = dr_crossfit(p, d, L, o);
    CHECK(est.est.tau_hat == doctest::Approx(tau).epsilon(1e-10));
    CHECK(est.sigma_O2_hat == doctest::Approx(0.0));
  }
}

TEST_CASE("unit-summed sigma_O^2") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const PanelData p = semiparam_panel(L, DesignSpec::individual(L, 0.5), 40, 0.01, 6);
  DrOptions o;
  o.outcome = [](int, const double* x) { return x[0] * x[2]; };  // h(1,1) - h(0,0) = O
  const DrEstimate est = dr_crossfit(p, DesignSpec::individual(L, 0.5), L, o);
  std::vector<double> d(40, 0.0);
  for (int i = 0; i < 40; ++i)
    for (int u = 0; u < 16; ++u) d[i] += p.o(i, u, 0);
  const double m = std::accumulate(d.begin(), d.end(), 0.0) / 40;
  double ss = 0.0;
  for (double v : d) ss += (v - m) * (v - m);
  CHECK(est.sigma_O2_hat == doctest::Approx(ss / 40).epsilon(1e-12));
}

TEST_CASE("estimate does not depend on the fold seed when nothing is fitted") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const DesignSpec d = DesignSpec::individual(L, 0.5);
  const PanelData p = semiparam_panel(L, d, 40, 0.01, 7);
  DrOptions a;
  a.outcome = [](int u, const double* x) { return 0.1 * u + x[2]; };
  DrOptions b = a;
  b.seed = 99;
  b.folds = 4;
  CHECK(dr_crossfit(p, d, L, a).est.tau_hat == doctest::Approx(dr_crossfit(p, d, L, b).est.tau_hat).epsilon(1e-12));

  DrOptions fitted;
  fitted.seed = 3;
  const DrEstimate x = dr_crossfit(p, d, L, fitted);
  const DrEstimate y = dr_crossfit(p, d, L, fitted);
  CHECK(x.est.tau_hat == y.est.tau_hat);
  CHECK(x.est.var_hat == y.est.var_hat);
}

TEST_CASE("estimating function is unbiased for the arm mean") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const ClusterPartition P = build_clusters(L, 4);
  const LayoutDiagnostics D = diagnostics(L, P);
  Stream rng(2, {});
  const DgpSpec spec = make_param_static_spec(L, 1.0, rng);
  const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
  auto h = [&](int u, const double* x) {
    const auto& c = spec.cell(u, 0);
    return c.alpha + c.beta[0] * x[2] + c.gamma * x[0] + c.theta * x[1];
  };
  const int n = 100000;
  for (const DesignSpec& d : {DesignSpec::global(0.5), DesignSpec::individual(L, 0.5), DesignSpec::cluster(P, 0.5)}) {
    const PanelData p = simulate(spec, L, assign(d, L, n, 1, 8), nm, 9);
    const PropensityModel pi = propensity(d, L, &D);
    for (int u : {0, 5}) {
      for (int a = 0; a < 2; ++a) {
        const auto& c = spec.cell(u, 0);
        const double target = c.alpha + 4.0 * c.beta[0] + (c.gamma + c.theta) * a;
        double m = 0, q = 0;
        for (int i = 0; i < n; ++i) {
          const double v = nu_dr(a, u, i, h, pi, p);
          m += v;
          q += v * v;
        }
        m /= n;
        const double se = std::sqrt((q / n - m * m) / n);
        CHECK(std::fabs(m - target) <= 3 * se);
      }
    }
  }
}

TEST_CASE("importance-sampling-only DR covers the truth") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const DesignSpec d = DesignSpec::individual(L, 0.5);
  const double s = 0.01;
  const DgpSpec spec = make_semiparam_static_spec(L, s);
  const double tau = true_ate(spec, L, 200000, 3).tau;
  DrOptions o;
  o.outcome = [](int, const double*) { return 0.0; };
  int covered = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const PanelData p = semiparam_panel(L, d, 2000, s, 100 + 3 * r);
    const DrEstimate est = dr_crossfit(p, d, L, o);
    covered += std::fabs(est.est.tau_hat - tau) <= 3 * std::sqrt(est.est.var_hat);
  }
  CHECK(covered >= 0.94 * reps);
}

TEST_CASE("variance shrinks as 1/N with exact nuisances") {
  const SpatialLayout L = build_layout(Tiling::Square, 16);
  const DesignSpec d = DesignSpec::individual(L, 0.5);
  Stream rng(3, {});
  const DgpSpec spec = make_param_static_spec(L, 0.0, rng);
  const NoiseModel nm = make_noise(NoiseKind::Exponential, 0.6, L, rng);
  DrOptions o;
  o.outcome = [&](int u, const double* x) {
    const auto& c = spec.cell(u, 0);
    return c.alpha + c.beta[0] * x[2];
  };
  std::vector<double> lx, ly;
  for (int N : {50, 100, 200, 400}) {
    std::vector<double> taus;
    for (int r = 0; r < 400; ++r) {
      const PanelData p = simulate(spec, L, assign(d, L, N, 1, 7000 + r), nm, 9000 + r);
      taus.push_back(dr_crossfit(p, d, L, o).est.tau_hat);
    }
    const double m = std::accumulate(taus.begin(), taus.end(), 0.0) / taus.size();
    double ss = 0;
    for (double t : taus) ss += (t - m) * (t - m);
    lx.push_back(std::log(N));
    ly.push_back(std::log(ss / (taus.size() - 1)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 4, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 4;
  double sxy = 0, sxx = 0;
  for (int k = 0; k < 4; ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
  const double slope = sxy / sxx;
  CHECK(slope >= -1.2);
  CHECK(slope <= -0.8);
}

TEST_CASE("realized weights grow with the neighbour count") {
  const SpatialLayout tri = build_layout(Tiling::Triangular, 36);
  const SpatialLayout hex = build_layout(Tiling::Hexagonal, 36);
  DrOptions o;
  o.outcome = [](int, const double*) { return 0.0; };
  std::vector<double> w3, w6;
  for (int seed = 0; seed < 100; ++seed) {
    const DesignSpec dt = DesignSpec::individual(tri, 0.5), dh = DesignSpec::individual(hex, 0.5);
    w3.push_back(dr_crossfit(semiparam_panel(tri, dt, 30, 0.01, seed), dt, tri, o).diagnostics.max_weight);
    w6.push_back(dr_crossfit(semiparam_panel(hex, dh, 30, 0.01, seed), dh, hex, o).diagnostics.max_weight);
  }
  std::nth_element(w3.begin(), w3.begin() + 50, w3.end());
  std::nth_element(w6.begin(), w6.begin() + 50, w6.end());
  CHECK(w6[50] > w3[50]);
}

TEST_CASE("weight clipping") {
  const SpatialLayout L = build_layout(Tiling::Hexagonal, 36);
  const DesignSpec d = DesignSpec::individual(L, 0.5);
  const PanelData p = semiparam_panel(L, d, 60, 0.01, 1);
  DrOptions o;
  o.outcome = [](int, const double*) { return 0.0; };
  o.clip_weights = true;
  o.weight_cap = 10.0;
  CHECK(dr_crossfit(p, d, L, o).diagnostics.max_weight <= 10.0);
  o.weight_cap = 0.0;
  CHECK_THROWS_AS(dr_crossfit(p, d, L, o), InvalidInput);
}
