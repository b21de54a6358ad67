#include "splab/dr.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "splab/rng.hpp"

namespace splab {

namespace {

const LayoutDiagnostics& resolve_diag(const DesignSpec& spec, const SpatialLayout& layout,
                                      const LayoutDiagnostics* diag, std::optional<LayoutDiagnostics>& own) {
  if (diag) return *diag;
  if (!spec.partition) throw InvalidInput("cluster design needs a cluster partition");
  own = diagnostics(layout, *spec.partition);
  return *own;
}

}  // namespace

PropensityModel propensity(const DesignSpec& spec, const SpatialLayout& layout, const LayoutDiagnostics* diag) {
  spec.validate(layout);
  PropensityModel model;
  model.design = spec.spatial;
  model.pi.resize(layout.size());
  std::optional<LayoutDiagnostics> own;
  for (int u = 0; u < layout.size(); ++u) {
    double p1 = 1.0;
    double p0 = 1.0;
    switch (spec.spatial) {
      case SpatialKind::Global:
        p1 = spec.probs[0];
        p0 = 1.0 - spec.probs[0];
        break;
      case SpatialKind::Individual: {
        p1 = spec.probs[u];
        p0 = 1.0 - spec.probs[u];
        for (int v : layout.neighbors(u)) {
          p1 *= spec.probs[v];
          p0 *= 1.0 - spec.probs[v];
        }
        break;
      }
      case SpatialKind::Cluster: {
        const LayoutDiagnostics& d = resolve_diag(spec, layout, diag, own);
        for (int j : d.touching[u]) {
          p1 *= spec.probs[j];
          p0 *= 1.0 - spec.probs[j];
        }
        break;
      }
    }
    model.pi[u] = {p0, p1};
  }
  return model;
}

PropensityModel interval_propensity(const DesignSpec& spec, const SpatialLayout& layout) {
  DesignSpec adjusted = spec;
  if (adjusted.temporal == TemporalKind::Switchback) std::fill(adjusted.probs.begin(), adjusted.probs.end(), 0.5);
  return propensity(adjusted, layout, nullptr);
}

PropensityModel propensity(SpatialKind design, const SpatialLayout& layout, const LayoutDiagnostics* diag, double p) {
  switch (design) {
    case SpatialKind::Global: return propensity(DesignSpec::global(p), layout, diag);
    case SpatialKind::Individual: return propensity(DesignSpec::individual(layout, p), layout, diag);
    case SpatialKind::Cluster: {
      if (!diag) throw InvalidInput("cluster propensities need layout diagnostics");
      PropensityModel model;
      model.design = design;
      model.pi.resize(layout.size());
      for (int u = 0; u < layout.size(); ++u) {
        const int rc = static_cast<int>(diag->touching[u].size());
        model.pi[u] = {std::pow(1.0 - p, rc), std::pow(p, rc)};
      }
      return model;
    }
  }
  throw InvalidInput("unknown design");
}

void features(const PanelData& panel, int day, int unit, int t, double* out) {
  const int d = panel.dim();
  out[0] = panel.a(day, unit, t);
  out[1] = panel.abar(day, unit, t);
  for (int k = 0; k < d; ++k) {
    out[2 + k] = panel.o(day, unit, t, k);
    out[2 + d + k] = panel.obar(day, unit, t, k);
  }
}

KernelRegressor fit_h(const PanelData& panel, std::span<const int> days, int unit, const KernelConfig& config) {
  if (days.size() < 5) throw InvalidInput("outcome regression needs at least 5 days, got " + std::to_string(days.size()));
  const int q = feature_count(panel.dim());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(days.size()), q);
  Eigen::VectorXd y(static_cast<Eigen::Index>(days.size()));
  std::vector<double> row(q);
  for (std::size_t n = 0; n < days.size(); ++n) {
    features(panel, days[n], unit, 0, row.data());
    for (int c = 0; c < q; ++c) X(static_cast<Eigen::Index>(n), c) = row[c];
    y[static_cast<Eigen::Index>(n)] = panel.y(days[n], unit, 0);
  }
  return KernelRegressor::fit(X, y, config);
}

double nu_dr(int a, double A, double Abar, double Y, double h_aa, double pi_a, double max_weight) {
  if (!(pi_a > 0.0)) throw InvalidInput("zero propensity in DR estimating function");
  if (!arm_indicator(a, A, Abar)) return h_aa;
  return std::min(1.0 / pi_a, max_weight) * (Y - h_aa) + h_aa;
}

double nu_dr(int a, int unit, int day, const OutcomeFunction& h, const PropensityModel& pi, const PanelData& panel) {
  std::vector<double> x(feature_count(panel.dim()));
  features(panel, day, unit, 0, x.data());
  const double A = x[0];
  const double Abar = x[1];
  x[0] = a;
  x[1] = a;
  return nu_dr(a, A, Abar, panel.y(day, unit, 0), h(unit, x.data()), pi(unit, a));
}

std::vector<int> fold_assignment(int days, int folds, std::uint64_t seed) {
  if (folds < 2) throw InvalidInput("cross-fitting needs K >= 2 folds");
  if (days < 2 * folds) {
    throw InvalidInput("cross-fitting with K = " + std::to_string(folds) + " needs at least " +
                       std::to_string(2 * folds) + " days, got " + std::to_string(days));
  }
  std::vector<std::uint64_t> keys(days);
  for (int i = 0; i < days; ++i) keys[i] = counter_key(seed, {0xf01dULL, static_cast<std::uint64_t>(i)});
  std::vector<int> order(days);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return keys[x] < keys[y] || (keys[x] == keys[y] && x < y); });
  std::vector<int> fold(days);
  for (int pos = 0; pos < days; ++pos) {
    fold[order[pos]] = static_cast<int>(static_cast<long long>(pos) * folds / days);
  }
  return fold;
}

DrEstimate dr_crossfit(const PanelData& panel, const DesignSpec& design, const SpatialLayout& layout,
                       const DrOptions& options) {
  if (panel.intervals() != 1) throw InvalidInput("DR estimator expects a nondynamic panel (M = 1)");
  if (panel.units() != layout.size()) throw InvalidInput("panel and layout disagree on the unit count");
  if (options.clip_weights && !(options.weight_cap > 0.0)) throw InvalidInput("weight cap must be positive");
  const int N = panel.days();
  const int R = panel.units();
  const int q = feature_count(panel.dim());
  const std::vector<int> fold = fold_assignment(N, options.folds, options.seed);

  const PropensityModel pi = options.propensity ? *options.propensity : interval_propensity(design, layout);
  if (static_cast<int>(pi.pi.size()) != R) throw InvalidInput("propensity model does not match the layout");
  const double cap = options.clip_weights ? options.weight_cap : std::numeric_limits<double>::infinity();

  DrEstimate out;
  out.est.design = design.spatial;
  out.est.method = Method::DR;
  out.est.n_days = N;
  out.est.units = R;
  out.est.intervals = 1;
  auto& diagn = out.diagnostics;
  diagn.arm_count.assign(R, {0, 0});
  for (int i = 0; i < N; ++i) {
    for (int u = 0; u < R; ++u) {
      for (int a = 0; a < 2; ++a) diagn.arm_count[u][a] += arm_indicator(a, panel.a(i, u, 0), panel.abar(i, u, 0));
    }
  }
  diagn.min_arm_count = N;
  for (const auto& c : diagn.arm_count) diagn.min_arm_count = std::min({diagn.min_arm_count, c[0], c[1]});

  std::vector<double> psi(N, 0.0);
  std::vector<double> delta(N, 0.0);
  std::vector<double> x(q);
  std::vector<double> xa(q);
  for (int k = 0; k < options.folds; ++k) {
    std::vector<int> train;
    std::vector<int> test;
    for (int i = 0; i < N; ++i) (fold[i] == k ? test : train).push_back(i);
    for (int u = 0; u < R; ++u) {
      KernelRegressor reg;
      if (!options.outcome) reg = fit_h(panel, train, u, options.kernel);
      for (int i : test) {
        features(panel, i, u, 0, x.data());
        double nu[2];
        double h[2];
        for (int a = 0; a < 2; ++a) {
          xa = x;
          xa[0] = a;
          xa[1] = a;
          if (options.outcome) {
            h[a] = options.outcome(u, xa.data());
          } else {
            h[a] = reg.predict(xa.data());
            diagn.extrapolated += reg.extrapolates(xa.data());
          }
          nu[a] = nu_dr(a, x[0], x[1], panel.y(i, u, 0), h[a], pi(u, a), cap);
          if (arm_indicator(a, x[0], x[1])) diagn.max_weight = std::max(diagn.max_weight, std::min(1.0 / pi(u, a), cap));
        }
        psi[i] += nu[1] - nu[0];
        delta[i] += h[1] - h[0];
      }
    }
  }
  out.est.tau_hat = std::accumulate(psi.begin(), psi.end(), 0.0) / N;
  out.est.var_hat = influence_variance(psi);
  const double dmean = std::accumulate(delta.begin(), delta.end(), 0.0) / N;
  for (double v : delta) out.sigma_O2_hat += (v - dmean) * (v - dmean);
  out.sigma_O2_hat /= N;
  return out;
}

}  // namespace splab
