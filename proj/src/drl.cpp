#include "splab/drl.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace splab {

double QFunctionSet::operator()(int unit, int t, const double* x) const {
  if (t >= intervals) return 0.0;
  return q[static_cast<std::size_t>(unit) * intervals + t].predict(x);
}

QFunctionSet q_backward(const PanelData& panel, std::span<const int> days, int a, const KernelConfig& config) {
  if (days.empty()) throw InvalidInput("Q-function fit needs training days");
  if (a != 0 && a != 1) throw InvalidInput("target action must be 0 or 1");
  const int M = panel.intervals();
  const int R = panel.units();
  const int nq = feature_count(panel.dim());
  const auto n = static_cast<Eigen::Index>(days.size());
  QFunctionSet set;
  set.a = a;
  set.units = R;
  set.intervals = M;
  set.q.resize(static_cast<std::size_t>(R) * M);
  Eigen::MatrixXd X(n, nq);
  Eigen::VectorXd target(n);
  std::vector<double> row(nq);
  for (int u = 0; u < R; ++u) {
    for (int t = M - 1; t >= 0; --t) {
      for (Eigen::Index r = 0; r < n; ++r) {
        const int i = days[r];
        features(panel, i, u, t, row.data());
        for (int c = 0; c < nq; ++c) X(r, c) = row[c];
        double next = 0.0;
        if (t + 1 < M) {
          features(panel, i, u, t + 1, row.data());
          row[0] = a;
          row[1] = a;
          next = set(u, t + 1, row.data());
        }
        target[r] = panel.y(i, u, t) + next;
      }
      set.q[static_cast<std::size_t>(u) * M + t] = KernelRegressor::fit(X, target, config);
    }
  }
  return set;
}

RatioWeights ratio_weights(const PanelData& panel, int a, TemporalKind temporal, const PropensityModel& pi,
                           double max_weight) {
  const int N = panel.days();
  const int R = panel.units();
  const int M = panel.intervals();
  if (temporal == TemporalKind::Switchback && M >= 2) {
    throw InvalidInput("switchback assignments never hold a constant action for two intervals; "
                       "importance weights of a constant-action target are identically zero from t = 2 on");
  }
  if (static_cast<int>(pi.pi.size()) != R) throw InvalidInput("propensity model does not match the panel");
  RatioWeights out;
  out.days = N;
  out.units = R;
  out.intervals = M;
  out.w.assign(static_cast<std::size_t>(N) * R * M, 0.0);
  for (int u = 0; u < R; ++u) {
    const double p = pi(u, a);
    if (!(p > 0.0)) throw InvalidInput("zero propensity for unit " + std::to_string(u));
    for (int i = 0; i < N; ++i) {
      double w = 1.0;
      for (int t = 0; t < M; ++t) {
        const bool hit = arm_indicator(a, panel.a(i, u, t), panel.abar(i, u, t));
        if (!hit) {
          w = 0.0;
        } else if (temporal != TemporalKind::Constant || t == 0) {
          w /= p;
        }
        out.w[(static_cast<std::size_t>(i) * R + u) * M + t] = std::min(w, max_weight);
      }
    }
  }
  return out;
}

DrlEstimate drl_estimate(const PanelData& panel, const DesignSpec& design, const SpatialLayout& layout,
                         const DrlOptions& options) {
  if (panel.units() != layout.size()) throw InvalidInput("panel and layout disagree on the unit count");
  if (options.clip_weights && !(options.weight_cap > 0.0)) throw InvalidInput("weight cap must be positive");
  const int N = panel.days();
  const int R = panel.units();
  const int M = panel.intervals();
  const int nq = feature_count(panel.dim());
  const std::vector<int> fold = fold_assignment(N, options.folds, options.seed);

  const PropensityModel pi = options.propensity ? *options.propensity : interval_propensity(design, layout);
  const double cap = options.clip_weights ? options.weight_cap : std::numeric_limits<double>::infinity();
  const RatioWeights mu[2] = {ratio_weights(panel, 0, design.temporal, pi, cap),
                              ratio_weights(panel, 1, design.temporal, pi, cap)};

  DrlEstimate out;
  out.est.design = design.spatial;
  out.est.method = Method::DRL;
  out.est.n_days = N;
  out.est.units = R;
  out.est.intervals = M;
  out.weights.resize(M);
  for (int t = 0; t < M; ++t) {
    double sum = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int i = 0; i < N; ++i) {
        for (int u = 0; u < R; ++u) {
          const double w = mu[a](i, u, t);
          sum += w;
          out.weights[t].max = std::max(out.weights[t].max, w);
        }
      }
    }
    out.weights[t].mean = sum / (2.0 * N * R);
  }

  std::vector<double> psi(N, 0.0);
  std::vector<double> x(nq);
  std::vector<double> xa(nq);
  for (int k = 0; k < options.folds; ++k) {
    std::vector<int> train;
    std::vector<int> test;
    for (int i = 0; i < N; ++i) (fold[i] == k ? test : train).push_back(i);
    for (int a = 0; a < 2; ++a) {
      std::optional<QFunctionSet> fitted;
      if (!options.q) fitted = q_backward(panel, train, a, options.kernel);
      auto Q = [&](int u, int t, const double* in) {
        if (t >= M) return 0.0;
        return options.q ? options.q(u, t, a, in) : (*fitted)(u, t, in);
      };
      const double sign = a == 1 ? 1.0 : -1.0;
      for (int i : test) {
        for (int u = 0; u < R; ++u) {
          features(panel, i, u, 0, xa.data());
          xa[0] = a;
          xa[1] = a;
          double value = Q(u, 0, xa.data());
          for (int t = 0; t < M; ++t) {
            const double w = mu[a](i, u, t);
            if (w == 0.0) continue;
            features(panel, i, u, t, x.data());
            double next = 0.0;
            if (t + 1 < M) {
              features(panel, i, u, t + 1, xa.data());
              xa[0] = a;
              xa[1] = a;
              next = Q(u, t + 1, xa.data());
            }
            value += w * (panel.y(i, u, t) + next - Q(u, t, x.data()));
          }
          psi[i] += sign * value;
        }
      }
    }
  }
  out.est.tau_hat = std::accumulate(psi.begin(), psi.end(), 0.0) / N;
  out.est.var_hat = influence_variance(psi);
  return out;
}

}  // namespace splab
