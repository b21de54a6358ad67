#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "splab/design.hpp"
#include "splab/dr.hpp"
#include "splab/estimate.hpp"
#include "splab/kernel.hpp"
#include "splab/panel.hpp"

namespace splab {

/// Q-functions of the constant-a target policy, one regressor per (unit, t).
/// Inputs are laid out as in `features`: (A, Abar, O, Obar) at interval t.
struct QFunctionSet {
  int a = 1;
  int units = 0;
  int intervals = 0;
  std::vector<KernelRegressor> q;  // unit * M + t

  /// Q at interval t; t == M is the terminal value 0.
  double operator()(int unit, int t, const double* x) const;
};

/// Backward induction over the given training days: Q_{M-1} regresses Y_{M-1}
/// on X_{M-1}; Q_t regresses Y_t + Q_{t+1}(X^a_{t+1}) on X_t, where X^a has its
/// own and neighbourhood treatments set to a.
QFunctionSet q_backward(const PanelData& panel, std::span<const int> days, int a, const KernelConfig& config = {});

/// Realized sequential importance weights mu[day, unit, t] of target a.
struct RatioWeights {
  int days = 0;
  int units = 0;
  int intervals = 0;
  std::vector<double> w;

  double operator()(int day, int unit, int t) const {
    return w[(static_cast<std::size_t>(day) * units + unit) * intervals + t];
  }
};

/// Independent temporal design: prod_{k<=t} 1{A_k = a, Abar_k = a} / pi(a).
/// Constant temporal design: the same indicators over a single factor 1 / pi(a).
/// Switchback designs never keep a constant action for two intervals, so they
/// are rejected when M >= 2. `max_weight` caps every weight.
RatioWeights ratio_weights(const PanelData& panel, int a, TemporalKind temporal, const PropensityModel& pi,
                           double max_weight = std::numeric_limits<double>::infinity());

/// Q-function override: value of Q^a_t(x) for unit `unit`.
using QFunction = std::function<double(int unit, int t, int a, const double* x)>;

struct DrlOptions {
  int folds = 2;
  std::uint64_t seed = 0;
  bool clip_weights = false;
  double weight_cap = 1e4;
  KernelConfig kernel;
  std::optional<PropensityModel> propensity;
  QFunction q;  // overrides the fitted Q-functions
};

struct WeightSummary {
  double mean = 0.0;
  double max = 0.0;
};

struct DrlEstimate {
  AteEstimate est;
  std::vector<WeightSummary> weights;  // per interval, over days, units and both targets
};

/// Cross-fitted double reinforcement learning estimator with whole days held
/// out per fold.
DrlEstimate drl_estimate(const PanelData& panel, const DesignSpec& design, const SpatialLayout& layout,
                         const DrlOptions& options = {});

}  // namespace splab
