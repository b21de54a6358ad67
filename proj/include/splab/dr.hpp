#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "splab/design.hpp"
#include "splab/estimate.hpp"
#include "splab/kernel.hpp"
#include "splab/lattice.hpp"
#include "splab/panel.hpp"

namespace splab {

/// pi[u][a]: probability that unit u and all of its neighbours receive a.
struct PropensityModel {
  SpatialKind design = SpatialKind::Global;
  std::vector<std::array<double, 2>> pi;

  double operator()(int unit, int a) const { return pi[unit][a]; }
};

/// Closed-form joint propensities of a design. Cluster designs need `diag`.
PropensityModel propensity(const DesignSpec& spec, const SpatialLayout& layout, const LayoutDiagnostics* diag);
/// Per-interval propensities of the design's coins. Switchback days start from a
/// fair draw, so their propensities use probability 1/2 throughout.
PropensityModel interval_propensity(const DesignSpec& spec, const SpatialLayout& layout);
/// Same with one probability p for every randomization unit.
PropensityModel propensity(SpatialKind design, const SpatialLayout& layout, const LayoutDiagnostics* diag, double p);

/// Outcome model inputs of unit `unit`, day `day`, interval `t`:
/// (A, Abar, O_1..O_d, Obar_1..Obar_d).
void features(const PanelData& panel, int day, int unit, int t, double* out);
inline int feature_count(int dim) { return 2 + 2 * dim; }

/// Kernel fit of Y on the features of one unit over the given days.
KernelRegressor fit_h(const PanelData& panel, std::span<const int> days, int unit, const KernelConfig& config = {});

/// Outcome regression h(unit, x) with x laid out as in `features`.
using OutcomeFunction = std::function<double(int unit, const double* x)>;

/// Matching tolerance of the (A, Abar) = (a, a) indicator.
inline constexpr double kIndicatorTol = 1e-12;

inline bool arm_indicator(int a, double A, double Abar) {
  return std::fabs(A - a) <= kIndicatorTol && std::fabs(Abar - a) <= kIndicatorTol;
}

/// DR estimating function: 1{A = a, Abar = a} / pi (Y - h_aa) + h_aa, where
/// h_aa is the outcome model at (a, a, O, Obar). `max_weight` caps 1 / pi.
double nu_dr(int a, double A, double Abar, double Y, double h_aa, double pi_a,
             double max_weight = std::numeric_limits<double>::infinity());

/// Same, reading unit `unit` of day `day` from a nondynamic panel.
double nu_dr(int a, int unit, int day, const OutcomeFunction& h, const PropensityModel& pi, const PanelData& panel);

struct DrDiagnostics {
  std::vector<std::array<int, 2>> arm_count;  // per unit, days with (A, Abar) = (a, a)
  int min_arm_count = 0;
  double max_weight = 0.0;  // largest inverse propensity weight actually applied
  int extrapolated = 0;     // predictions at arm points outside the training range
};

/// Splits days 0..N-1 into K folds of (nearly) equal size after a seeded
/// shuffle. Returns fold index per day.
std::vector<int> fold_assignment(int days, int folds, std::uint64_t seed);

struct DrOptions {
  int folds = 2;
  std::uint64_t seed = 0;
  bool clip_weights = false;
  double weight_cap = 1e4;
  KernelConfig kernel;
  std::optional<PropensityModel> propensity;  // overrides the design propensities
  OutcomeFunction outcome;                    // overrides the fitted outcome model
};

struct DrEstimate {
  AteEstimate est;
  double sigma_O2_hat = 0.0;
  DrDiagnostics diagnostics;
};

/// K-fold cross-fitted DR estimator of a nondynamic panel.
DrEstimate dr_crossfit(const PanelData& panel, const DesignSpec& design, const SpatialLayout& layout,
                       const DrOptions& options = {});

}  // namespace splab
