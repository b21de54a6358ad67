#pragma once

#include <cstdint>
#include <functional>

#include "splab/estimate.hpp"
#include "splab/panel.hpp"

namespace splab {

/// One-sided Wald test of H0: tau <= 0 against tau > 0.
struct WaldTest {
  double stat = 0.0;
  double delta = 0.05;
  double c_delta = 0.0;  // (1 - delta) standard normal quantile
  double p_value = 1.0;
  bool reject = false;
};

/// Throws NumericalError when var_hat is not positive and InvalidInput when
/// delta is outside (0, 0.5).
WaldTest wald(const AteEstimate& est, double delta = 0.05);
WaldTest wald(double tau_hat, double var_hat, double delta = 0.05);

/// Variance of `estimator` over `resamples` panels built by drawing days with
/// replacement. A resample on which the estimator throws is replaced by a fresh
/// one; after 3 * resamples attempts without enough successes the last error is
/// rethrown.
double day_bootstrap_var(const PanelData& panel, const std::function<double(const PanelData&)>& estimator,
                         int resamples, std::uint64_t seed);

}  // namespace splab
