#pragma once

#include <vector>

#include "splab/types.hpp"

namespace splab {

/// Point estimate of the ATE with its variance estimate.
struct AteEstimate {
  double tau_hat = 0.0;
  double var_hat = 0.0;
  SpatialKind design = SpatialKind::Global;
  Method method = Method::OLS;
  int n_days = 0;
  int units = 0;
  int intervals = 1;
};

/// Sample variance (divisor n - 1) of per-day contributions divided by n, the
/// variance of their mean.
double influence_variance(const std::vector<double>& psi);

}  // namespace splab
