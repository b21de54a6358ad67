#pragma once

namespace splab {

/// Standard normal CDF, computed through erfc (absolute error well below 1e-15).
double normal_cdf(double x);

/// Upper tail 1 - Phi(x) without cancellation.
double normal_sf(double x);

/// Standard normal quantile (Wichura's AS 241, relative accuracy about 1e-16).
/// Requires 0 < p < 1.
double normal_quantile(double p);

}  // namespace splab
