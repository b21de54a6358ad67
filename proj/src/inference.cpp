#include "splab/inference.hpp"

#include <cmath>
#include <exception>
#include <string>
#include <vector>

#include "splab/normal.hpp"
#include "splab/rng.hpp"
#include "splab/types.hpp"

namespace splab {

double influence_variance(const std::vector<double>& psi) {
  const std::size_t n = psi.size();
  if (n < 2) throw InvalidInput("influence variance needs at least two days");
  double mean = 0.0;
  for (double v : psi) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : psi) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(n - 1) / static_cast<double>(n);
}

WaldTest wald(double tau_hat, double var_hat, double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidInput("test level delta must lie in (0, 0.5)");
  if (!(var_hat > 0.0) || !std::isfinite(var_hat)) {
    throw NumericalError("degenerate variance estimate " + std::to_string(var_hat) + " in Wald test");
  }
  WaldTest w;
  w.delta = delta;
  w.stat = tau_hat / std::sqrt(var_hat);
  w.c_delta = normal_quantile(1.0 - delta);
  w.p_value = normal_sf(w.stat);
  w.reject = w.stat >= w.c_delta;
  return w;
}

WaldTest wald(const AteEstimate& est, double delta) { return wald(est.tau_hat, est.var_hat, delta); }

double day_bootstrap_var(const PanelData& panel, const std::function<double(const PanelData&)>& estimator,
                         int resamples, std::uint64_t seed) {
  if (resamples < 100) throw InvalidInput("bootstrap needs at least 100 resamples, got " + std::to_string(resamples));
  const int N = panel.days();
  std::vector<double> values;
  values.reserve(resamples);
  std::vector<int> days(N);
  std::exception_ptr last;
  for (int attempt = 0; attempt < 3 * resamples && static_cast<int>(values.size()) < resamples; ++attempt) {
    for (int n = 0; n < N; ++n) {
      const double u = counter_uniform(seed, {static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(n)});
      days[n] = std::min(N - 1, static_cast<int>(u * N));
    }
    try {
      values.push_back(estimator(panel.select_days(days)));
    } catch (const InvalidInput&) {
      last = std::current_exception();
    } catch (const NumericalError&) {
      last = std::current_exception();
    }
  }
  if (static_cast<int>(values.size()) < resamples) {
    if (last) std::rethrow_exception(last);
    throw NumericalError("bootstrap failed");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= resamples;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (resamples - 1);
}

}  // namespace splab
