#include "splab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "splab/types.hpp"

namespace splab {

KernelRegressor KernelRegressor::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& config) {
  const Eigen::Index n = X.rows();
  const Eigen::Index q = X.cols();
  if (n < 1 || y.size() != n) throw InvalidInput("kernel regression needs matching, non-empty inputs and responses");
  if (!X.allFinite() || !y.allFinite()) throw InvalidInput("non-finite kernel regression data");
  if (!(config.min_bandwidth > 0.0)) throw InvalidInput("kernel bandwidth floor must be positive");

  KernelRegressor k;
  k.y_.assign(y.data(), y.data() + n);
  k.y_mean_ = y.mean();
  k.h_ = std::max(std::pow(static_cast<double>(n), -0.2), config.min_bandwidth);
  k.lo_.resize(q);
  k.hi_.resize(q);
  for (Eigen::Index c = 0; c < q; ++c) {
    k.lo_[c] = X.col(c).minCoeff();
    k.hi_[c] = X.col(c).maxCoeff();
    const double mean = X.col(c).mean();
    const double var = n > 1 ? (X.col(c).array() - mean).square().sum() / static_cast<double>(n - 1) : 0.0;
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) continue;
    k.active_.push_back(static_cast<int>(c));
    k.center_.push_back(mean);
    k.sd_.push_back(sd);
    k.inv_bw_.push_back(1.0 / (sd * k.h_));
  }
  const std::size_t p = k.active_.size();
  k.Xs_.resize(static_cast<std::size_t>(n) * p);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < p; ++j) k.Xs_[r * p + j] = X(r, k.active_[j]) * k.inv_bw_[j];
  }
  return k;
}

double KernelRegressor::predict(const double* x) const {
  const std::size_t p = active_.size();
  const std::size_t n = y_.size();
  if (p == 0) return y_mean_;
  double xs[64];
  std::vector<double> heap;
  double* q = xs;
  if (p > 64) {
    heap.resize(p);
    q = heap.data();
  }
  for (std::size_t j = 0; j < p; ++j) q[j] = x[active_[j]] * inv_bw_[j];

  // log-weights are -d2/2; shift by the smallest distance before exponentiating
  double best = std::numeric_limits<double>::infinity();
  thread_local std::vector<double> d2;
  d2.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = &Xs_[r * p];
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double diff = row[j] - q[j];
      s += diff * diff;
    }
    d2[r] = s;
    best = std::min(best, s);
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double w = std::exp(-0.5 * (d2[r] - best));
    num += w * y_[r];
    den += w;
  }
  return num / den;
}

bool KernelRegressor::extrapolates(const double* x) const {
  for (std::size_t c = 0; c < lo_.size(); ++c) {
    const double tol = 1e-12 * std::max(1.0, std::fabs(hi_[c]));
    if (x[c] < lo_[c] - tol || x[c] > hi_[c] + tol) return true;
  }
  return false;
}

std::vector<double> KernelRegressor::bandwidths() const {
  std::vector<double> out;
  for (double sd : sd_) out.push_back(sd * h_);
  return out;
}

}  // namespace splab
