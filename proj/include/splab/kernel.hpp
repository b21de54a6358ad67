#pragma once

#include <vector>

#include <Eigen/Dense>

namespace splab {

struct KernelConfig {
  double min_bandwidth = 0.05;  // in standardized units
};

/// Local-constant (Nadaraya-Watson) regression with a product Gaussian kernel.
///
/// Inputs are standardized per column; the bandwidth of every kept column is
/// max(n^{-1/5}, min_bandwidth) in standardized units, i.e. sd * n^{-1/5} on the
/// original scale. Columns without variance carry no information and are
/// dropped. Weights are normalised in log space so a prediction is always a
/// convex combination of training responses, however far the query lies from
/// the data.
class KernelRegressor {
public:
  KernelRegressor() = default;

  static KernelRegressor fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& config = {});

  double predict(const double* x) const;
  double predict(const Eigen::VectorXd& x) const { return predict(x.data()); }

  /// True when `x` leaves the training range in some column (including a
  /// constant column taking a different value).
  bool extrapolates(const double* x) const;

  int inputs() const { return static_cast<int>(lo_.size()); }
  int samples() const { return static_cast<int>(y_.size()); }
  /// Indices of the columns that enter the kernel.
  const std::vector<int>& active() const { return active_; }
  /// Bandwidths of the active columns on the original scale.
  std::vector<double> bandwidths() const;

private:
  std::vector<int> active_;
  std::vector<double> center_;  // per active column
  std::vector<double> inv_bw_;  // 1 / (sd * h) per active column
  std::vector<double> sd_;
  double h_ = 1.0;
  std::vector<double> lo_, hi_;  // training range of every column
  std::vector<double> Xs_;       // scaled active columns, row-major
  std::vector<double> y_;
  double y_mean_ = 0.0;
};

}  // namespace splab
