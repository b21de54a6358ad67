#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "splab/estimate.hpp"
#include "splab/lattice.hpp"
#include "splab/panel.hpp"
#include "splab/types.hpp"

namespace splab {

/// Raised when a Gram matrix is singular or too badly conditioned to invert.
class RankDeficient : public NumericalError {
public:
  RankDeficient(const std::string& what, std::vector<std::string> columns)
      : NumericalError(what), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

private:
  std::vector<std::string> columns_;
};

/// Largest accepted condition number of the column-equilibrated Gram matrix.
inline constexpr double kMaxGramCondition = 1e10;

struct UnitRegression {
  Eigen::VectorXd coef;
  Eigen::MatrixXd gram_inv;  // (Z^T Z)^{-1}
  Eigen::VectorXd residuals;
  Eigen::VectorXd selector;  // contrast u, tau contribution = u^T coef
};

/// Least squares of Y on the columns of Z. `names` label the columns in
/// rank-deficiency errors (defaults to "x0", "x1", ...).
UnitRegression ols_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const std::vector<std::string>& names = {});

/// Regressor layout of one unit under a design.
///   Global:     (1, O, A)          u = (0, 0, 1)
///   Individual: (1, O, A, Abar)    u = (0, 0, 1, 1)
///   Cluster:    boundary units as Individual, interior units as Global
struct RegressorSpec {
  int dim = 1;
  bool with_abar = false;

  int columns() const { return 2 + dim + (with_abar ? 1 : 0); }
  std::vector<std::string> names() const;
  Eigen::VectorXd selector() const;
};

RegressorSpec regressors_for(SpatialKind design, int unit, int dim, const LayoutDiagnostics* diag);

/// Design matrix of unit `unit` at interval `t`, one row per day.
Eigen::MatrixXd design_matrix(const PanelData& panel, int unit, int t, const RegressorSpec& spec);

/// Checks that `panel` could have come from `design` and that the per-unit
/// regressions are identifiable. Cluster designs need `diag`.
void check_design_structure(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                            const ClusterPartition* partition);

/// Nondynamic plug-in estimator with the day-level influence variance.
AteEstimate tau_ols(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                    const ClusterPartition* partition = nullptr, const LayoutDiagnostics* diag = nullptr);

struct DynamicOlsOptions {
  int bootstrap = 200;  // day resamples for the variance; 0 skips it
  std::uint64_t seed = 0;
};

/// Plug-in estimator for the dynamic linear model: per (unit, t) outcome and
/// state-transition regressions combined through the carryover chain.
/// M = 1 gives exactly tau_ols.
AteEstimate tau_ols_dynamic(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                            const ClusterPartition* partition = nullptr, const LayoutDiagnostics* diag = nullptr,
                            const DynamicOlsOptions& options = {});

/// Point estimate only, used inside the bootstrap.
double tau_ols_dynamic_point(const PanelData& panel, SpatialKind design, const LayoutDiagnostics* diag);

}  // namespace splab
