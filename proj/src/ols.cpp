#include "splab/ols.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "splab/carryover.hpp"
#include "splab/design.hpp"
#include "splab/inference.hpp"

namespace splab {

namespace {

std::string column_list(const std::vector<std::string>& cols) {
  std::string out;
  for (std::size_t k = 0; k < cols.size(); ++k) out += (k ? ", " : "") + cols[k];
  return out;
}

std::string unit_label(int unit, int t) {
  return "unit " + std::to_string(unit) + (t >= 0 ? " interval " + std::to_string(t) : std::string());
}

// Rethrows a rank-deficiency error with the failing regression's location.
[[noreturn]] void rethrow_located(const RankDeficient& e, int unit, int t) {
  throw RankDeficient(unit_label(unit, t) + ": " + e.what(), e.columns());
}

LayoutDiagnostics cluster_diagnostics(const SpatialLayout& layout, const ClusterPartition* partition) {
  if (!partition) throw InvalidInput("cluster design estimators need the cluster partition");
  return diagnostics(layout, *partition);
}

}  // namespace

UnitRegression ols_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& Y, const std::vector<std::string>& names) {
  const Eigen::Index n = Z.rows();
  const Eigen::Index p = Z.cols();
  if (Y.size() != n) throw InvalidInput("response length does not match the design matrix");
  if (p == 0) throw InvalidInput("design matrix has no columns");
  if (n < p) {
    throw InvalidInput("insufficient data: " + std::to_string(n) + " rows for " + std::to_string(p) + " regressors");
  }
  if (!Z.allFinite() || !Y.allFinite()) throw InvalidInput("non-finite entries in regression data");
  auto name = [&](Eigen::Index k) {
    return k < static_cast<Eigen::Index>(names.size()) ? names[k] : "x" + std::to_string(k);
  };

  const Eigen::MatrixXd G = Z.transpose() * Z;
  std::vector<std::string> zero_cols;
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!(G(k, k) > 0.0)) zero_cols.push_back(name(k));
  }
  if (!zero_cols.empty()) {
    throw RankDeficient("singular Gram matrix, all-zero columns: " + column_list(zero_cols), zero_cols);
  }
  // condition number after scaling columns to unit norm
  const Eigen::VectorXd scale = G.diagonal().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd Gs = scale.asDiagonal() * G * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Gs);
  const double lo = eig.eigenvalues()[0];
  const double hi = eig.eigenvalues()[p - 1];
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    const Eigen::VectorXd v = eig.eigenvectors().col(0).cwiseAbs();
    std::vector<std::string> cols;
    for (Eigen::Index k = 0; k < p; ++k) {
      if (v[k] >= 0.1 * v.maxCoeff()) cols.push_back(name(k));
    }
    throw RankDeficient("ill-conditioned Gram matrix (condition " + std::to_string(lo > 0.0 ? hi / lo : INFINITY) +
                            "), collinear columns: " + column_list(cols),
                        cols);
  }

  UnitRegression fit;
  fit.coef = Z.colPivHouseholderQr().solve(Y);
  fit.gram_inv = G.llt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.residuals = Y - Z * fit.coef;
  return fit;
}

std::vector<std::string> RegressorSpec::names() const {
  std::vector<std::string> out{"intercept"};
  for (int k = 0; k < dim; ++k) out.push_back(dim == 1 ? "O" : "O" + std::to_string(k + 1));
  out.push_back("A");
  if (with_abar) out.push_back("Abar");
  return out;
}

Eigen::VectorXd RegressorSpec::selector() const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(columns());
  u[1 + dim] = 1.0;
  if (with_abar) u[2 + dim] = 1.0;
  return u;
}

RegressorSpec regressors_for(SpatialKind design, int unit, int dim, const LayoutDiagnostics* diag) {
  RegressorSpec spec;
  spec.dim = dim;
  switch (design) {
    case SpatialKind::Global: spec.with_abar = false; break;
    case SpatialKind::Individual: spec.with_abar = true; break;
    case SpatialKind::Cluster:
      if (!diag) throw InvalidInput("cluster design regressors need layout diagnostics");
      spec.with_abar = !diag->is_interior[unit];
      break;
  }
  return spec;
}

Eigen::MatrixXd design_matrix(const PanelData& panel, int unit, int t, const RegressorSpec& spec) {
  const int N = panel.days();
  Eigen::MatrixXd Z(N, spec.columns());
  for (int i = 0; i < N; ++i) {
    Z(i, 0) = 1.0;
    for (int k = 0; k < spec.dim; ++k) Z(i, 1 + k) = panel.o(i, unit, t, k);
    Z(i, 1 + spec.dim) = panel.a(i, unit, t);
    if (spec.with_abar) Z(i, 2 + spec.dim) = panel.abar(i, unit, t);
  }
  return Z;
}

void check_design_structure(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                            const ClusterPartition* partition) {
  if (panel.units() != layout.size()) throw InvalidInput("panel and layout disagree on the unit count");
  const AssignmentTensor tensor = panel.assignments();
  switch (design) {
    case SpatialKind::Global:
      if (!satisfies_spatial_constraints(tensor, SpatialKind::Global, nullptr)) {
        throw InvalidInput("panel treatments vary across units; not a globally randomized panel");
      }
      break;
    case SpatialKind::Cluster:
      if (!partition) throw InvalidInput("cluster design estimators need the cluster partition");
      if (static_cast<int>(partition->assignment.size()) != layout.size()) {
        throw InvalidInput("cluster partition does not match the layout");
      }
      if (!satisfies_spatial_constraints(tensor, SpatialKind::Cluster, partition)) {
        throw InvalidInput("panel treatments vary within a cluster; not a cluster-randomized panel");
      }
      break;
    case SpatialKind::Individual:
      // A and Abar must not coincide on every day, otherwise gamma and theta
      // are not separately identifiable (globally randomized data, say)
      for (int u = 0; u < panel.units(); ++u) {
        for (int t = 0; t < panel.intervals(); ++t) {
          bool same = true;
          for (int i = 0; i < panel.days() && same; ++i) same = panel.a(i, u, t) == panel.abar(i, u, t);
          if (same) {
            throw InvalidInput("individual-design estimator is inapplicable: A and Abar coincide on every day for " +
                               unit_label(u, panel.intervals() > 1 ? t : -1) +
                               " (globally or cluster randomized data?)");
          }
        }
      }
      break;
  }
}

AteEstimate tau_ols(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                    const ClusterPartition* partition, const LayoutDiagnostics* diag) {
  if (panel.intervals() != 1) throw InvalidInput("tau_ols expects a nondynamic panel (M = 1)");
  check_design_structure(panel, design, layout, partition);
  std::optional<LayoutDiagnostics> own;
  if (design == SpatialKind::Cluster && !diag) {
    own = cluster_diagnostics(layout, partition);
    diag = &*own;
  }
  const int N = panel.days();
  const int d = panel.dim();
  AteEstimate est;
  est.design = design;
  est.method = Method::OLS;
  est.n_days = N;
  est.units = panel.units();
  est.intervals = 1;
  std::vector<double> psi(N, 0.0);
  for (int u = 0; u < panel.units(); ++u) {
    const RegressorSpec spec = regressors_for(design, u, d, diag);
    const Eigen::MatrixXd Z = design_matrix(panel, u, 0, spec);
    Eigen::VectorXd Y(N);
    for (int i = 0; i < N; ++i) Y[i] = panel.y(i, u, 0);
    if (N <= spec.columns()) {
      throw InvalidInput("insufficient data: " + std::to_string(N) + " days for " + std::to_string(spec.columns()) +
                         " regressors at " + unit_label(u, -1));
    }
    UnitRegression fit;
    try {
      fit = ols_fit(Z, Y, spec.names());
    } catch (const RankDeficient& e) {
      rethrow_located(e, u, -1);
    }
    fit.selector = spec.selector();
    est.tau_hat += fit.selector.dot(fit.coef);
    // psi_i = u^T (G/N)^{-1} z_i e_i / (1 - h_i), h_i the leverage of day i.
    // The leverage factor is the jackknife (HC3) residual; without it the
    // variance is biased low at N = 30 and the test over-rejects.
    const Eigen::VectorXd w = static_cast<double>(N) * (fit.gram_inv * fit.selector);
    for (int i = 0; i < N; ++i) {
      const double lev = Z.row(i).dot(fit.gram_inv * Z.row(i).transpose());
      if (!(1.0 - lev > 1e-8)) {
        throw NumericalError("day " + std::to_string(i) + " has leverage 1 at " + unit_label(u, -1));
      }
      psi[i] += Z.row(i).dot(w) * fit.residuals[i] / (1.0 - lev);
    }
  }
  est.var_hat = influence_variance(psi);
  return est;
}

double tau_ols_dynamic_point(const PanelData& panel, SpatialKind design, const LayoutDiagnostics* diag) {
  const int N = panel.days();
  const int M = panel.intervals();
  const int d = panel.dim();
  double tau = 0.0;
  for (int u = 0; u < panel.units(); ++u) {
    const RegressorSpec spec = regressors_for(design, u, d, diag);
    if (N <= spec.columns()) {
      throw InvalidInput("insufficient data: " + std::to_string(N) + " days for " + std::to_string(spec.columns()) +
                         " regressors per interval");
    }
    const auto names = spec.names();
    const Eigen::VectorXd sel = spec.selector();
    std::vector<Eigen::VectorXd> betas(M);
    std::vector<Eigen::MatrixXd> Bs(M, Eigen::MatrixXd::Zero(d, d));
    std::vector<double> effect_y(M);
    std::vector<Eigen::VectorXd> effect_x(M, Eigen::VectorXd::Zero(d));
    for (int t = 0; t < M; ++t) {
      const Eigen::MatrixXd Z = design_matrix(panel, u, t, spec);
      Eigen::VectorXd Y(N);
      for (int i = 0; i < N; ++i) Y[i] = panel.y(i, u, t);
      try {
        const UnitRegression out = ols_fit(Z, Y, names);
        betas[t] = out.coef.segment(1, d);
        effect_y[t] = sel.dot(out.coef);
        if (t + 1 < M) {
          // transition O_{t+1} on the same regressors, one state component at a time
          for (int k = 0; k < d; ++k) {
            Eigen::VectorXd next(N);
            for (int i = 0; i < N; ++i) next[i] = panel.o(i, u, t + 1, k);
            const Eigen::VectorXd coef = Z.colPivHouseholderQr().solve(next);
            Bs[t].row(k) = coef.segment(1, d).transpose();
            effect_x[t][k] = sel.dot(coef);
          }
        }
      } catch (const RankDeficient& e) {
        rethrow_located(e, u, t);
      }
    }
    const CarryoverChain chain = carryover(betas, Bs, M);
    for (int t = 0; t < M; ++t) tau += effect_y[t] + chain.c[t].dot(effect_x[t]);
  }
  return tau;
}

AteEstimate tau_ols_dynamic(const PanelData& panel, SpatialKind design, const SpatialLayout& layout,
                            const ClusterPartition* partition, const LayoutDiagnostics* diag,
                            const DynamicOlsOptions& options) {
  if (panel.intervals() == 1) return tau_ols(panel, design, layout, partition, diag);
  check_design_structure(panel, design, layout, partition);
  std::optional<LayoutDiagnostics> own;
  if (design == SpatialKind::Cluster && !diag) {
    own = cluster_diagnostics(layout, partition);
    diag = &*own;
  }
  AteEstimate est;
  est.design = design;
  est.method = Method::OLS;
  est.n_days = panel.days();
  est.units = panel.units();
  est.intervals = panel.intervals();
  est.tau_hat = tau_ols_dynamic_point(panel, design, diag);
  if (options.bootstrap > 0) {
    est.var_hat = day_bootstrap_var(
        panel, [&](const PanelData& p) { return tau_ols_dynamic_point(p, design, diag); }, options.bootstrap,
        options.seed);
  }
  return est;
}

}  // namespace splab
