#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "splab/design.hpp"
#include "splab/lattice.hpp"
#include "splab/panel.hpp"
#include "splab/rng.hpp"
#include "splab/types.hpp"

namespace splab {

/// a0 + sum_k (a_k cos(k pi x) + b_k sin(k pi x)).
struct FourierSeries {
  double a0 = 0.0;
  std::vector<double> a;
  std::vector<double> b;

  double operator()(double x) const;
  int order() const { return static_cast<int>(a.size()); }

  /// All coefficients drawn from U(0,1).
  static FourierSeries draw(Stream& rng, int order = 3);
};

enum class NoiseKind { Exponential, LowRank };

NoiseKind parse_noise_kind(std::string_view s);
std::string_view to_string(NoiseKind k);

/// Spatially correlated Gaussian noise with covariance V over units.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Exponential;
  double rho = 0.0;
  Eigen::MatrixXd cov;     // V
  Eigen::MatrixXd factor;  // lower triangular, factor * factor^T = V

  int units() const { return static_cast<int>(cov.rows()); }
  /// One draw of N(0, V).
  Eigen::VectorXd sample(Stream& rng) const;
};

/// Exponential kind: V_ij = rho^{d_ij} with d_ij half the Euclidean distance of
/// normalised centres. Low-rank kind: unit diagonal, off-diagonal (v v^T)_ij
/// with v_i ~ U(0.75, 1) on a random ceil(rho R)-subset of units and 0 elsewhere.
NoiseModel make_noise(NoiseKind kind, double rho, const SpatialLayout& layout, Stream& rng);

/// Coefficients of the linear outcome (and, when dynamic, state transition)
/// model for one (unit, interval).
struct LinearCell {
  double alpha = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  Eigen::VectorXd beta;    // d
  Eigen::VectorXd Lambda;  // d
  Eigen::VectorXd Gamma;   // d
  Eigen::VectorXd Theta;   // d
  Eigen::MatrixXd B;       // d x d
};

struct DgpSpec {
  DgpKind kind = DgpKind::ParamStatic;
  int units = 0;
  int intervals = 1;  // M
  int dim = 1;        // covariate dimension d
  double s = 0.0;     // signal: percent improvement (parametric) or raw phase shift
  std::vector<LinearCell> cells;  // unit * M + t, parametric kinds only
  std::vector<Point> coords;      // normalised unit centres
  double outcome_noise_scale = 1.0;
  double state_noise_scale = 0.1;
  double true_tau = 0.0;

  bool dynamic() const { return kind == DgpKind::ParamDynamic || kind == DgpKind::NonparamDynamic; }
  bool parametric() const { return kind == DgpKind::ParamStatic || kind == DgpKind::ParamDynamic; }
  const LinearCell& cell(int unit, int t) const { return cells[static_cast<std::size_t>(unit) * intervals + t]; }
};

DgpSpec make_param_static_spec(const SpatialLayout& layout, double s, Stream& rng, int dim = 1);
DgpSpec make_semiparam_static_spec(const SpatialLayout& layout, double s);
DgpSpec make_param_dynamic_spec(const SpatialLayout& layout, int intervals, double s, Stream& rng, int dim = 1);
DgpSpec make_nonparam_dynamic_spec(const SpatialLayout& layout, int intervals, double s);

/// Dispatches on `kind`; `intervals` is ignored for static kinds.
DgpSpec make_dgp_spec(DgpKind kind, const SpatialLayout& layout, int intervals, double s, Stream& rng, int dim = 1);

/// Which random components of the generator are active. Turning everything
/// off gives the deterministic skeleton of the model.
struct NoiseSwitches {
  bool outcome = true;     // e
  bool state = true;       // E (param dynamic) / state noise (nonparam dynamic)
  bool covariates = true;  // static covariates and the initial state of param dynamic
};

/// Generates a panel. All random draws come from streams keyed by `seed` and
/// are consumed in an order that does not depend on the treatments, so panels
/// simulated with the same seed under different designs share covariate and
/// noise draws.
PanelData simulate(const DgpSpec& spec, const SpatialLayout& layout, const AssignmentTensor& assignments,
                   const NoiseModel& noise, std::uint64_t seed, const NoiseSwitches& switches = {});

struct TrueAte {
  double tau = 0.0;
  double se = 0.0;  // Monte Carlo standard error, 0 for closed forms
};

/// Closed form for the parametric kinds; paired Monte Carlo rollouts of the
/// all-treated and all-control policies for the others.
TrueAte true_ate(const DgpSpec& spec, const SpatialLayout& layout, int mc_samples = 20000, std::uint64_t seed = 1);

/// Closed-form ATE of a parametric spec: sum over units and intervals of
/// gamma + theta + c^T (Gamma + Theta).
double linear_true_ate(const DgpSpec& spec);

}  // namespace splab
