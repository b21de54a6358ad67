#include "splab/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "splab/carryover.hpp"
#include "splab/normal.hpp"

namespace splab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kCovariateMean = 4.0;

// N(4, 1) truncated to (3, 5), by inversion so each draw consumes one uniform.
double truncated_covariate(double u) {
  static const double lo = normal_cdf(-1.0);
  static const double hi = normal_cdf(1.0);
  const double p = std::clamp(lo + u * (hi - lo), 1e-300, 1.0 - 1e-16);
  return kCovariateMean + normal_quantile(p);
}

// Spatial surface f(x) + g(y) built from two fresh Fourier series.
struct Surface {
  FourierSeries f;
  FourierSeries g;
  static Surface draw(Stream& rng) { return {FourierSeries::draw(rng), FourierSeries::draw(rng)}; }
  double operator()(const Point& p) const { return f(p.x) + g(p.y); }
};

double checked_total(double total, const char* what) {
  if (!std::isfinite(total) || std::fabs(total) < 1e-12) {
    throw NumericalError(std::string("normalising sum of ") + what + " is zero or not finite");
  }
  return total;
}

void check_dims(const DgpSpec& spec, const SpatialLayout& layout, const AssignmentTensor& assignments,
                const NoiseModel& noise) {
  if (spec.units != layout.size() || assignments.units() != layout.size() || noise.units() != layout.size()) {
    throw InvalidInput("dgp spec, assignments, noise model and layout disagree on the unit count");
  }
  if (assignments.intervals() != spec.intervals) {
    throw InvalidInput("assignments have " + std::to_string(assignments.intervals()) + " intervals, spec has " +
                       std::to_string(spec.intervals));
  }
  if (spec.parametric()) {
    if (spec.cells.size() != static_cast<std::size_t>(spec.units) * spec.intervals) {
      throw InvalidInput("parametric spec has the wrong number of coefficient cells");
    }
    for (const auto& c : spec.cells) {
      bool finite = std::isfinite(c.alpha) && std::isfinite(c.gamma) && std::isfinite(c.theta) &&
                    c.beta.allFinite() && c.beta.size() == spec.dim;
      if (spec.kind == DgpKind::ParamDynamic) {
        finite = finite && c.Lambda.allFinite() && c.Gamma.allFinite() && c.Theta.allFinite() && c.B.allFinite();
      }
      if (!finite) throw InvalidInput("non-finite or mis-sized coefficient in dgp spec");
    }
  }
}

double phase(const Point& p) { return kPi / 8.0 * (p.x + p.y); }

// Expected control outcomes and states of a parametric spec under all-zero
// treatment, with the initial state at its mean.
struct ControlMeans {
  double outcome_total = 0.0;
  Eigen::VectorXd state_total;
};

ControlMeans control_means(const DgpSpec& spec) {
  ControlMeans out;
  out.state_total = Eigen::VectorXd::Zero(spec.dim);
  for (int u = 0; u < spec.units; ++u) {
    Eigen::VectorXd state = Eigen::VectorXd::Constant(spec.dim, kCovariateMean);
    for (int t = 0; t < spec.intervals; ++t) {
      const auto& c = spec.cell(u, t);
      out.outcome_total += c.alpha + c.beta.dot(state);
      out.state_total += state;
      if (t + 1 < spec.intervals) state = c.Lambda + c.B * state;
    }
  }
  return out;
}

}  // namespace

double FourierSeries::operator()(double x) const {
  double v = a0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double w = static_cast<double>(k + 1) * kPi * x;
    v += a[k] * std::cos(w) + b[k] * std::sin(w);
  }
  return v;
}

FourierSeries FourierSeries::draw(Stream& rng, int order) {
  FourierSeries f;
  f.a0 = rng.uniform();
  for (int k = 0; k < order; ++k) {
    f.a.push_back(rng.uniform());
    f.b.push_back(rng.uniform());
  }
  return f;
}

NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "exponential" || s == "exp") return NoiseKind::Exponential;
  if (s == "lowrank" || s == "low_rank") return NoiseKind::LowRank;
  throw InvalidInput("unknown noise kind '" + std::string(s) + "' (expected exponential or lowrank)");
}

std::string_view to_string(NoiseKind k) { return k == NoiseKind::Exponential ? "exponential" : "lowrank"; }

Eigen::VectorXd NoiseModel::sample(Stream& rng) const {
  Eigen::VectorXd z(units());
  for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = rng.normal();
  return factor.triangularView<Eigen::Lower>() * z;
}

NoiseModel make_noise(NoiseKind kind, double rho, const SpatialLayout& layout, Stream& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("noise correlation rho must lie in [0,1)");
  const int R = layout.size();
  NoiseModel nm;
  nm.kind = kind;
  nm.rho = rho;
  nm.cov.resize(R, R);
  if (kind == NoiseKind::Exponential) {
    for (int i = 0; i < R; ++i) {
      for (int j = 0; j < R; ++j) {
        const double dx = layout.coord(i).x - layout.coord(j).x;
        const double dy = layout.coord(i).y - layout.coord(j).y;
        nm.cov(i, j) = std::pow(rho, std::sqrt(dx * dx + dy * dy) / 2.0);
      }
    }
  } else {
    std::vector<int> order(R);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    const int loaded = static_cast<int>(std::ceil(rho * R - 1e-12));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(R);
    for (int k = 0; k < loaded; ++k) v[order[k]] = rng.uniform(0.75, 1.0);
    nm.cov = v * v.transpose();
    nm.cov.diagonal().setOnes();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(nm.cov);
  if (llt.info() != Eigen::Success) {
    // nearest PSD matrix by eigenvalue clipping, plus a jitter for the factor
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(nm.cov);
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(0.0);
    nm.cov = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
    nm.cov.diagonal().array() += 1e-10 * std::max(1.0, nm.cov.trace() / R);
    llt.compute(nm.cov);
    if (llt.info() != Eigen::Success) throw NumericalError("noise covariance factorisation failed after PSD projection");
  }
  nm.factor = llt.matrixL();
  return nm;
}

DgpSpec make_param_static_spec(const SpatialLayout& layout, double s, Stream& rng, int dim) {
  if (s < 0.0) throw InvalidInput("signal s must be non-negative");
  if (dim < 1) throw InvalidInput("covariate dimension must be positive");
  DgpSpec spec;
  spec.kind = DgpKind::ParamStatic;
  spec.units = layout.size();
  spec.intervals = 1;
  spec.dim = dim;
  spec.s = s;
  spec.coords = layout.coords();
  spec.outcome_noise_scale = 1.0;

  const Surface alpha_surface = Surface::draw(rng);
  std::vector<Surface> beta_surfaces;
  for (int k = 0; k < dim; ++k) beta_surfaces.push_back(Surface::draw(rng));

  spec.cells.resize(spec.units);
  double alpha_total = 0.0;
  double beta_total = 0.0;
  for (int u = 0; u < spec.units; ++u) {
    auto& c = spec.cells[u];
    c.alpha = 8.0 + 2.0 * alpha_surface(layout.coord(u));
    c.beta.resize(dim);
    for (int k = 0; k < dim; ++k) c.beta[k] = beta_surfaces[k](layout.coord(u));
    alpha_total += c.alpha;
    beta_total += c.beta.sum();
  }
  const double control_total = control_means(spec).outcome_total;
  const double s_y = s / 100.0 * control_total;
  if (s_y != 0.0) {
    checked_total(alpha_total, "alpha");
    checked_total(beta_total, "beta");
  }
  for (auto& c : spec.cells) {
    c.gamma = s_y == 0.0 ? 0.0 : s_y * c.alpha / alpha_total;
    c.theta = s_y == 0.0 ? 0.0 : 0.6 * s_y * c.beta.sum() / beta_total;
  }
  spec.true_tau = linear_true_ate(spec);
  return spec;
}

DgpSpec make_semiparam_static_spec(const SpatialLayout& layout, double s) {
  DgpSpec spec;
  spec.kind = DgpKind::SemiparamStatic;
  spec.units = layout.size();
  spec.intervals = 1;
  spec.dim = 1;
  spec.s = s;
  spec.coords = layout.coords();
  spec.outcome_noise_scale = 0.5;
  return spec;
}

DgpSpec make_param_dynamic_spec(const SpatialLayout& layout, int intervals, double s, Stream& rng, int dim) {
  if (s < 0.0) throw InvalidInput("signal s must be non-negative");
  if (intervals < 1) throw InvalidInput("dynamic spec needs M >= 1");
  if (dim < 1) throw InvalidInput("covariate dimension must be positive");
  DgpSpec spec;
  spec.kind = DgpKind::ParamDynamic;
  spec.units = layout.size();
  spec.intervals = intervals;
  spec.dim = dim;
  spec.s = s;
  spec.coords = layout.coords();
  spec.outcome_noise_scale = 1.0;
  spec.state_noise_scale = 0.1;

  const int M = intervals;
  const int d = dim;
  // temporal profiles are evaluated at normalised time t / M
  const FourierSeries h_alpha = FourierSeries::draw(rng);
  const Surface s_alpha = Surface::draw(rng);
  std::vector<FourierSeries> h_beta, h_lambda;
  std::vector<Surface> s_beta, s_lambda;
  for (int k = 0; k < d; ++k) {
    h_beta.push_back(FourierSeries::draw(rng));
    s_beta.push_back(Surface::draw(rng));
    h_lambda.push_back(FourierSeries::draw(rng));
    s_lambda.push_back(Surface::draw(rng));
  }
  std::vector<FourierSeries> h_B;
  std::vector<Surface> s_B;
  for (int k = 0; k < d * d; ++k) {
    h_B.push_back(FourierSeries::draw(rng));
    s_B.push_back(Surface::draw(rng));
  }

  spec.cells.resize(static_cast<std::size_t>(spec.units) * M);
  double b_min = std::numeric_limits<double>::infinity();
  double b_max = -std::numeric_limits<double>::infinity();
  for (int u = 0; u < spec.units; ++u) {
    const Point& p = layout.coord(u);
    for (int t = 0; t < M; ++t) {
      const double tn = static_cast<double>(t + 1) / M;
      auto& c = spec.cells[static_cast<std::size_t>(u) * M + t];
      c.alpha = h_alpha(tn) * (8.0 + 2.0 * s_alpha(p));
      c.beta.resize(d);
      c.Lambda.resize(d);
      c.B.resize(d, d);
      for (int k = 0; k < d; ++k) {
        c.beta[k] = h_beta[k](tn) * s_beta[k](p);
        c.Lambda[k] = h_lambda[k](tn) * s_lambda[k](p);
        for (int l = 0; l < d; ++l) {
          const double raw = h_B[k * d + l](tn) * s_B[k * d + l](p);
          c.B(k, l) = raw;
          b_min = std::min(b_min, raw);
          b_max = std::max(b_max, raw);
        }
      }
    }
  }
  const double span = b_max - b_min;
  for (auto& c : spec.cells) {
    for (Eigen::Index k = 0; k < c.B.size(); ++k) {
      c.B.data()[k] = span > 0.0 ? 0.5 * (c.B.data()[k] - b_min) / span + 0.3 : 0.55;
    }
    if (d > 1) {
      const double radius = c.B.eigenvalues().cwiseAbs().maxCoeff();
      if (radius > 0.8) c.B *= 0.8 / radius;
    }
  }

  const ControlMeans control = control_means(spec);
  const double s_y = s / 100.0 * control.outcome_total;
  const Eigen::VectorXd s_x = s / 100.0 * control.state_total;
  double alpha_total = 0.0;
  double beta_total = 0.0;
  Eigen::VectorXd lambda_total = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd b_total = Eigen::VectorXd::Zero(d);
  for (const auto& c : spec.cells) {
    alpha_total += c.alpha;
    beta_total += c.beta.sum();
    lambda_total += c.Lambda;
    b_total += c.B.rowwise().sum();
  }
  const bool active = s != 0.0;
  if (active) {
    checked_total(alpha_total, "alpha");
    checked_total(beta_total, "beta");
    for (int k = 0; k < d; ++k) {
      checked_total(lambda_total[k], "Lambda");
      checked_total(b_total[k], "B");
    }
  }
  for (auto& c : spec.cells) {
    c.gamma = active ? s_y * c.alpha / alpha_total : 0.0;
    c.theta = active ? 0.6 * s_y * c.beta.sum() / beta_total : 0.0;
    c.Gamma = Eigen::VectorXd::Zero(d);
    c.Theta = Eigen::VectorXd::Zero(d);
    if (active) {
      const Eigen::VectorXd rows = c.B.rowwise().sum();
      for (int k = 0; k < d; ++k) {
        c.Gamma[k] = s_x[k] * c.Lambda[k] / lambda_total[k];
        c.Theta[k] = 0.6 * s_x[k] * rows[k] / b_total[k];
      }
    }
  }
  spec.true_tau = linear_true_ate(spec);
  return spec;
}

DgpSpec make_nonparam_dynamic_spec(const SpatialLayout& layout, int intervals, double s) {
  if (intervals < 1) throw InvalidInput("dynamic spec needs M >= 1");
  DgpSpec spec;
  spec.kind = DgpKind::NonparamDynamic;
  spec.units = layout.size();
  spec.intervals = intervals;
  spec.dim = 1;
  spec.s = s;
  spec.coords = layout.coords();
  spec.outcome_noise_scale = 0.5;
  return spec;
}

DgpSpec make_dgp_spec(DgpKind kind, const SpatialLayout& layout, int intervals, double s, Stream& rng, int dim) {
  switch (kind) {
    case DgpKind::ParamStatic: return make_param_static_spec(layout, s, rng, dim);
    case DgpKind::SemiparamStatic: return make_semiparam_static_spec(layout, s);
    case DgpKind::ParamDynamic: return make_param_dynamic_spec(layout, intervals, s, rng, dim);
    case DgpKind::NonparamDynamic: return make_nonparam_dynamic_spec(layout, intervals, s);
  }
  throw InvalidInput("unknown dgp kind");
}

double linear_true_ate(const DgpSpec& spec) {
  if (!spec.parametric()) throw InvalidInput("closed-form ATE needs a parametric spec");
  const int M = spec.intervals;
  double tau = 0.0;
  for (int u = 0; u < spec.units; ++u) {
    if (spec.kind == DgpKind::ParamStatic) {
      tau += spec.cell(u, 0).gamma + spec.cell(u, 0).theta;
      continue;
    }
    std::vector<Eigen::VectorXd> betas;
    std::vector<Eigen::MatrixXd> Bs;
    for (int t = 0; t < M; ++t) {
      betas.push_back(spec.cell(u, t).beta);
      Bs.push_back(spec.cell(u, t).B);
    }
    const CarryoverChain chain = carryover(betas, Bs, M);
    for (int t = 0; t < M; ++t) {
      const auto& c = spec.cell(u, t);
      tau += c.gamma + c.theta + chain.c[t].dot(c.Gamma + c.Theta);
    }
  }
  return tau;
}

PanelData simulate(const DgpSpec& spec, const SpatialLayout& layout, const AssignmentTensor& assignments,
                   const NoiseModel& noise, std::uint64_t seed, const NoiseSwitches& switches) {
  check_dims(spec, layout, assignments, noise);
  const int N = assignments.days();
  const int R = spec.units;
  const int M = spec.intervals;
  const int d = spec.dim;
  PanelData panel(N, R, M, d);
  panel.set_assignments(assignments);

  const double e_scale = switches.outcome ? spec.outcome_noise_scale : 0.0;
  const double E_scale = switches.state ? spec.state_noise_scale : 0.0;

  for (int i = 0; i < N; ++i) {
    Stream rng(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(spec.kind)});
    switch (spec.kind) {
      case DgpKind::ParamStatic: {
        for (int u = 0; u < R; ++u) {
          for (int k = 0; k < d; ++k) {
            const double z = rng.normal();
            panel.o_ref(i, u, 0, k) = kCovariateMean + (switches.covariates ? z : 0.0);
          }
        }
        const Eigen::VectorXd e = noise.sample(rng);
        for (int u = 0; u < R; ++u) {
          const auto& c = spec.cell(u, 0);
          double y = c.alpha + c.gamma * assignments.a(i, u, 0) + c.theta * assignments.abar(i, u, 0);
          for (int k = 0; k < d; ++k) y += c.beta[k] * panel.o(i, u, 0, k);
          panel.y_ref(i, u, 0) = y + e_scale * e[u];
        }
        break;
      }
      case DgpKind::SemiparamStatic: {
        for (int u = 0; u < R; ++u) {
          const double z = rng.uniform();
          panel.o_ref(i, u, 0) = switches.covariates ? truncated_covariate(z) : kCovariateMean;
        }
        const Eigen::VectorXd e = noise.sample(rng);
        for (int u = 0; u < R; ++u) {
          double obar = 0.0;
          for (int v : layout.neighbors(u)) obar += panel.o(i, v, 0);
          obar /= static_cast<double>(layout.degree(u));
          const double arg =
              phase(spec.coords[u]) + spec.s * assignments.a(i, u, 0) + 0.5 * spec.s * assignments.abar(i, u, 0);
          panel.y_ref(i, u, 0) = 5.0 + 3.0 * (panel.o(i, u, 0) + obar) * std::sin(arg) + e_scale * e[u];
        }
        break;
      }
      case DgpKind::ParamDynamic: {
        for (int u = 0; u < R; ++u) {
          for (int k = 0; k < d; ++k) {
            const double z = rng.normal();
            panel.o_ref(i, u, 0, k) = kCovariateMean + (switches.covariates ? z : 0.0);
          }
        }
        for (int t = 0; t < M; ++t) {
          const Eigen::VectorXd e = noise.sample(rng);
          std::vector<Eigen::VectorXd> E;
          for (int k = 0; k < d; ++k) E.push_back(noise.sample(rng));
          for (int u = 0; u < R; ++u) {
            const auto& c = spec.cell(u, t);
            const int a = assignments.a(i, u, t);
            const double abar = assignments.abar(i, u, t);
            Eigen::VectorXd state(d);
            for (int k = 0; k < d; ++k) state[k] = panel.o(i, u, t, k);
            panel.y_ref(i, u, t) = c.alpha + c.beta.dot(state) + c.gamma * a + c.theta * abar + e_scale * e[u];
            if (t + 1 < M) {
              Eigen::VectorXd next = c.Lambda + c.B * state + c.Gamma * a + c.Theta * abar;
              for (int k = 0; k < d; ++k) panel.o_ref(i, u, t + 1, k) = next[k] + E_scale * E[k][u];
            }
          }
        }
        break;
      }
      case DgpKind::NonparamDynamic: {
        for (int t = 0; t < M; ++t) {
          const Eigen::VectorXd z = noise.sample(rng);
          const Eigen::VectorXd e = noise.sample(rng);
          for (int u = 0; u < R; ++u) {
            const double shift = t > 0 ? assignments.a(i, u, t - 1) : 0.0;
            panel.o_ref(i, u, t) = 2.0 + shift + (switches.state ? z[u] : 0.0);
          }
          const double tn = static_cast<double>(t + 1) / M;
          for (int u = 0; u < R; ++u) {
            const Point& p = spec.coords[u];
            const double arg = kPi / 8.0 * (p.x + p.y + tn) +
                               spec.s * (assignments.a(i, u, t) + assignments.abar(i, u, t));
            panel.y_ref(i, u, t) = 5.0 + 2.0 * panel.o(i, u, t) * std::sin(arg) + e_scale * e[u];
          }
        }
        break;
      }
    }
  }
  panel.refresh_neighbor_means(layout);
  return panel;
}

TrueAte true_ate(const DgpSpec& spec, const SpatialLayout& layout, int mc_samples, std::uint64_t seed) {
  if (spec.parametric()) return {linear_true_ate(spec), 0.0};
  if (mc_samples < 2) throw InvalidInput("Monte Carlo ATE needs at least two samples");
  const int R = spec.units;
  const int M = spec.intervals;
  double mean = 0.0;
  double m2 = 0.0;
  std::vector<double> o(R);
  for (int n = 0; n < mc_samples; ++n) {
    Stream rng(seed, {static_cast<std::uint64_t>(n), 0x7a7eULL});
    double diff = 0.0;
    if (spec.kind == DgpKind::SemiparamStatic) {
      for (int u = 0; u < R; ++u) o[u] = truncated_covariate(rng.uniform());
      for (int u = 0; u < R; ++u) {
        double obar = 0.0;
        for (int v : layout.neighbors(u)) obar += o[v];
        obar /= static_cast<double>(layout.degree(u));
        const double base = phase(spec.coords[u]);
        diff += 3.0 * (o[u] + obar) * (std::sin(base + 1.5 * spec.s) - std::sin(base));
      }
    } else {
      // all-treated and all-control rollouts share the state noise
      for (int t = 0; t < M; ++t) {
        const double tn = static_cast<double>(t + 1) / M;
        for (int u = 0; u < R; ++u) {
          const double z = rng.normal();
          const Point& p = spec.coords[u];
          const double base = kPi / 8.0 * (p.x + p.y + tn);
          const double treated_state = 2.0 + (t > 0 ? 1.0 : 0.0) + z;
          const double control_state = 2.0 + z;
          diff += 2.0 * treated_state * std::sin(base + 2.0 * spec.s) - 2.0 * control_state * std::sin(base);
        }
      }
    }
    const double delta = diff - mean;
    mean += delta / (n + 1);
    m2 += delta * (diff - mean);
  }
  const double var = m2 / (mc_samples - 1);
  return {mean, std::sqrt(var / mc_samples)};
}

}  // namespace splab
