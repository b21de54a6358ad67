#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "splab/dgp.hpp"
#include "splab/types.hpp"

namespace splab {

inline constexpr const char* kVersion = "0.1.0";

/// Malformed or inconsistent experiment configuration.
class ConfigError : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

struct ExperimentConfig {
  struct Layout {
    std::vector<Tiling> tiling{Tiling::Square};
    std::vector<int> R{36};
    int cluster_size = 9;
  } layout;
  struct Design {
    std::vector<SpatialKind> spatial{SpatialKind::Global, SpatialKind::Individual, SpatialKind::Cluster};
    std::vector<TemporalKind> temporal{TemporalKind::Constant};
    std::vector<double> p{0.5};
  } design;
  struct Dgp {
    DgpKind kind = DgpKind::ParamStatic;
    std::vector<double> s{0.0};
    std::vector<double> rho{0.6};
    NoiseKind noise = NoiseKind::Exponential;
    int M = 1;
    int N = 30;
    int d = 1;
    bool zero_noise = false;
    int true_tau_samples = 20000;
  } dgp;
  struct Estimators {
    std::vector<Method> methods{Method::OLS};
    int folds = 2;
    bool clip_weights = false;
    int bootstrap = 200;
    double delta = 0.05;
  } estimators;
  int replications = 500;
  std::uint64_t seed = 1;
  std::string output = "out";

  /// Throws ConfigError on empty grids, out-of-range values or method/design
  /// combinations that cannot be estimated.
  void validate() const;
};

/// Parses the JSON text of a config. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ExperimentConfig& config);

/// One (cell, design, method) line of the report.
struct ReportRow {
  Tiling tiling = Tiling::Square;
  int R = 0;
  int r = 0;
  double rho = 0.0;
  double s = 0.0;
  int M = 1;
  int N = 0;
  SpatialKind design = SpatialKind::Global;
  TemporalKind temporal = TemporalKind::Constant;
  double p = 0.5;
  Method method = Method::OLS;
  double true_tau = 0.0;
  double true_tau_se = 0.0;
  double bias = 0.0;
  double var = 0.0;
  double mse = 0.0;
  double reject_rate = 0.0;
  double r1 = 0.0;  // NaN when the global or individual design is absent
  double r2 = 0.0;
  int reps = 0;      // successful replications
  int failures = 0;
  bool failed = false;  // failures above the 5% budget
  double mean_runtime_ms = 0.0;
};

struct ReplicationRecord {
  int row = 0;  // index into rows
  int rep = 0;
  std::uint64_t seed = 0;
  double tau_hat = 0.0;
  double var_hat = 0.0;
  double stat = 0.0;
  bool reject = false;
  bool ok = true;
  std::string error;
};

struct MonteCarloReport {
  std::uint64_t seed = 0;
  int replications = 0;
  bool multiple_p = false;
  std::vector<ReportRow> rows;
  std::vector<ReplicationRecord> records;  // sorted by (row, rep)

  bool any_failed() const;
};

/// Runs every replication of every cell. Replications are distributed over
/// `threads` workers; the report does not depend on the schedule.
MonteCarloReport run_mc(const ExperimentConfig& config, int threads = 1);

/// Writes report.csv, cells.csv, replications.csv and one power-curve SVG per
/// group with at least two signal levels into `dir`. Runtimes go to timing.csv,
/// the only output that is not reproducible byte for byte.
void emit_reports(const MonteCarloReport& report, const std::filesystem::path& dir);

std::string report_csv(const MonteCarloReport& report);

/// Minimal SVG line chart: x = signal s, y = rejection rate, one polyline per
/// series.
struct PowerSeries {
  std::string label;
  std::string color;
  std::vector<double> x;
  std::vector<double> y;
};
std::string power_svg(const std::string& title, const std::vector<PowerSeries>& series, std::uint64_t seed);

}  // namespace splab
