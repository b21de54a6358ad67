#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "splab/lattice.hpp"
#include "splab/types.hpp"

namespace splab {

/// Spatial x temporal randomization scheme.
///
/// `probs` holds one probability for Global, one per unit for Individual and
/// one per cluster for Cluster designs.
struct DesignSpec {
  SpatialKind spatial = SpatialKind::Global;
  TemporalKind temporal = TemporalKind::Constant;
  std::vector<double> probs;
  std::optional<ClusterPartition> partition;

  static DesignSpec global(double p, TemporalKind temporal = TemporalKind::Constant);
  static DesignSpec individual(const SpatialLayout& layout, double p, TemporalKind temporal = TemporalKind::Constant);
  static DesignSpec individual(std::vector<double> probs, TemporalKind temporal = TemporalKind::Constant);
  static DesignSpec cluster(ClusterPartition partition, double p, TemporalKind temporal = TemporalKind::Constant);
  static DesignSpec cluster(ClusterPartition partition, std::vector<double> probs,
                            TemporalKind temporal = TemporalKind::Constant);

  /// Number of independent randomization units (1, R or m).
  int randomization_units() const { return static_cast<int>(probs.size()); }
  /// Randomization unit that drives spatial unit `unit`.
  int randomizer_of(int unit) const;
  /// Treatment probability of unit `unit`.
  double prob_of_unit(int unit) const { return probs[randomizer_of(unit)]; }

  /// Throws InvalidInput when the spec does not fit the layout.
  void validate(const SpatialLayout& layout) const;
};

/// Binary treatments A[day, unit, interval] and their neighbourhood means.
class AssignmentTensor {
public:
  AssignmentTensor() = default;
  AssignmentTensor(int days, int units, int intervals)
      : N_(days), R_(units), M_(intervals), A_(static_cast<std::size_t>(days) * units * intervals, 0),
        Abar_(A_.size(), 0.0) {}

  int days() const { return N_; }
  int units() const { return R_; }
  int intervals() const { return M_; }

  std::size_t index(int day, int unit, int t) const {
    return (static_cast<std::size_t>(day) * R_ + unit) * M_ + t;
  }
  int a(int day, int unit, int t) const { return A_[index(day, unit, t)]; }
  double abar(int day, int unit, int t) const { return Abar_[index(day, unit, t)]; }
  void set(int day, int unit, int t, int value) { A_[index(day, unit, t)] = static_cast<std::uint8_t>(value); }

  const std::vector<std::uint8_t>& A() const { return A_; }
  const std::vector<double>& Abar() const { return Abar_; }
  std::vector<double>& Abar() { return Abar_; }

private:
  int N_ = 0;
  int R_ = 0;
  int M_ = 0;
  std::vector<std::uint8_t> A_;
  std::vector<double> Abar_;
};

/// Draws treatments for N days and M intervals. Every coin is a counter-based
/// draw keyed by (seed, day, randomization unit, interval), so the result is a
/// pure function of the arguments.
AssignmentTensor assign(const DesignSpec& spec, const SpatialLayout& layout, int days, int intervals,
                        std::uint64_t seed);

/// Neighbourhood mean field Abar[i, u, t] = mean of A[i, k, t] over k in N(u).
std::vector<double> mean_field(const std::vector<std::uint8_t>& A, int days, int intervals,
                               const SpatialLayout& layout);

/// Recomputes `tensor.Abar()` from its treatments.
void refresh_mean_field(AssignmentTensor& tensor, const SpatialLayout& layout);

/// Whether the treatments obey the equality constraints of `spatial` (all
/// units equal under Global, equal within clusters under Cluster).
bool satisfies_spatial_constraints(const AssignmentTensor& tensor, SpatialKind spatial,
                                   const ClusterPartition* partition);

}  // namespace splab
