#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "splab/design.hpp"
#include "splab/lattice.hpp"

namespace splab {

/// Observed experiment data {(O, A, Abar, Y)} over N days, R units and M
/// intervals. M = 1 is the nondynamic setting. Neighbour means of the
/// covariates (Obar) are kept alongside so estimators need not recompute them.
class PanelData {
public:
  PanelData() = default;
  PanelData(int days, int units, int intervals, int dim);

  int days() const { return N_; }
  int units() const { return R_; }
  int intervals() const { return M_; }
  int dim() const { return d_; }

  std::size_t cell(int day, int unit, int t) const { return (static_cast<std::size_t>(day) * R_ + unit) * M_ + t; }

  double o(int day, int unit, int t, int k = 0) const { return O_[cell(day, unit, t) * d_ + k]; }
  double obar(int day, int unit, int t, int k = 0) const { return Obar_[cell(day, unit, t) * d_ + k]; }
  int a(int day, int unit, int t) const { return A_[cell(day, unit, t)]; }
  double abar(int day, int unit, int t) const { return Abar_[cell(day, unit, t)]; }
  double y(int day, int unit, int t) const { return Y_[cell(day, unit, t)]; }

  double& o_ref(int day, int unit, int t, int k = 0) { return O_[cell(day, unit, t) * d_ + k]; }
  double& y_ref(int day, int unit, int t) { return Y_[cell(day, unit, t)]; }
  void set_a(int day, int unit, int t, int value) { A_[cell(day, unit, t)] = static_cast<std::uint8_t>(value); }
  void set_abar(int day, int unit, int t, double value) { Abar_[cell(day, unit, t)] = value; }

  /// Copies treatments and mean fields from an assignment tensor of matching shape.
  void set_assignments(const AssignmentTensor& tensor);
  /// Recomputes Abar and Obar from A and O.
  void refresh_neighbor_means(const SpatialLayout& layout);

  /// Panel restricted to the given days (in the given order; repeats allowed).
  PanelData select_days(std::span<const int> days) const;

  /// Treatments as an assignment tensor.
  AssignmentTensor assignments() const;

  /// Throws InvalidInput when the panel and layout disagree or entries are not finite.
  void validate(const SpatialLayout& layout) const;

  const std::vector<double>& O() const { return O_; }
  const std::vector<double>& Y() const { return Y_; }
  const std::vector<std::uint8_t>& A() const { return A_; }

private:
  int N_ = 0;
  int R_ = 0;
  int M_ = 0;
  int d_ = 1;
  std::vector<double> O_;
  std::vector<double> Obar_;
  std::vector<std::uint8_t> A_;
  std::vector<double> Abar_;
  std::vector<double> Y_;
};

}  // namespace splab
