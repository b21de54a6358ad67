#pragma once

#include <array>
#include <vector>

#include "splab/types.hpp"

namespace splab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// A finite patch of a regular tiling. Units are indexed row-major; two units
/// interfere with each other iff their polygons share an edge.
///
/// Patch shapes:
///   square      rows x rows grid, R = rows^2
///   hexagonal   rows x rows rhombus in axial coordinates, R = rows^2
///   triangular  rows x (2 rows) rhombus strip, each rhombus split into an up
///               and a down triangle, R = 4 rows^2
class SpatialLayout {
public:
  Tiling tiling() const { return tiling_; }
  int size() const { return static_cast<int>(coords_.size()); }
  int rows() const { return rows_; }
  /// Units per row.
  int row_length() const { return row_length_; }
  /// Nominal interference range r of the tiling.
  int r() const { return nominal_degree(tiling_); }

  const Point& coord(int unit) const { return coords_[unit]; }
  const std::vector<Point>& coords() const { return coords_; }
  const std::vector<int>& neighbors(int unit) const { return neighbors_[unit]; }
  int degree(int unit) const { return static_cast<int>(neighbors_[unit].size()); }
  bool adjacent(int a, int b) const;

  /// Polygon corners in tiling units (unnormalised), counter-clockwise.
  std::vector<Point> polygon(int unit) const;

  friend SpatialLayout build_layout(Tiling tiling, int units);

private:
  Tiling tiling_ = Tiling::Square;
  int rows_ = 0;
  int row_length_ = 0;
  std::vector<Point> coords_;
  std::vector<Point> raw_centers_;
  std::vector<std::vector<int>> neighbors_;
};

/// Whether `units` is a realizable patch size for the tiling.
bool realizable(Tiling tiling, int units);

/// Builds the tiling patch with `units` polygons. Coordinates are polygon
/// centres rescaled to (eps, 1 - eps)^2 with eps = 1 / (2 * side), where side is
/// the larger of the patch's row count and row length.
/// Throws InvalidInput naming the nearest realizable counts otherwise.
SpatialLayout build_layout(Tiling tiling, int units);

/// Disjoint contiguous clusters covering every unit.
struct ClusterPartition {
  int m = 0;
  std::vector<int> assignment;             // unit -> cluster index
  std::vector<std::vector<int>> clusters;  // sorted members of each cluster

  int cluster_of(int unit) const { return assignment[unit]; }
  int max_cluster_size() const;
};

/// Partitions the layout into clusters of `cluster_size` units.
///
/// When the patch dimensions allow it, clusters are the tiling's native compact
/// blocks (k x k squares, k x k hex rhombi, side-k triangles for c = k^2).
/// Otherwise clusters are grown breadth-first from the lowest-indexed
/// unassigned unit and the result is checked for contiguity.
ClusterPartition build_clusters(const SpatialLayout& layout, int cluster_size);

/// Builds a partition from an explicit unit -> cluster map. Validates that
/// every cluster is non-empty and contiguous.
ClusterPartition partition_from_assignment(const SpatialLayout& layout, std::vector<int> assignment);

/// Singleton clusters, i.e. the individual-randomized design seen as a
/// cluster design.
ClusterPartition singleton_partition(const SpatialLayout& layout);

/// Structural quantities of a (layout, partition) pair. All fields are exact
/// set enumerations.
struct LayoutDiagnostics {
  std::vector<std::vector<int>> interior;              // C_j^0
  std::vector<std::vector<int>> boundary;              // dC_j
  std::vector<std::vector<int>> cluster_neighborhood;  // units outside C_j adjacent to it
  std::vector<bool> is_interior;                       // per unit
  double omega = 1.0;
  std::vector<double> omega_per_cluster;  // omega restricted to units of C_j
  std::vector<int> r_c_per_unit;
  int r_c = 1;
  std::vector<int> R1;  // units with r_c(i) > 2
  std::vector<int> overlap_counts;  // R x R row-major, m_{ii'}
  int c = 0;                        // max cluster size
  int units = 0;
  std::vector<std::vector<int>> touching;  // clusters meeting {unit} + N(unit), sorted

  int overlap(int a, int b) const { return overlap_counts[static_cast<std::size_t>(a) * units + b]; }
};

LayoutDiagnostics diagnostics(const SpatialLayout& layout, const ClusterPartition& partition);

}  // namespace splab
