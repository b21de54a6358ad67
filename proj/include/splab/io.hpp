#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "splab/design.hpp"
#include "splab/lattice.hpp"
#include "splab/panel.hpp"

namespace splab {

/// Header line `R m tiling`, then `unit x y cluster n neighbours...` per unit.
void write_layout(std::ostream& out, const SpatialLayout& layout, const ClusterPartition& partition);

/// Columns day,unit,interval,A,Abar (0-based indices).
void write_assignments_csv(std::ostream& out, const AssignmentTensor& tensor);

/// Columns day,unit,interval,O,A,Abar,Y, or O_1..O_d for d > 1.
void write_panel_csv(std::ostream& out, const PanelData& panel);

/// Reads a panel written by write_panel_csv. Lines starting with '#' are
/// skipped. Every (day, unit, interval) cell must appear exactly once. Neighbour
/// means are recomputed from `layout`.
PanelData read_panel_csv(std::istream& in, const SpatialLayout& layout);

}  // namespace splab
