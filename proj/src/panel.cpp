#include "splab/panel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splab {

PanelData::PanelData(int days, int units, int intervals, int dim)
    : N_(days), R_(units), M_(intervals), d_(dim) {
  if (days < 1 || units < 1 || intervals < 1 || dim < 1) {
    throw InvalidInput("panel dimensions must be positive");
  }
  const std::size_t cells = static_cast<std::size_t>(days) * units * intervals;
  O_.assign(cells * dim, 0.0);
  Obar_.assign(cells * dim, 0.0);
  A_.assign(cells, 0);
  Abar_.assign(cells, 0.0);
  Y_.assign(cells, 0.0);
}

void PanelData::set_assignments(const AssignmentTensor& tensor) {
  if (tensor.days() != N_ || tensor.units() != R_ || tensor.intervals() != M_) {
    throw InvalidInput("assignment tensor shape does not match the panel");
  }
  A_ = tensor.A();
  Abar_ = tensor.Abar();
}

void PanelData::refresh_neighbor_means(const SpatialLayout& layout) {
  if (layout.size() != R_) throw InvalidInput("layout size does not match the panel");
  Abar_ = mean_field(A_, N_, M_, layout);
  for (int i = 0; i < N_; ++i) {
    for (int u = 0; u < R_; ++u) {
      const auto& nb = layout.neighbors(u);
      const double inv = 1.0 / static_cast<double>(nb.size());
      for (int t = 0; t < M_; ++t) {
        for (int k = 0; k < d_; ++k) {
          double sum = 0.0;
          for (int v : nb) sum += o(i, v, t, k);
          Obar_[cell(i, u, t) * d_ + k] = sum * inv;
        }
      }
    }
  }
}

PanelData PanelData::select_days(std::span<const int> days) const {
  PanelData out(static_cast<int>(days.size()), R_, M_, d_);
  const std::size_t block = static_cast<std::size_t>(R_) * M_;
  for (std::size_t n = 0; n < days.size(); ++n) {
    const int src = days[n];
    if (src < 0 || src >= N_) throw InvalidInput("day index out of range: " + std::to_string(src));
    const std::size_t s = static_cast<std::size_t>(src) * block;
    const std::size_t dst = n * block;
    std::copy_n(A_.begin() + s, block, out.A_.begin() + dst);
    std::copy_n(Abar_.begin() + s, block, out.Abar_.begin() + dst);
    std::copy_n(Y_.begin() + s, block, out.Y_.begin() + dst);
    std::copy_n(O_.begin() + s * d_, block * d_, out.O_.begin() + dst * d_);
    std::copy_n(Obar_.begin() + s * d_, block * d_, out.Obar_.begin() + dst * d_);
  }
  return out;
}

AssignmentTensor PanelData::assignments() const {
  AssignmentTensor t(N_, R_, M_);
  for (int i = 0; i < N_; ++i) {
    for (int u = 0; u < R_; ++u) {
      for (int s = 0; s < M_; ++s) t.set(i, u, s, a(i, u, s));
    }
  }
  t.Abar() = Abar_;
  return t;
}

void PanelData::validate(const SpatialLayout& layout) const {
  if (layout.size() != R_) {
    throw InvalidInput("panel has " + std::to_string(R_) + " units but the layout has " +
                       std::to_string(layout.size()));
  }
  for (double v : O_) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite covariate in panel");
  }
  for (double v : Y_) {
    if (!std::isfinite(v)) throw InvalidInput("non-finite outcome in panel");
  }
  for (auto v : A_) {
    if (v > 1) throw InvalidInput("treatment entries must be 0 or 1");
  }
}

}  // namespace splab
