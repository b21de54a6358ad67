#include "splab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

namespace splab {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;

int isqrt_exact(int n) {
  int r = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

// Patch side for a unit count, or -1 when the count is not realizable.
int patch_rows(Tiling tiling, int units) {
  if (units <= 0) return -1;
  switch (tiling) {
    case Tiling::Square:
    case Tiling::Hexagonal: {
      int a = isqrt_exact(units);
      return (a * a == units && a >= 2) ? a : -1;
    }
    case Tiling::Triangular: {
      if (units % 4 != 0) return -1;
      int a = isqrt_exact(units / 4);
      return (4 * a * a == units && a >= 1) ? a : -1;
    }
  }
  return -1;
}

int units_for_rows(Tiling tiling, int a) { return tiling == Tiling::Triangular ? 4 * a * a : a * a; }
int min_rows(Tiling tiling) { return tiling == Tiling::Triangular ? 1 : 2; }

void check_contiguous(const SpatialLayout& layout, const std::vector<int>& members, int cluster) {
  if (members.empty()) {
    throw InvalidInput("cluster " + std::to_string(cluster) + " is empty");
  }
  std::vector<char> in(layout.size(), 0);
  for (int u : members) in[u] = 1;
  std::vector<char> seen(layout.size(), 0);
  std::deque<int> queue{members.front()};
  seen[members.front()] = 1;
  std::size_t reached = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    ++reached;
    for (int v : layout.neighbors(u)) {
      if (in[v] && !seen[v]) {
        seen[v] = 1;
        queue.push_back(v);
      }
    }
  }
  if (reached != members.size()) {
    throw InvalidInput("cluster " + std::to_string(cluster) + " is not spatially contiguous");
  }
}

// Native compact blocks; returns an empty vector when the patch does not
// divide into them.
// kr x kc rectangles on a square or hex grid, as close to square as the
// side length allows.
std::vector<int> rectangle_blocks(const SpatialLayout& layout, int cluster_size) {
  if (layout.tiling() == Tiling::Triangular) return {};
  const int a = layout.rows();
  int kr = 0;
  for (int r = 1; r * r <= cluster_size; ++r) {
    if (cluster_size % r == 0 && a % r == 0 && a % (cluster_size / r) == 0) kr = r;
  }
  if (kr == 0) return {};
  const int kc = cluster_size / kr;
  const int per_row = a / kc;
  std::vector<int> assignment(layout.size(), -1);
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < a; ++j) assignment[i * a + j] = (i / kr) * per_row + (j / kc);
  }
  return assignment;
}

// Runs of consecutive units along each row; neighbours within a row share an
// edge in every tiling.
std::vector<int> row_strips(const SpatialLayout& layout, int cluster_size) {
  const int n = layout.row_length();
  if (n % cluster_size != 0) return {};
  std::vector<int> assignment(layout.size());
  for (int u = 0; u < layout.size(); ++u) assignment[u] = u / cluster_size;
  return assignment;
}

std::vector<int> native_blocks(const SpatialLayout& layout, int cluster_size) {
  const int k = isqrt_exact(cluster_size);
  if (k * k != cluster_size) return rectangle_blocks(layout, cluster_size);
  const int a = layout.rows();
  std::vector<int> assignment(layout.size(), -1);
  switch (layout.tiling()) {
    case Tiling::Square:
    case Tiling::Hexagonal: {
      if (a % k != 0) return {};
      const int per_row = a / k;
      for (int i = 0; i < a; ++i) {
        for (int j = 0; j < a; ++j) assignment[i * a + j] = (i / k) * per_row + (j / k);
      }
      break;
    }
    case Tiling::Triangular: {
      const int rhombi = 2 * a;
      if (a % k != 0 || rhombi % k != 0) return {};
      const int per_row = rhombi / k;
      for (int i = 0; i < a; ++i) {
        for (int t = 0; t < 2 * rhombi; ++t) {
          const int j = t / 2;
          const bool up = (t % 2) == 0;
          const int li = i % k;
          const int lj = j % k;
          const bool in_up_block = up ? (li + lj <= k - 1) : (li + lj <= k - 2);
          const int block = (i / k) * per_row + (j / k);
          assignment[i * layout.row_length() + t] = 2 * block + (in_up_block ? 0 : 1);
        }
      }
      break;
    }
  }
  return assignment;
}

std::vector<int> greedy_blocks(const SpatialLayout& layout, int cluster_size, bool reverse_seeds) {
  const int R = layout.size();
  std::vector<int> assignment(R, -1);
  int next = 0;
  for (int step = 0; step < R; ++step) {
    const int seed = reverse_seeds ? R - 1 - step : step;
    if (assignment[seed] >= 0) continue;
    std::vector<int> grabbed;
    std::deque<int> queue{seed};
    std::vector<char> seen(R, 0);
    seen[seed] = 1;
    while (!queue.empty() && static_cast<int>(grabbed.size()) < cluster_size) {
      int u = queue.front();
      queue.pop_front();
      grabbed.push_back(u);
      for (int v : layout.neighbors(u)) {
        if (assignment[v] < 0 && !seen[v]) {
          seen[v] = 1;
          queue.push_back(v);
        }
      }
    }
    if (static_cast<int>(grabbed.size()) < cluster_size) return {};
    for (int u : grabbed) assignment[u] = next;
    ++next;
  }
  return assignment;
}

}  // namespace

bool SpatialLayout::adjacent(int a, int b) const {
  const auto& n = neighbors_[a];
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<Point> SpatialLayout::polygon(int unit) const {
  const Point c = raw_centers_[unit];
  std::vector<Point> out;
  switch (tiling_) {
    case Tiling::Square:
      out = {{c.x - 0.5, c.y - 0.5}, {c.x + 0.5, c.y - 0.5}, {c.x + 0.5, c.y + 0.5}, {c.x - 0.5, c.y + 0.5}};
      break;
    case Tiling::Hexagonal:
      for (int k = 0; k < 6; ++k) {
        const double ang = (30.0 + 60.0 * k) * M_PI / 180.0;
        out.push_back({c.x + std::cos(ang), c.y + std::sin(ang)});
      }
      break;
    case Tiling::Triangular: {
      const int i = unit / row_length_;
      const int t = unit % row_length_;
      const int j = t / 2;
      const double h = kSqrt3 / 2.0;
      const double x0 = j + 0.5 * i;
      const double y0 = i * h;
      if (t % 2 == 0) {
        out = {{x0, y0}, {x0 + 1.0, y0}, {x0 + 0.5, y0 + h}};
      } else {
        out = {{x0 + 1.0, y0}, {x0 + 1.5, y0 + h}, {x0 + 0.5, y0 + h}};
      }
      break;
    }
  }
  return out;
}

bool realizable(Tiling tiling, int units) { return patch_rows(tiling, units) > 0; }

SpatialLayout build_layout(Tiling tiling, int units) {
  const int a = patch_rows(tiling, units);
  if (a < 0) {
    int lo = 0;
    int hi = 0;
    for (int k = min_rows(tiling);; ++k) {
      const int n = units_for_rows(tiling, k);
      if (n < units) lo = n;
      if (n > units) {
        hi = n;
        break;
      }
    }
    std::ostringstream msg;
    msg << units << " units cannot be arranged as a " << to_string(tiling) << " patch; nearest realizable counts: ";
    if (lo > 0) msg << lo << " and ";
    msg << hi;
    throw InvalidInput(msg.str());
  }

  SpatialLayout L;
  L.tiling_ = tiling;
  L.rows_ = a;
  L.row_length_ = tiling == Tiling::Triangular ? 4 * a : a;
  const int R = units;
  const int W = L.row_length_;
  L.raw_centers_.resize(R);
  L.neighbors_.assign(R, {});

  auto link = [&](int u, int v) {
    L.neighbors_[u].push_back(v);
  };

  for (int i = 0; i < a; ++i) {
    for (int t = 0; t < W; ++t) {
      const int u = i * W + t;
      switch (tiling) {
        case Tiling::Square: {
          L.raw_centers_[u] = {t + 0.5, i + 0.5};
          if (t > 0) link(u, u - 1);
          if (t + 1 < W) link(u, u + 1);
          if (i > 0) link(u, u - W);
          if (i + 1 < a) link(u, u + W);
          break;
        }
        case Tiling::Hexagonal: {
          // axial (q = t, r = i), pointy-top, unit circumradius
          L.raw_centers_[u] = {kSqrt3 * (t + 0.5 * i), 1.5 * i};
          const int dq[6] = {1, -1, 0, 0, 1, -1};
          const int dr[6] = {0, 0, 1, -1, -1, 1};
          for (int k = 0; k < 6; ++k) {
            const int q = t + dq[k];
            const int r = i + dr[k];
            if (q >= 0 && q < W && r >= 0 && r < a) link(u, r * W + q);
          }
          break;
        }
        case Tiling::Triangular: {
          const int j = t / 2;
          const double h = kSqrt3 / 2.0;
          const double x0 = j + 0.5 * i;
          const double y0 = i * h;
          if (t % 2 == 0) {
            L.raw_centers_[u] = {x0 + 0.5, y0 + h / 3.0};
            link(u, u + 1);                              // down(i, j)
            if (j > 0) link(u, u - 1);                   // down(i, j - 1)
            if (i > 0) link(u, (i - 1) * W + 2 * j + 1);  // down(i - 1, j)
          } else {
            L.raw_centers_[u] = {x0 + 1.0, y0 + 2.0 * h / 3.0};
            link(u, u - 1);                               // up(i, j)
            if (t + 1 < W) link(u, u + 1);                // up(i, j + 1)
            if (i + 1 < a) link(u, (i + 1) * W + 2 * j);  // up(i + 1, j)
          }
          break;
        }
      }
    }
  }
  for (auto& n : L.neighbors_) std::sort(n.begin(), n.end());

  double xmin = L.raw_centers_[0].x, xmax = xmin, ymin = L.raw_centers_[0].y, ymax = ymin;
  for (const auto& p : L.raw_centers_) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double eps = 1.0 / (2.0 * std::max(a, W));
  auto rescale = [eps](double v, double lo, double hi) {
    if (hi - lo <= 0.0) return 0.5;
    return eps + (1.0 - 2.0 * eps) * (v - lo) / (hi - lo);
  };
  L.coords_.resize(R);
  for (int u = 0; u < R; ++u) {
    L.coords_[u] = {rescale(L.raw_centers_[u].x, xmin, xmax), rescale(L.raw_centers_[u].y, ymin, ymax)};
  }
  return L;
}

int ClusterPartition::max_cluster_size() const {
  std::size_t c = 0;
  for (const auto& cl : clusters) c = std::max(c, cl.size());
  return static_cast<int>(c);
}

ClusterPartition partition_from_assignment(const SpatialLayout& layout, std::vector<int> assignment) {
  if (static_cast<int>(assignment.size()) != layout.size()) {
    throw InvalidInput("cluster assignment has " + std::to_string(assignment.size()) + " entries, layout has " +
                       std::to_string(layout.size()) + " units");
  }
  ClusterPartition P;
  int m = 0;
  for (int j : assignment) {
    if (j < 0) throw InvalidInput("negative cluster index in assignment");
    m = std::max(m, j + 1);
  }
  P.m = m;
  P.clusters.assign(m, {});
  for (int u = 0; u < layout.size(); ++u) P.clusters[assignment[u]].push_back(u);
  for (int j = 0; j < m; ++j) check_contiguous(layout, P.clusters[j], j);
  P.assignment = std::move(assignment);
  return P;
}

ClusterPartition singleton_partition(const SpatialLayout& layout) {
  std::vector<int> a(layout.size());
  std::iota(a.begin(), a.end(), 0);
  return partition_from_assignment(layout, std::move(a));
}

ClusterPartition build_clusters(const SpatialLayout& layout, int cluster_size) {
  const int R = layout.size();
  if (cluster_size <= 0 || R % cluster_size != 0) {
    throw InvalidInput("cluster size " + std::to_string(cluster_size) + " does not divide " + std::to_string(R) +
                       " units");
  }
  if (cluster_size == R) return partition_from_assignment(layout, std::vector<int>(R, 0));
  if (cluster_size == 1) return singleton_partition(layout);

  auto assignment = native_blocks(layout, cluster_size);
  if (assignment.empty()) assignment = greedy_blocks(layout, cluster_size, false);
  if (assignment.empty()) assignment = greedy_blocks(layout, cluster_size, true);
  if (assignment.empty()) assignment = row_strips(layout, cluster_size);
  if (assignment.empty()) {
    throw InvalidInput("no contiguous partition of the " + std::string(to_string(layout.tiling())) + " patch with " +
                       std::to_string(R) + " units into clusters of " + std::to_string(cluster_size) + " found");
  }
  return partition_from_assignment(layout, std::move(assignment));
}

LayoutDiagnostics diagnostics(const SpatialLayout& layout, const ClusterPartition& partition) {
  const int R = layout.size();
  if (static_cast<int>(partition.assignment.size()) != R) {
    throw InvalidInput("partition does not match layout size");
  }
  LayoutDiagnostics D;
  D.units = R;
  D.interior.assign(partition.m, {});
  D.boundary.assign(partition.m, {});
  D.cluster_neighborhood.assign(partition.m, {});
  D.omega_per_cluster.assign(partition.m, 1.0);
  D.is_interior.assign(R, false);
  D.r_c_per_unit.assign(R, 1);
  D.touching.assign(R, {});
  D.c = partition.max_cluster_size();

  std::vector<int> count(partition.m, 0);
  for (int u = 0; u < R; ++u) {
    const int own = partition.cluster_of(u);
    bool interior = true;
    std::vector<int> hit;
    for (int v : layout.neighbors(u)) {
      const int j = partition.cluster_of(v);
      if (j != own) interior = false;
      if (count[j]++ == 0) hit.push_back(j);
    }
    int hi = 0;
    int lo = 0;
    for (int j : hit) {
      hi = std::max(hi, count[j]);
      lo = lo == 0 ? count[j] : std::min(lo, count[j]);
    }
    const double ratio = lo > 0 ? static_cast<double>(hi) / lo : 1.0;
    D.omega = std::max(D.omega, ratio);
    D.omega_per_cluster[own] = std::max(D.omega_per_cluster[own], ratio);
    for (int j : hit) count[j] = 0;

    hit.push_back(own);
    std::sort(hit.begin(), hit.end());
    hit.erase(std::unique(hit.begin(), hit.end()), hit.end());
    D.r_c_per_unit[u] = static_cast<int>(hit.size());
    D.touching[u] = std::move(hit);

    D.is_interior[u] = interior;
    (interior ? D.interior : D.boundary)[own].push_back(u);
  }

  for (int j = 0; j < partition.m; ++j) {
    std::vector<int> outside;
    for (int u : partition.clusters[j]) {
      for (int v : layout.neighbors(u)) {
        if (partition.cluster_of(v) != j) outside.push_back(v);
      }
    }
    std::sort(outside.begin(), outside.end());
    outside.erase(std::unique(outside.begin(), outside.end()), outside.end());
    D.cluster_neighborhood[j] = std::move(outside);
  }

  D.r_c = *std::max_element(D.r_c_per_unit.begin(), D.r_c_per_unit.end());
  for (int u = 0; u < R; ++u) {
    if (D.r_c_per_unit[u] > 2) D.R1.push_back(u);
  }

  D.overlap_counts.assign(static_cast<std::size_t>(R) * R, 0);
  for (int u = 0; u < R; ++u) {
    for (int v = u; v < R; ++v) {
      const auto& a = D.touching[u];
      const auto& b = D.touching[v];
      int shared = 0;
      auto ia = a.begin();
      auto ib = b.begin();
      while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
          ++ia;
        } else if (*ib < *ia) {
          ++ib;
        } else {
          ++shared;
          ++ia;
          ++ib;
        }
      }
      D.overlap_counts[static_cast<std::size_t>(u) * R + v] = shared;
      D.overlap_counts[static_cast<std::size_t>(v) * R + u] = shared;
    }
  }
  return D;
}

}  // namespace splab
