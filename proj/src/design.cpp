#include "splab/design.hpp"

#include <string>

#include "splab/rng.hpp"

namespace splab {

namespace {

void check_prob(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidInput("treatment probability must lie in (0,1), got " + std::to_string(p));
  }
}

}  // namespace

DesignSpec DesignSpec::global(double p, TemporalKind temporal) {
  check_prob(p);
  DesignSpec s;
  s.spatial = SpatialKind::Global;
  s.temporal = temporal;
  s.probs = {p};
  return s;
}

DesignSpec DesignSpec::individual(const SpatialLayout& layout, double p, TemporalKind temporal) {
  return individual(std::vector<double>(layout.size(), p), temporal);
}

DesignSpec DesignSpec::individual(std::vector<double> probs, TemporalKind temporal) {
  for (double p : probs) check_prob(p);
  DesignSpec s;
  s.spatial = SpatialKind::Individual;
  s.temporal = temporal;
  s.probs = std::move(probs);
  return s;
}

DesignSpec DesignSpec::cluster(ClusterPartition partition, double p, TemporalKind temporal) {
  const int m = partition.m;
  return cluster(std::move(partition), std::vector<double>(m, p), temporal);
}

DesignSpec DesignSpec::cluster(ClusterPartition partition, std::vector<double> probs, TemporalKind temporal) {
  for (double p : probs) check_prob(p);
  if (static_cast<int>(probs.size()) != partition.m) {
    throw InvalidInput("cluster design needs one probability per cluster (" + std::to_string(partition.m) +
                       "), got " + std::to_string(probs.size()));
  }
  DesignSpec s;
  s.spatial = SpatialKind::Cluster;
  s.temporal = temporal;
  s.probs = std::move(probs);
  s.partition = std::move(partition);
  return s;
}

int DesignSpec::randomizer_of(int unit) const {
  switch (spatial) {
    case SpatialKind::Global: return 0;
    case SpatialKind::Individual: return unit;
    case SpatialKind::Cluster: return partition->cluster_of(unit);
  }
  return 0;
}

void DesignSpec::validate(const SpatialLayout& layout) const {
  for (double p : probs) check_prob(p);
  switch (spatial) {
    case SpatialKind::Global:
      if (probs.size() != 1) throw InvalidInput("global design takes exactly one probability");
      break;
    case SpatialKind::Individual:
      if (static_cast<int>(probs.size()) != layout.size()) {
        throw InvalidInput("individual design needs one probability per unit (" + std::to_string(layout.size()) +
                           "), got " + std::to_string(probs.size()));
      }
      break;
    case SpatialKind::Cluster:
      if (!partition) throw InvalidInput("cluster design without a partition");
      if (static_cast<int>(partition->assignment.size()) != layout.size()) {
        throw InvalidInput("cluster partition covers " + std::to_string(partition->assignment.size()) +
                           " units but the layout has " + std::to_string(layout.size()));
      }
      if (static_cast<int>(probs.size()) != partition->m) {
        throw InvalidInput("cluster design probability count does not match the partition");
      }
      break;
  }
}

AssignmentTensor assign(const DesignSpec& spec, const SpatialLayout& layout, int days, int intervals,
                        std::uint64_t seed) {
  if (days < 1 || intervals < 1) {
    throw InvalidInput("assignment needs N >= 1 and M >= 1, got N=" + std::to_string(days) +
                       ", M=" + std::to_string(intervals));
  }
  spec.validate(layout);
  const int R = layout.size();
  const int G = spec.randomization_units();
  AssignmentTensor out(days, R, intervals);

  std::vector<int> coins(static_cast<std::size_t>(G) * intervals);
  for (int i = 0; i < days; ++i) {
    for (int g = 0; g < G; ++g) {
      const double p = spec.probs[g];
      for (int t = 0; t < intervals; ++t) {
        int value = 0;
        switch (spec.temporal) {
          case TemporalKind::Constant:
            value = counter_uniform(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(g), 0}) < p;
            break;
          case TemporalKind::Independent:
            value = counter_uniform(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(g),
                                           static_cast<std::uint64_t>(t)}) < p;
            break;
          case TemporalKind::Switchback: {
            // one fair draw per day and randomization unit, then alternate
            const int first =
                counter_uniform(seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(g), 0}) < 0.5;
            value = (t % 2 == 0) ? first : 1 - first;
            break;
          }
        }
        coins[static_cast<std::size_t>(g) * intervals + t] = value;
      }
    }
    for (int u = 0; u < R; ++u) {
      const int g = spec.randomizer_of(u);
      for (int t = 0; t < intervals; ++t) out.set(i, u, t, coins[static_cast<std::size_t>(g) * intervals + t]);
    }
  }
  refresh_mean_field(out, layout);
  return out;
}

std::vector<double> mean_field(const std::vector<std::uint8_t>& A, int days, int intervals,
                               const SpatialLayout& layout) {
  const int R = layout.size();
  if (A.size() != static_cast<std::size_t>(days) * R * intervals) {
    throw InvalidInput("treatment tensor has " + std::to_string(A.size()) + " entries, expected " +
                       std::to_string(static_cast<std::size_t>(days) * R * intervals));
  }
  std::vector<double> out(A.size(), 0.0);
  for (int i = 0; i < days; ++i) {
    for (int u = 0; u < R; ++u) {
      const auto& nb = layout.neighbors(u);
      const double inv = 1.0 / static_cast<double>(nb.size());
      for (int t = 0; t < intervals; ++t) {
        int sum = 0;
        for (int k : nb) sum += A[(static_cast<std::size_t>(i) * R + k) * intervals + t];
        out[(static_cast<std::size_t>(i) * R + u) * intervals + t] = sum * inv;
      }
    }
  }
  return out;
}

void refresh_mean_field(AssignmentTensor& tensor, const SpatialLayout& layout) {
  if (tensor.units() != layout.size()) {
    throw InvalidInput("assignment tensor has " + std::to_string(tensor.units()) + " units, layout has " +
                       std::to_string(layout.size()));
  }
  tensor.Abar() = mean_field(tensor.A(), tensor.days(), tensor.intervals(), layout);
}

bool satisfies_spatial_constraints(const AssignmentTensor& tensor, SpatialKind spatial,
                                   const ClusterPartition* partition) {
  if (spatial == SpatialKind::Individual) return true;
  if (spatial == SpatialKind::Cluster && partition == nullptr) return false;
  for (int i = 0; i < tensor.days(); ++i) {
    for (int t = 0; t < tensor.intervals(); ++t) {
      if (spatial == SpatialKind::Global) {
        const int ref = tensor.a(i, 0, t);
        for (int u = 1; u < tensor.units(); ++u) {
          if (tensor.a(i, u, t) != ref) return false;
        }
      } else {
        for (const auto& members : partition->clusters) {
          const int ref = tensor.a(i, members.front(), t);
          for (int u : members) {
            if (tensor.a(i, u, t) != ref) return false;
          }
        }
      }
    }
  }
  return true;
}

}  // namespace splab
