#include "splab/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace splab {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

}  // namespace

void write_layout(std::ostream& out, const SpatialLayout& layout, const ClusterPartition& partition) {
  out << layout.size() << ' ' << partition.m << ' ' << to_string(layout.tiling()) << '\n';
  for (int u = 0; u < layout.size(); ++u) {
    out << u << ' ' << num(layout.coord(u).x) << ' ' << num(layout.coord(u).y) << ' ' << partition.cluster_of(u)
        << ' ' << layout.degree(u);
    for (int v : layout.neighbors(u)) out << ' ' << v;
    out << '\n';
  }
}

void write_assignments_csv(std::ostream& out, const AssignmentTensor& tensor) {
  out << "day,unit,interval,A,Abar\n";
  for (int i = 0; i < tensor.days(); ++i) {
    for (int u = 0; u < tensor.units(); ++u) {
      for (int t = 0; t < tensor.intervals(); ++t) {
        out << i << ',' << u << ',' << t << ',' << tensor.a(i, u, t) << ',' << num(tensor.abar(i, u, t)) << '\n';
      }
    }
  }
}

void write_panel_csv(std::ostream& out, const PanelData& panel) {
  const int d = panel.dim();
  out << "day,unit,interval,";
  if (d == 1) {
    out << "O,";
  } else {
    for (int k = 0; k < d; ++k) out << "O_" << k + 1 << ',';
  }
  out << "A,Abar,Y\n";
  for (int i = 0; i < panel.days(); ++i) {
    for (int u = 0; u < panel.units(); ++u) {
      for (int t = 0; t < panel.intervals(); ++t) {
        out << i << ',' << u << ',' << t << ',';
        for (int k = 0; k < d; ++k) out << num(panel.o(i, u, t, k)) << ',';
        out << panel.a(i, u, t) << ',' << num(panel.abar(i, u, t)) << ',' << num(panel.y(i, u, t)) << '\n';
      }
    }
  }
}

PanelData read_panel_csv(std::istream& in, const SpatialLayout& layout) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = split(line);
    break;
  }
  if (header.size() < 7 || header[0] != "day" || header[1] != "unit" || header[2] != "interval") {
    throw InvalidInput("panel CSV header must start with day,unit,interval");
  }
  const int d = static_cast<int>(header.size()) - 6;
  if (header[header.size() - 3] != "A" || header[header.size() - 2] != "Abar" || header.back() != "Y") {
    throw InvalidInput("panel CSV header must end with A,Abar,Y");
  }
  struct Row {
    int i, u, t, a;
    std::vector<double> o;
    double y;
  };
  std::vector<Row> rows;
  int N = 0, M = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split(line);
    if (f.size() != header.size()) throw InvalidInput("panel CSV line " + std::to_string(lineno) + ": wrong field count");
    try {
      Row r{std::stoi(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stoi(f[3 + d]), {}, std::stod(f.back())};
      for (int k = 0; k < d; ++k) r.o.push_back(std::stod(f[3 + k]));
      if (r.i < 0 || r.u < 0 || r.u >= layout.size() || r.t < 0 || (r.a != 0 && r.a != 1)) {
        throw InvalidInput("out of range");
      }
      N = std::max(N, r.i + 1);
      M = std::max(M, r.t + 1);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw InvalidInput("panel CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (rows.empty()) throw InvalidInput("panel CSV has no data rows");
  const int R = layout.size();
  if (rows.size() != static_cast<std::size_t>(N) * R * M) {
    throw InvalidInput("panel CSV has " + std::to_string(rows.size()) + " rows, expected N*R*M = " +
                       std::to_string(static_cast<std::size_t>(N) * R * M));
  }
  PanelData panel(N, R, M, d);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& r : rows) {
    const std::size_t c = panel.cell(r.i, r.u, r.t);
    if (seen[c]) throw InvalidInput("duplicate panel cell (" + std::to_string(r.i) + "," + std::to_string(r.u) + "," +
                                    std::to_string(r.t) + ")");
    seen[c] = true;
    for (int k = 0; k < d; ++k) panel.o_ref(r.i, r.u, r.t, k) = r.o[k];
    panel.set_a(r.i, r.u, r.t, r.a);
    panel.y_ref(r.i, r.u, r.t) = r.y;
  }
  panel.refresh_neighbor_means(layout);
  panel.validate(layout);
  return panel;
}

}  // namespace splab
