#include "splab/types.hpp"

#include <array>
#include <utility>

namespace splab {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<std::string_view, E>, N>& table,
             std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  std::string msg = "unknown ";
  msg += what;
  msg += " '";
  msg += s;
  msg += "' (expected one of:";
  for (const auto& [name, value] : table) {
    msg += ' ';
    msg += name;
  }
  msg += ')';
  throw InvalidInput(msg);
}

}  // namespace

int nominal_degree(Tiling t) {
  switch (t) {
    case Tiling::Triangular: return 3;
    case Tiling::Square: return 4;
    case Tiling::Hexagonal: return 6;
  }
  return 0;
}

std::string_view to_string(Tiling t) {
  switch (t) {
    case Tiling::Triangular: return "tri";
    case Tiling::Square: return "sq";
    case Tiling::Hexagonal: return "hex";
  }
  return "?";
}

std::string_view to_string(SpatialKind k) {
  switch (k) {
    case SpatialKind::Global: return "global";
    case SpatialKind::Individual: return "individual";
    case SpatialKind::Cluster: return "cluster";
  }
  return "?";
}

std::string_view to_string(TemporalKind k) {
  switch (k) {
    case TemporalKind::Constant: return "constant";
    case TemporalKind::Independent: return "independent";
    case TemporalKind::Switchback: return "switchback";
  }
  return "?";
}

std::string_view to_string(DgpKind k) {
  switch (k) {
    case DgpKind::ParamStatic: return "param_static";
    case DgpKind::SemiparamStatic: return "semiparam_static";
    case DgpKind::ParamDynamic: return "param_dynamic";
    case DgpKind::NonparamDynamic: return "nonparam_dynamic";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::OLS: return "ols";
    case Method::DR: return "dr";
    case Method::DRL: return "drl";
  }
  return "?";
}

Tiling parse_tiling(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, Tiling>, 6> table{{
      {"tri", Tiling::Triangular},
      {"triangular", Tiling::Triangular},
      {"sq", Tiling::Square},
      {"square", Tiling::Square},
      {"hex", Tiling::Hexagonal},
      {"hexagonal", Tiling::Hexagonal},
  }};
  return parse_enum(s, table, "tiling");
}

SpatialKind parse_spatial(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, SpatialKind>, 3> table{{
      {"global", SpatialKind::Global},
      {"individual", SpatialKind::Individual},
      {"cluster", SpatialKind::Cluster},
  }};
  return parse_enum(s, table, "spatial design");
}

TemporalKind parse_temporal(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, TemporalKind>, 3> table{{
      {"constant", TemporalKind::Constant},
      {"independent", TemporalKind::Independent},
      {"switchback", TemporalKind::Switchback},
  }};
  return parse_enum(s, table, "temporal design");
}

DgpKind parse_dgp(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, DgpKind>, 4> table{{
      {"param_static", DgpKind::ParamStatic},
      {"semiparam_static", DgpKind::SemiparamStatic},
      {"param_dynamic", DgpKind::ParamDynamic},
      {"nonparam_dynamic", DgpKind::NonparamDynamic},
  }};
  return parse_enum(s, table, "dgp kind");
}

Method parse_method(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, Method>, 3> table{{
      {"ols", Method::OLS},
      {"dr", Method::DR},
      {"drl", Method::DRL},
  }};
  return parse_enum(s, table, "method");
}

}  // namespace splab
