#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace splab {

enum class Tiling { Triangular, Square, Hexagonal };
enum class SpatialKind { Global, Individual, Cluster };
enum class TemporalKind { Constant, Independent, Switchback };
enum class DgpKind { ParamStatic, SemiparamStatic, ParamDynamic, NonparamDynamic };
enum class Method { OLS, DR, DRL };

// Errors raised on malformed input (bad sizes, inconsistent specs, ...).
class InvalidInput : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Errors raised when a numerical procedure cannot produce a valid result.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Nominal maximum neighbour count r of a tiling (3, 4 or 6).
int nominal_degree(Tiling t);

std::string_view to_string(Tiling t);
std::string_view to_string(SpatialKind k);
std::string_view to_string(TemporalKind k);
std::string_view to_string(DgpKind k);
std::string_view to_string(Method m);

// Parsers accept the CLI spellings ("tri", "sq", "hex", "global", ...) as well
// as the long names returned by to_string. They throw InvalidInput otherwise.
Tiling parse_tiling(std::string_view s);
SpatialKind parse_spatial(std::string_view s);
TemporalKind parse_temporal(std::string_view s);
DgpKind parse_dgp(std::string_view s);
Method parse_method(std::string_view s);

}  // namespace splab
