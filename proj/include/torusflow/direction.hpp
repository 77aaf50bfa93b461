#pragma once

#include <string>
#include <variant>

#include "torusflow/types.hpp"

namespace torusflow {

/// T xi = k for a nonzero lattice vector k; lines in direction xi close up after length T.
struct RationalPeriod {
  double period = 0.0;
  IntVec lattice;
};

/// |xi . k| > tol for every 0 < |k|_inf <= search_bound.
struct TotallyIrrational {
  int search_bound = 0;
  double min_abs_dot = 0.0;
};

/// Some |xi . k| <= tol but no lattice vector parallel to xi within the bound.
struct Indeterminate {
  int search_bound = 0;
  IntVec near_resonance;
};

using DirectionClass = std::variant<RationalPeriod, TotallyIrrational, Indeterminate>;

inline constexpr int kDefaultSearchBound = 64;
inline constexpr double kDefaultResonanceTol = 1e-9;
/// Componentwise tolerance on |T xi - k| for a rational direction.
inline constexpr double kRationalTol = 1e-12;

/**
 * Bounded lattice search deciding which alternative applies to xi.
 *
 * The rational test walks the multiples m = 1..bound of the dominant
 * component; the irrational certificate enumerates every k in the box
 * |k|_inf <= bound (half of it, by symmetry). The box is shrunk so that it
 * holds at most 2^28 vectors; the bound actually used is reported.
 */
DirectionClass classify_direction(const Vec& xi, int search_bound = kDefaultSearchBound,
                                  double tol = kDefaultResonanceTol);

std::string describe(const DirectionClass& cls);

}  // namespace torusflow
