#pragma once

#include "torusflow/scalar_field.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

enum class SignClass { Positive, Vanishing, ChangesSign };

/// Outcome of a grid scan plus local refinement of a scalar field.
struct SignReport {
  SignClass kind = SignClass::Positive;
  /// Smallest value found (a certified lower bound when `certified`).
  double minimum = 0.0;
  /// Location of `minimum`; empty when the bound came from the offset.
  Vec argmin;
  /// True when positivity follows from a Squared offset m > 0.
  bool certified = false;
};

/// Points per dimension used by the torus scans.
int default_grid_resolution(int dim);

/**
 * Decide whether `f` is positive, touches zero, or changes sign on the torus.
 *
 * Squared fields with offset m > 0 are positive by construction. Otherwise the
 * field is scanned on a uniform grid and the lowest grid points are refined by
 * local minimization; a refined minimum below `eps_zero` in absolute value
 * means the field vanishes.
 */
SignReport analyze_sign(const ScalarField& f, double eps_zero = kEpsZero);

/// Same decision restricted to the segment s -> f(s*xi + base), s in [s0, s1].
SignReport analyze_sign_on_segment(const ScalarField& f, const Vec& xi, const Vec& base,
                                   double s0, double s1, double eps_zero = kEpsZero);

/// Local minimizer of `f` started at `x0` (modified Newton with backtracking).
Vec local_minimize(const ScalarField& f, const Vec& x0, int max_iter = 100);

}  // namespace torusflow
