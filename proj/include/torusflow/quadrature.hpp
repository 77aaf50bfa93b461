#pragma once

#include <cstdint>
#include <functional>

#include "torusflow/types.hpp"

namespace torusflow {

struct QuadratureResult {
  double value = 0.0;
  bool converged = false;
  /// Points per dimension in the final refinement.
  std::int64_t points = 0;
};

/// Composite Gauss-Legendre (10 nodes per panel) on [a, b] with `panels` equal panels.
double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                std::int64_t panels);

/// Doubles the panel count until two successive results agree to `rel_tol`.
QuadratureResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                         double rel_tol = 1e-12, std::int64_t initial_panels = 1,
                                         std::int64_t max_panels = std::int64_t{1} << 22);

/**
 * Integral over the unit cell [0,1]^d by tensor composite Gauss-Legendre
 * (8 nodes per panel). Starts from `initial_points` per dimension and doubles
 * until the relative change drops below `rel_tol` or the grid would exceed
 * `max_total` points.
 */
QuadratureResult torus_integral(const std::function<double(const Vec&)>& f, int dim,
                                double rel_tol = 1e-12, std::int64_t initial_points = 64,
                                std::int64_t max_total = std::int64_t{1} << 22);

}  // namespace torusflow
