#pragma once

#include <vector>

#include "torusflow/scalar_field.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

/// Exact determinant of an integer matrix (fraction-free elimination).
long long integer_determinant(const IntMat& m);

/// Inverse of a unimodular integer matrix, verified exactly.
IntMat unimodular_inverse(const IntMat& m);

/**
 * Torus diffeomorphism Phi(x) = A x + P(x).
 *
 * A is an integer matrix with |det A| = 1 and P is a vector of Raw periodic
 * fields, so Phi(x + k) = Phi(x) + A k for every lattice vector k. The
 * constructor validates det(grad Phi) on a grid: the sign must be constant
 * and the value bounded away from zero. `certified()` additionally reports
 * whether the grid minimum exceeds the Lipschitz bound of the determinant
 * times the grid covering radius, which proves invertibility everywhere.
 */
class Diffeomorphism {
 public:
  Diffeomorphism(IntMat lattice, std::vector<ScalarField> periodic, int validation_resolution = 64);

  static Diffeomorphism identity(int dim);

  int dim() const { return static_cast<int>(lattice_.rows()); }
  const IntMat& lattice() const { return lattice_; }
  const IntMat& lattice_inverse() const { return lattice_inverse_; }
  const std::vector<ScalarField>& periodic() const { return periodic_; }

  Vec forward(const Vec& x) const;
  Mat jacobian(const Vec& x) const;
  /// Solves Phi(x) = y by damped Newton on the reduced point y - floor(y).
  Vec inverse(const Vec& y, double tol = 1e-13, int max_iter = 100) const;

  int jacobian_sign() const { return jacobian_sign_; }
  double min_abs_jacobian_det() const { return min_abs_det_; }
  bool certified() const { return certified_; }
  bool is_identity() const;

 private:
  IntMat lattice_;
  IntMat lattice_inverse_;
  Mat lattice_real_;
  Mat lattice_inverse_real_;
  std::vector<ScalarField> periodic_;
  int jacobian_sign_ = 1;
  double min_abs_det_ = 0.0;
  bool certified_ = false;
};

}  // namespace torusflow
