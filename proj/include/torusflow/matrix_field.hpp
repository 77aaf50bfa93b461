#pragma once

#include <vector>

#include "torusflow/scalar_field.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

/// Symmetric nonnegative matrix field A(x) = B(x)^T B(x) + ridge * I.
class MatrixField {
 public:
  /// `factor` holds the d*d entries of B in row-major order.
  MatrixField(int dim, std::vector<ScalarField> factor, double ridge = 0.0);

  /// A = ridge * I (zero factor).
  static MatrixField scalar_identity(int dim, double ridge = 1.0);

  int dim() const { return dim_; }
  double ridge() const { return ridge_; }
  const ScalarField& factor(int row, int col) const { return factor_[row * dim_ + col]; }

  /// Exactly symmetric by construction.
  Mat value(const Vec& x) const;
  /// Upper bound on sup_x |A(x)|_2.
  double norm_bound() const;

 private:
  int dim_;
  std::vector<ScalarField> factor_;
  double ridge_;
};

}  // namespace torusflow
