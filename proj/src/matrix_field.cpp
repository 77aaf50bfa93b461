#include "torusflow/matrix_field.hpp"

#include <cmath>
#include <string>

#include "torusflow/error.hpp"

namespace torusflow {

MatrixField::MatrixField(int dim, std::vector<ScalarField> factor, double ridge)
    : dim_(dim), factor_(std::move(factor)), ridge_(ridge) {
  if (dim_ < 1) throw InvalidField("matrix field dimension must be positive");
  if (static_cast<int>(factor_.size()) != dim_ * dim_)
    throw DimensionMismatch("matrix factor needs " + std::to_string(dim_ * dim_) + " entries, got " +
                            std::to_string(factor_.size()));
  for (const auto& f : factor_)
    if (f.dim() != dim_) throw DimensionMismatch("matrix factor entry has the wrong dimension");
  if (!(ridge_ >= 0.0) || !std::isfinite(ridge_))
    throw InvalidField("matrix ridge must be finite and nonnegative");
}

MatrixField MatrixField::scalar_identity(int dim, double ridge) {
  std::vector<ScalarField> zero(static_cast<std::size_t>(dim) * dim, ScalarField::constant(dim, 0.0));
  return MatrixField(dim, std::move(zero), ridge);
}

Mat MatrixField::value(const Vec& x) const {
  Mat b(dim_, dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) b(i, j) = factor_[i * dim_ + j].value(x);
  Mat a(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    for (int j = i; j < dim_; ++j) {
      double s = 0.0;
      for (int l = 0; l < dim_; ++l) s += b(l, i) * b(l, j);
      a(i, j) = s;
      a(j, i) = s;
    }
    a(i, i) += ridge_;
  }
  return a;
}

double MatrixField::norm_bound() const {
  double frob2 = 0.0;
  for (const auto& f : factor_) {
    const double s = f.sup_bound();
    frob2 += s * s;
  }
  return frob2 + ridge_;
}

}  // namespace torusflow
