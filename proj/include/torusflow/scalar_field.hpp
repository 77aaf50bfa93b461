#pragma once

#include <vector>

#include "torusflow/types.hpp"

namespace torusflow {

enum class FieldMode { Raw, Squared };

/// One Fourier mode c*cos(2 pi k.x) + s*sin(2 pi k.x).
struct FourierTerm {
  std::vector<double> frequency;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

/**
 * Real trigonometric polynomial on the d-torus.
 *
 * The base polynomial is q(x) = sum_k [c_k cos(2 pi k.x) + s_k sin(2 pi k.x)].
 * In Raw mode the field value is q(x); in Squared mode it is q(x)^2 + offset,
 * which makes nonnegativity hold by construction.
 *
 * Raw fields use integer frequencies. Squared fields may also use
 * half-integer frequencies as long as every term shares the same parity
 * pattern, so that q is periodic or anti-periodic along each axis and q^2 is
 * periodic (e.g. q = cos(pi y) gives cos^2(pi y)).
 *
 * Instances are immutable; evaluation is thread-safe.
 */
class ScalarField {
 public:
  ScalarField(int dim, std::vector<FourierTerm> terms, FieldMode mode = FieldMode::Raw,
              double offset = 0.0);

  static ScalarField constant(int dim, double value);

  int dim() const { return dim_; }
  FieldMode mode() const { return mode_; }
  double offset() const { return offset_; }
  const std::vector<FourierTerm>& terms() const { return terms_; }

  /// q(x) or q(x)^2 + offset.
  double value(const Vec& x) const;
  /// Exact gradient of value(), chained through Squared mode.
  Vec gradient(const Vec& x) const;
  double value_and_gradient(const Vec& x, Vec& grad) const;

  /// The base polynomial q, regardless of mode.
  double base(const Vec& x) const;

  /// Upper bound on |value| from the coefficient sum.
  double sup_bound() const;
  /// Upper bound on |gradient|_2.
  double lipschitz_bound() const;
  /// Upper bound on the spectral norm of the Hessian.
  double hessian_bound() const;
  /// Largest |k|_inf among the terms (0 for a constant).
  double max_frequency() const;

  /// The field c*f for c > 0 (any real c for Raw fields).
  ScalarField scaled(double c) const;

  bool is_constant() const;

 private:
  void check_dim(const Vec& x) const;

  int dim_;
  std::vector<FourierTerm> terms_;
  FieldMode mode_;
  double offset_;
};

}  // namespace torusflow
