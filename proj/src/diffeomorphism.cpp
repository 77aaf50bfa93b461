#include "torusflow/diffeomorphism.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "torusflow/error.hpp"

namespace torusflow {

long long integer_determinant(const IntMat& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("determinant of a non-square matrix");
  const auto n = m.rows();
  if (n == 0) return 1;
  Eigen::Matrix<__int128, Eigen::Dynamic, Eigen::Dynamic> a = m.cast<__int128>();
  __int128 prev = 1;
  int sign = 1;
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      Eigen::Index p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.row(k).swap(a.row(p));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      for (Eigen::Index j = k + 1; j < n; ++j) a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    }
    prev = a(k, k);
  }
  return static_cast<long long>(sign * a(n - 1, n - 1));
}

IntMat unimodular_inverse(const IntMat& m) {
  const long long det = integer_determinant(m);
  if (det != 1 && det != -1)
    throw InvalidField("lattice matrix must have |det| = 1, got det = " + std::to_string(det));
  const Mat inv = m.cast<double>().inverse();
  IntMat r(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r(i, j) = std::llround(inv(i, j));
  if (m * r != IntMat::Identity(m.rows(), m.cols()))
    throw InvalidField("failed to invert the lattice matrix exactly");
  return r;
}

Diffeomorphism::Diffeomorphism(IntMat lattice, std::vector<ScalarField> periodic, int validation_resolution)
    : lattice_(std::move(lattice)), periodic_(std::move(periodic)) {
  const int d = static_cast<int>(lattice_.rows());
  if (d < 1 || lattice_.cols() != d) throw InvalidField("lattice matrix must be square and nonempty");
  if (static_cast<int>(periodic_.size()) != d)
    throw DimensionMismatch("periodic part needs " + std::to_string(d) + " components");
  for (const auto& p : periodic_) {
    if (p.dim() != d) throw DimensionMismatch("periodic component has the wrong dimension");
    if (p.mode() != FieldMode::Raw) throw InvalidField("periodic components must be Raw fields");
  }
  lattice_inverse_ = unimodular_inverse(lattice_);
  lattice_real_ = lattice_.cast<double>();
  lattice_inverse_real_ = lattice_inverse_.cast<double>();

  // Grid validation of det(grad Phi), capped at 2^20 points.
  int r = std::min(std::max(validation_resolution, 2), 64);
  while (r > 2 && std::pow(static_cast<double>(r), d) > static_cast<double>(1 << 20)) --r;
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= r;

  double min_det = std::numeric_limits<double>::infinity();
  double max_det = -std::numeric_limits<double>::infinity();
  Vec x(d);
  for (std::int64_t p = 0; p < total; ++p) {
    std::int64_t rem = p;
    for (int i = 0; i < d; ++i) {
      x[i] = static_cast<double>(rem % r) / r;
      rem /= r;
    }
    const double det = jacobian(x).determinant();
    min_det = std::min(min_det, det);
    max_det = std::max(max_det, det);
  }
  if (min_det > kEpsZero) {
    jacobian_sign_ = 1;
    min_abs_det_ = min_det;
  } else if (max_det < -kEpsZero) {
    jacobian_sign_ = -1;
    min_abs_det_ = -max_det;
  } else {
    throw InvalidField("det(grad Phi) vanishes or changes sign on the validation grid");
  }

  // Lip(det) <= sum_ij Lip(J_ij) * prod_{rows r != i} |row r|_sup (Hadamard bound on cofactors).
  Mat sup_entry(d, d);
  Vec lip_row(d);
  for (int i = 0; i < d; ++i) {
    const double g = periodic_[i].lipschitz_bound();
    for (int j = 0; j < d; ++j) sup_entry(i, j) = std::abs(lattice_real_(i, j)) + g;
    lip_row[i] = periodic_[i].hessian_bound();
  }
  double lip_det = 0.0;
  for (int i = 0; i < d; ++i) {
    double cof = 1.0;
    for (int rr = 0; rr < d; ++rr)
      if (rr != i) cof *= sup_entry.row(rr).norm();
    lip_det += d * lip_row[i] * cof;
  }
  const double radius = 0.5 * std::sqrt(static_cast<double>(d)) / r;
  certified_ = min_abs_det_ > lip_det * radius;
}

Diffeomorphism Diffeomorphism::identity(int dim) {
  std::vector<ScalarField> zero(dim, ScalarField::constant(dim, 0.0));
  return Diffeomorphism(IntMat::Identity(dim, dim), std::move(zero));
}

bool Diffeomorphism::is_identity() const {
  if (lattice_ != IntMat::Identity(dim(), dim())) return false;
  for (const auto& p : periodic_)
    if (!p.is_constant() || p.sup_bound() != 0.0) return false;
  return true;
}

Vec Diffeomorphism::forward(const Vec& x) const {
  if (x.size() != dim()) throw DimensionMismatch("point dimension does not match the diffeomorphism");
  Vec y = lattice_real_ * x;
  for (int i = 0; i < dim(); ++i) y[i] += periodic_[i].value(x);
  return y;
}

Mat Diffeomorphism::jacobian(const Vec& x) const {
  if (x.size() != dim()) throw DimensionMismatch("point dimension does not match the diffeomorphism");
  Mat j = lattice_real_;
  for (int i = 0; i < dim(); ++i) j.row(i) += periodic_[i].gradient(x).transpose();
  return j;
}

Vec Diffeomorphism::inverse(const Vec& y, double tol, int max_iter) const {
  if (y.size() != dim()) throw DimensionMismatch("point dimension does not match the diffeomorphism");
  const Vec shift = y.array().floor().matrix();
  const Vec y0 = y - shift;

  Vec x = lattice_inverse_real_ * y0;
  Vec res = forward(x) - y0;
  double rn = res.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < max_iter && rn > tol; ++it) {
    const Vec dx = jacobian(x).partialPivLu().solve(res);
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 30; ++k) {
      Vec trial = x - lambda * dx;
      Vec rt = forward(trial) - y0;
      const double tn = rt.lpNorm<Eigen::Infinity>();
      if (tn < rn) {
        x = std::move(trial);
        res = std::move(rt);
        rn = tn;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) break;
  }
  if (!(rn <= tol))
    throw ConvergenceFailure("Newton inversion of Phi stalled with residual " + std::to_string(rn));
  return x + lattice_inverse_real_ * shift;
}

}  // namespace torusflow
