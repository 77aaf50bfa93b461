#include "torusflow/scalar_field.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "torusflow/error.hpp"

namespace torusflow {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_integer(double v) { return std::isfinite(v) && std::nearbyint(v) == v; }

bool is_half_integer(double v) { return is_integer(2.0 * v); }

// Parity class of a frequency: 1 where the component is a half-odd integer.
std::vector<int> parity(const std::vector<double>& k) {
  std::vector<int> p(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) p[i] = is_integer(k[i]) ? 0 : 1;
  return p;
}

bool is_zero(const std::vector<double>& k) {
  for (double v : k)
    if (v != 0.0) return false;
  return true;
}

bool is_negation(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != -b[i]) return false;
  return true;
}

}  // namespace

ScalarField::ScalarField(int dim, std::vector<FourierTerm> terms, FieldMode mode, double offset)
    : dim_(dim), terms_(std::move(terms)), mode_(mode), offset_(offset) {
  if (dim_ < 1) throw InvalidField("scalar field dimension must be positive");
  if (!(offset_ >= 0.0) || !std::isfinite(offset_))
    throw InvalidField("squared-mode offset must be finite and nonnegative");
  if (mode_ == FieldMode::Raw && offset_ != 0.0)
    throw InvalidField("raw-mode fields carry no offset");

  std::vector<int> pattern;
  for (std::size_t t = 0; t < terms_.size(); ++t) {
    const auto& term = terms_[t];
    if (static_cast<int>(term.frequency.size()) != dim_)
      throw DimensionMismatch("term " + std::to_string(t) + " has frequency of length " +
                              std::to_string(term.frequency.size()) + ", expected " +
                              std::to_string(dim_));
    if (!std::isfinite(term.cos_coeff) || !std::isfinite(term.sin_coeff))
      throw InvalidField("term " + std::to_string(t) + " has a non-finite coefficient");
    for (double k : term.frequency) {
      if (mode_ == FieldMode::Raw ? !is_integer(k) : !is_half_integer(k))
        throw InvalidField("term " + std::to_string(t) + " has a non-admissible frequency " +
                           std::to_string(k));
    }
    if (is_zero(term.frequency) && term.sin_coeff != 0.0)
      throw InvalidField("the zero frequency cannot carry a sine coefficient");
    auto p = parity(term.frequency);
    if (t == 0) {
      pattern = p;
    } else if (p != pattern) {
      throw InvalidField("squared-mode terms must share one half-integer parity pattern");
    }
    for (std::size_t u = 0; u < t; ++u) {
      if (terms_[u].frequency == term.frequency)
        throw InvalidField("duplicate frequency in term " + std::to_string(t));
      if (!is_zero(term.frequency) && is_negation(terms_[u].frequency, term.frequency))
        throw InvalidField("term " + std::to_string(t) +
                           " repeats the mode of an earlier term with negated frequency");
    }
  }
}

ScalarField ScalarField::constant(int dim, double value) {
  return ScalarField(dim, {FourierTerm{std::vector<double>(dim, 0.0), value, 0.0}});
}

void ScalarField::check_dim(const Vec& x) const {
  if (x.size() != dim_)
    throw DimensionMismatch("point of dimension " + std::to_string(x.size()) +
                            " passed to a field of dimension " + std::to_string(dim_));
}

double ScalarField::base(const Vec& x) const {
  check_dim(x);
  double q = 0.0;
  for (const auto& term : terms_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += term.frequency[i] * x[i];
    phase *= kTwoPi;
    q += term.cos_coeff * std::cos(phase) + term.sin_coeff * std::sin(phase);
  }
  return q;
}

double ScalarField::value(const Vec& x) const {
  const double q = base(x);
  return mode_ == FieldMode::Raw ? q : q * q + offset_;
}

double ScalarField::value_and_gradient(const Vec& x, Vec& grad) const {
  check_dim(x);
  grad.setZero(dim_);
  double q = 0.0;
  for (const auto& term : terms_) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += term.frequency[i] * x[i];
    phase *= kTwoPi;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    q += term.cos_coeff * c + term.sin_coeff * s;
    const double dphase = kTwoPi * (term.sin_coeff * c - term.cos_coeff * s);
    for (int i = 0; i < dim_; ++i) grad[i] += dphase * term.frequency[i];
  }
  if (mode_ == FieldMode::Raw) return q;
  grad *= 2.0 * q;
  return q * q + offset_;
}

Vec ScalarField::gradient(const Vec& x) const {
  Vec g;
  value_and_gradient(x, g);
  return g;
}

double ScalarField::sup_bound() const {
  double q = 0.0;
  for (const auto& term : terms_) q += std::abs(term.cos_coeff) + std::abs(term.sin_coeff);
  return mode_ == FieldMode::Raw ? q : q * q + offset_;
}

double ScalarField::lipschitz_bound() const {
  double q = 0.0;
  double lq = 0.0;
  for (const auto& term : terms_) {
    double knorm = 0.0;
    for (double k : term.frequency) knorm += k * k;
    const double amp = std::abs(term.cos_coeff) + std::abs(term.sin_coeff);
    q += amp;
    lq += kTwoPi * std::sqrt(knorm) * amp;
  }
  return mode_ == FieldMode::Raw ? lq : 2.0 * q * lq;
}

double ScalarField::hessian_bound() const {
  double q = 0.0;
  double lq = 0.0;
  double hq = 0.0;
  for (const auto& term : terms_) {
    double knorm2 = 0.0;
    for (double k : term.frequency) knorm2 += k * k;
    const double amp = std::abs(term.cos_coeff) + std::abs(term.sin_coeff);
    q += amp;
    lq += kTwoPi * std::sqrt(knorm2) * amp;
    hq += kTwoPi * kTwoPi * knorm2 * amp;
  }
  return mode_ == FieldMode::Raw ? hq : 2.0 * (lq * lq + q * hq);
}

double ScalarField::max_frequency() const {
  double m = 0.0;
  for (const auto& term : terms_)
    for (double k : term.frequency) m = std::max(m, std::abs(k));
  return m;
}

ScalarField ScalarField::scaled(double c) const {
  auto terms = terms_;
  if (mode_ == FieldMode::Raw) {
    for (auto& t : terms) {
      t.cos_coeff *= c;
      t.sin_coeff *= c;
    }
    return ScalarField(dim_, std::move(terms), mode_, 0.0);
  }
  if (!(c > 0.0)) throw InvalidField("squared-mode fields can only be scaled by c > 0");
  const double r = std::sqrt(c);
  for (auto& t : terms) {
    t.cos_coeff *= r;
    t.sin_coeff *= r;
  }
  return ScalarField(dim_, std::move(terms), mode_, offset_ * c);
}

bool ScalarField::is_constant() const {
  for (const auto& term : terms_)
    if (!is_zero(term.frequency) && (term.cos_coeff != 0.0 || term.sin_coeff != 0.0)) return false;
  return true;
}

}  // namespace torusflow
