#include "torusflow/analytic.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

#include "torusflow/error.hpp"
#include "torusflow/quadrature.hpp"
#include "torusflow/sign_analysis.hpp"

namespace torusflow {
namespace {

class Digest {
 public:
  void add(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    add_bytes(bits);
  }
  void add(long long v) { add_bytes(static_cast<std::uint64_t>(v)); }
  void add(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) add(v[i]);
  }
  void add(const ScalarField& f) {
    add(static_cast<long long>(f.mode()));
    add(f.offset());
    for (const auto& t : f.terms()) {
      for (double k : t.frequency) add(k);
      add(t.cos_coeff);
      add(t.sin_coeff);
    }
  }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << state_;
    return os.str();
  }

 private:
  void add_bytes(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t state_ = 0xcbf29ce484222325ull;
};

struct Speed {
  double value;
  DriftCase tag;
  std::string note;
};

// a* for the straight field a xi started at y.
Speed direction_speed(const ScalarField& a, const Vec& xi, const Vec& y, const DirectionClass& cls) {
  if (std::holds_alternative<TotallyIrrational>(cls)) {
    const auto sign = analyze_sign(a);
    if (sign.kind == SignClass::Positive) {
      std::string note = sign.certified ? "" : "positivity from grid scan, not certified by an offset";
      return {harmonic_mean(a), DriftCase::IrrationalPositive, note};
    }
    return {0.0, DriftCase::IrrationalVanishing, "a vanishes on the torus"};
  }
  if (const auto* r = std::get_if<RationalPeriod>(&cls)) {
    try {
      return {line_harmonic_mean(a, xi, r->period, y), DriftCase::RationalLinePositive, ""};
    } catch (const VanishesOnLine&) {
      return {0.0, DriftCase::RationalLineVanishing, "a vanishes on the line through the start"};
    }
  }
  return {0.0, DriftCase::Unsupported, "direction class indeterminate within the search bound"};
}

}  // namespace

std::string_view to_string(DriftCase c) {
  switch (c) {
    case DriftCase::OneDPositive:
      return "OneD-positive";
    case DriftCase::OneDVanishing:
      return "OneD-vanishing";
    case DriftCase::IrrationalPositive:
      return "Irrational-positive";
    case DriftCase::IrrationalVanishing:
      return "Irrational-vanishing";
    case DriftCase::RationalLinePositive:
      return "Rational-line-positive";
    case DriftCase::RationalLineVanishing:
      return "Rational-line-vanishing";
    case DriftCase::Rectified:
      return "Rectified";
    case DriftCase::Current:
      return "Current";
    case DriftCase::Unsupported:
      return "Unsupported";
  }
  return "Unsupported";
}

double harmonic_mean(const ScalarField& a, int initial_points) {
  const auto sign = analyze_sign(a);
  if (sign.kind != SignClass::Positive)
    throw VanishingField("harmonic mean requires a > 0 (minimum found " + std::to_string(sign.minimum) + ")");
  const auto r = torus_integral([&](const Vec& y) { return 1.0 / a.value(y); }, a.dim(), 1e-12, initial_points);
  if (!r.converged) throw ConvergenceFailure("quadrature of 1/a did not reach 1e-12 relative stability");
  return 1.0 / r.value;
}

double line_harmonic_mean(const ScalarField& a, const Vec& xi, double period, const Vec& x) {
  if (xi.size() != a.dim() || x.size() != a.dim()) throw DimensionMismatch("line harmonic mean dimensions differ");
  if (!(period > 0.0)) throw InvalidField("line period must be positive");
  const double p = x.dot(xi);
  const Vec base = x - p * xi;
  const auto sign = analyze_sign_on_segment(a, xi, base, p, p + period);
  if (sign.kind != SignClass::Positive)
    throw VanishesOnLine("a vanishes on the line (minimum " + std::to_string(sign.minimum) + ")");
  const auto panels = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(4.0 * period * std::max(1.0, a.max_frequency()))));
  const auto r = adaptive_gauss_legendre([&](double s) { return 1.0 / a.value(s * xi + base); }, p, p + period, 1e-12,
                                         panels);
  if (!r.converged) throw ConvergenceFailure("line quadrature of 1/a did not converge");
  return period / r.value;
}

DriftPrediction predict_drift(const FieldSpec& spec, const Vec& x, const DirectionClass& cls) {
  if (x.size() != spec.dim()) throw DimensionMismatch("start point dimension does not match the field");
  DriftPrediction out;
  out.value = Vec::Zero(spec.dim());
  Digest digest;
  digest.add(x);
  digest.add(static_cast<long long>(spec.variant().index()));

  if (const auto* f = spec.get_if<OneDField>()) {
    digest.add(f->b);
    const auto sign = analyze_sign(f->b);
    bool nonvanishing = sign.kind == SignClass::Positive;
    if (!nonvanishing && f->b.mode() == FieldMode::Raw)
      nonvanishing = analyze_sign(f->b.scaled(-1.0)).kind == SignClass::Positive;
    if (nonvanishing) {
      const auto r = torus_integral([&](const Vec& y) { return 1.0 / f->b.value(y); }, 1);
      if (!r.converged) throw ConvergenceFailure("quadrature of 1/b did not converge");
      out.value[0] = 1.0 / r.value;
      out.case_tag = DriftCase::OneDPositive;
    } else {
      out.case_tag = DriftCase::OneDVanishing;
      out.note = sign.kind == SignClass::ChangesSign ? "b changes sign; trajectories are trapped between zeros"
                                                     : "b vanishes";
    }
  } else if (const auto* f = spec.get_if<DirectionField>()) {
    digest.add(f->a);
    digest.add(f->xi);
    auto s = direction_speed(f->a, f->xi, x, cls);
    out.value = s.value * f->xi;
    out.case_tag = s.tag;
    out.note = s.note;
  } else if (const auto* f = spec.get_if<RectifiedField>()) {
    digest.add(f->a);
    digest.add(f->xi);
    for (const auto& p : f->phi.periodic()) digest.add(p);
    for (Eigen::Index i = 0; i < f->phi.lattice().size(); ++i) digest.add(f->phi.lattice().data()[i]);
    const Vec y = f->phi.forward(x);
    auto s = direction_speed(f->a, f->xi, y, cls);
    if (s.tag == DriftCase::Unsupported) {
      out.case_tag = DriftCase::Unsupported;
      out.note = s.note;
    } else {
      out.value = s.value * (f->phi.lattice_inverse().cast<double>() * f->xi);
      out.case_tag = DriftCase::Rectified;
      out.note = std::string("straightened case ") + std::string(to_string(s.tag));
    }
  } else if (spec.get_if<CurrentField>() != nullptr) {
    out.case_tag = DriftCase::Current;
  } else {
    out.case_tag = DriftCase::Unsupported;
    out.note = "no closed form for generic fields";
  }
  digest.add(static_cast<long long>(out.case_tag));
  out.inputs_digest = digest.hex();
  return out;
}

DriftPrediction predict_drift(const FieldSpec& spec, const Vec& x, int search_bound) {
  if (const auto* f = spec.get_if<DirectionField>()) return predict_drift(spec, x, classify_direction(f->xi, search_bound));
  if (const auto* f = spec.get_if<RectifiedField>()) return predict_drift(spec, x, classify_direction(f->xi, search_bound));
  return predict_drift(spec, x, DirectionClass{Indeterminate{search_bound, {}}});
}

}  // namespace torusflow
