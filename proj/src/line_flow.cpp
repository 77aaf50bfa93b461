#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "torusflow/error.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/quadrature.hpp"
#include "torusflow/sign_analysis.hpp"

namespace torusflow {
namespace {

constexpr double kLineRelTol = 1e-12;

// Integral of 1/a along the line between parameters s0 and s1.
double inverse_speed_integral(const ScalarField& a, const Vec& xi, const Vec& base, double s0, double s1) {
  if (s0 == s1) return 0.0;
  const double k = std::max(1.0, a.max_frequency());
  const auto panels = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(std::abs(s1 - s0) * 4.0 * k)));
  auto g = [&](double s) { return 1.0 / a.value(s * xi + base); };
  return adaptive_gauss_legendre(g, s0, s1, kLineRelTol, panels).value;
}

const Vec& require_unit(const Vec& xi) {
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw InvalidField("direction vector must have unit length");
  return xi;
}

IntVec round_lattice(const Vec& v) {
  IntVec k(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) k[i] = std::llround(v[i]);
  return k;
}

// Period search along a Direction line through y: returns (tau, k) in the
// straightened coordinates, or nothing if the line is not closed or a vanishes.
std::optional<std::pair<double, IntVec>> line_period(const ScalarField& a, const Vec& xi, const Vec& y,
                                                     int search_bound) {
  const auto cls = classify_direction(xi, search_bound);
  const auto* rational = std::get_if<RationalPeriod>(&cls);
  if (rational == nullptr) return std::nullopt;
  const double p = y.dot(xi);
  const Vec base = y - p * xi;
  if (analyze_sign_on_segment(a, xi, base, p, p + rational->period).kind != SignClass::Positive)
    return std::nullopt;
  const double tau = inverse_speed_integral(a, xi, base, p, p + rational->period);
  return std::make_pair(tau, rational->lattice);
}

}  // namespace

Vec exact_line_solve(const ScalarField& a, const Vec& xi, const Vec& x, double t) {
  if (xi.size() != a.dim() || x.size() != a.dim()) throw DimensionMismatch("line solve dimensions differ");
  require_unit(xi);
  if (t == 0.0) return x;

  const double p = x.dot(xi);
  const Vec base = x - p * xi;
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  const double target = std::abs(t);

  // |u - p| <= |t| sup a, so this segment contains the solution.
  const double reach = target * a.sup_bound();
  const auto sign = analyze_sign_on_segment(a, xi, base, p - (sgn < 0 ? reach : 0.0), p + (sgn > 0 ? reach : 0.0));
  if (sign.kind != SignClass::Positive)
    throw VanishesOnLine("speed profile vanishes on the line (minimum " + std::to_string(sign.minimum) + ")");

  // Work with w = sgn*(s - p) >= 0 and H(w) = |F(p + sgn w) - F(p)|, which is increasing.
  auto increment = [&](double w0, double w1) {
    return sgn * inverse_speed_integral(a, xi, base, p + sgn * w0, p + sgn * w1);
  };
  auto slope = [&](double w) { return 1.0 / a.value((p + sgn * w) * xi + base); };

  double lo = 0.0, h_lo = 0.0;
  double hi = target * a.value(x);
  double h_hi = increment(lo, hi);
  while (h_hi < target) {
    lo = hi;
    h_lo = h_hi;
    hi = 2.0 * hi;
    h_hi = h_lo + increment(lo, hi);
  }

  // Safeguarded Newton inside [lo, hi].
  double w = lo, hw = h_lo;
  for (int it = 0; it < 200; ++it) {
    double next = w - (hw - target) / slope(w);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double h_next = hw + increment(w, next);
    const double dw = std::abs(next - w);
    w = next;
    hw = h_next;
    if (hw < target) {
      lo = w;
      h_lo = hw;
    } else {
      hi = w;
      h_hi = hw;
    }
    if (dw <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(w)) ||
        std::abs(hw - target) <= 2.0 * std::numeric_limits<double>::epsilon() * target)
      break;
  }
  const double u = p + sgn * w;
  return base + u * xi;
}

PeriodReport detect_torus_period(const FieldSpec& spec, const Vec& x, double tau_max, double tol,
                                 const PeriodOptions& options) {
  if (x.size() != spec.dim()) throw DimensionMismatch("start point dimension does not match the field");
  PeriodReport report;
  report.k = IntVec::Zero(spec.dim());

  const double speed = spec.velocity(x).norm();
  if (speed <= options.integrator.stationary_speed) {
    report.found = true;
    report.stationary = true;
    report.tau = std::min(1.0, tau_max);
    report.residual = speed * report.tau;
    return report;
  }

  auto confirm = [&](double tau, const IntVec& k) -> std::optional<double> {
    if (!(tau > 0.0) || tau > tau_max) return std::nullopt;
    IntegratorOptions o = options.integrator;
    o.checkpoints = {tau};
    o.keep_dense = false;
    const Trajectory traj = integrate(spec, x, tau, o);
    const double r = (traj.final_state() - x - k.cast<double>()).lpNorm<Eigen::Infinity>();
    if (r <= tol) return r;
    return std::nullopt;
  };

  // Closed-form period along rational lines (straightened by Phi when rectified).
  std::optional<std::pair<double, IntVec>> closed;
  if (const auto* f = spec.get_if<DirectionField>()) {
    closed = line_period(f->a, f->xi, x, options.search_bound);
  } else if (const auto* r = spec.get_if<RectifiedField>()) {
    closed = line_period(r->a, r->xi, r->phi.forward(x), options.search_bound);
    if (closed) closed->second = r->phi.lattice_inverse() * closed->second;
  }
  if (closed) {
    if (auto res = confirm(closed->first, closed->second)) {
      report.found = true;
      report.tau = closed->first;
      report.k = closed->second;
      report.residual = *res;
    }
    return report;
  }

  // Scan of the dense trajectory for near-lattice returns.
  IntegratorOptions o = options.integrator;
  o.keep_dense = true;
  const Trajectory traj = integrate(spec, x, tau_max, o);
  const auto& dense = traj.dense;
  Vec state;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    Vec start, end;
    dense.state_into(i, 0.0, start);
    dense.state_into(i, 1.0, end);
    const double disp = (end - start).lpNorm<Eigen::Infinity>();
    const int pieces = 1 + static_cast<int>(std::ceil(disp * 16.0));
    for (int j = 0; j <= pieces; ++j) {
      const double theta = static_cast<double>(j) / pieces;
      dense.state_into(i, theta, state);
      const Vec offset = state - x;
      const IntVec k = round_lattice(offset);
      if (k.isZero()) continue;
      if ((offset - k.cast<double>()).lpNorm<Eigen::Infinity>() > 0.1) continue;

      // Refine tau near this sample for the fixed lattice vector k.
      const double t0 = dense.step_start(i), h = dense.step_length(i);
      const double lo = std::max(0.0, t0 + h * (theta - 1.0 / pieces));
      const double hi = std::min(tau_max, t0 + h * (theta + 1.0 / pieces));
      auto dist = [&](double t) { return (traj.state_at(t) - x - k.cast<double>()).squaredNorm(); };
      auto [tau, d2] = boost::math::tools::brent_find_minima(dist, lo, hi, 52);
      if (std::sqrt(d2) > tol) continue;
      if (auto res = confirm(tau, k)) {
        report.found = true;
        report.tau = tau;
        report.k = k;
        report.residual = *res;
        return report;
      }
    }
  }
  return report;
}

}  // namespace torusflow
