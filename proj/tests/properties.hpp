#pragma once

// Randomized property checks shared by the unit tests and the acceptance
// binary. Every check runs a fixed number of seeded instances and reports the
// worst deviation against its limit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "torusflow/analytic.hpp"
#include "torusflow/ergodic.hpp"
#include "torusflow/field_spec.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/quadrature.hpp"

namespace props {

using namespace torusflow;

struct Outcome {
  std::string name;
  int instances = 0;
  int failures = 0;
  double worst = 0.0;
  std::string limit;
  bool ok() const { return instances > 0 && failures == 0; }
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Vec point(int d, double lo = -1.0, double hi = 1.0) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x[i] = uniform(lo, hi);
    return x;
  }

  std::vector<double> frequency(int d, int max_freq) {
    std::vector<double> k(d, 0.0);
    while (std::all_of(k.begin(), k.end(), [](double v) { return v == 0.0; }))
      for (auto& v : k) v = integer(-max_freq, max_freq);
    // Canonical half space so that no term repeats the mode of another.
    for (double v : k) {
      if (v > 0) break;
      if (v < 0) {
        for (auto& w : k) w = -w;
        break;
      }
    }
    return k;
  }

  /// Nonconstant Raw trigonometric polynomial with distinct modes and a constant term.
  std::vector<FourierTerm> terms(int d, int count, int max_freq, double amplitude) {
    int modes = 1;
    for (int i = 0; i < d; ++i) modes *= 2 * max_freq + 1;
    count = std::min(count, (modes - 1) / 2);
    std::vector<FourierTerm> out;
    while (static_cast<int>(out.size()) < count) {
      auto k = frequency(d, max_freq);
      if (std::any_of(out.begin(), out.end(), [&](const FourierTerm& t) { return t.frequency == k; })) continue;
      out.push_back({k, uniform(-amplitude, amplitude), uniform(-amplitude, amplitude)});
    }
    return out;
  }

  ScalarField raw(int d, int count = 3, int max_freq = 2, double amplitude = 1.0) {
    auto t = terms(d, count, max_freq, amplitude);
    t.push_back({std::vector<double>(d, 0.0), uniform(-amplitude, amplitude), 0.0});
    return ScalarField(d, std::move(t));
  }

  /// Raw field bounded below by `margin`: constant term exceeds the coefficient sum.
  ScalarField positive(int d, double margin = 0.5, int count = 3, int max_freq = 2, double amplitude = 0.5) {
    auto t = terms(d, count, max_freq, amplitude);
    double sum = 0.0;
    for (const auto& term : t) sum += std::abs(term.cos_coeff) + std::abs(term.sin_coeff);
    t.push_back({std::vector<double>(d, 0.0), sum + margin, 0.0});
    return ScalarField(d, std::move(t));
  }

  ScalarField squared(int d, double offset) {
    auto t = terms(d, 2, 2, 0.7);
    return ScalarField(d, std::move(t), FieldMode::Squared, offset);
  }

  Vec direction(int d) {
    Vec xi = point(d);
    while (xi.norm() < 0.1) xi = point(d);
    return xi;
  }

  /// Families cycle with `index`: direction, rectified, current, oned, generic.
  FieldSpec spec(int index, bool conservative_only = false) {
    const int family = conservative_only ? std::vector<int>{0, 1, 3}[index % 3] : index % 5;
    switch (family) {
      case 0: {
        const int d = integer(1, 3);
        if (integer(0, 1) == 0) return FieldSpec::direction(positive(d), direction(d));
        return FieldSpec::direction(squared(d, uniform(0.2, 1.0)), direction(d));
      }
      case 1: {
        IntMat lattice(2, 2);
        lattice << 1, integer(-1, 1), 0, 1;
        std::vector<ScalarField> periodic;
        for (int i = 0; i < 2; ++i) periodic.push_back(raw(2, 2, 1, 0.03));
        return FieldSpec::rectified(positive(2), direction(2), Diffeomorphism(lattice, std::move(periodic)));
      }
      case 2: {
        const int d = integer(1, 3);
        std::vector<ScalarField> factor;
        for (int i = 0; i < d * d; ++i) factor.push_back(raw(d, 2, 1, 0.4));
        return FieldSpec::current(MatrixField(d, std::move(factor), uniform(0.0, 0.5)), raw(d, 3, 2, 0.1));
      }
      case 3:
        return FieldSpec::one_d(positive(1));
      default: {
        const int d = integer(2, 3);
        std::vector<ScalarField> comps;
        for (int i = 0; i < d; ++i) comps.push_back(raw(d, 3, 2, 0.5));
        return FieldSpec::generic(std::move(comps));
      }
    }
  }

 private:
  std::mt19937_64 rng_;
};

inline void record(Outcome& o, double deviation, double limit) {
  ++o.instances;
  o.worst = std::max(o.worst, deviation);
  if (!(deviation <= limit)) ++o.failures;
}

inline constexpr int kInstances = 100;

/// X(t, x + k) - X(t, x) = k within 10 rtol.
inline Outcome lattice_equivariance(std::uint64_t seed = 101) {
  Outcome o{"lattice equivariance", 0, 0, 0.0, "10*rtol"};
  Gen g(seed);
  IntegratorOptions opt;
  for (int i = 0; i < kInstances; ++i) {
    const FieldSpec spec = g.spec(i);
    const int d = spec.dim();
    const Vec x = g.point(d);
    Vec k(d);
    for (int j = 0; j < d; ++j) k[j] = g.integer(-2, 2);
    const double t = g.uniform(0.5, 10.0);
    const Vec a = integrate(spec, x, t, opt).final_state();
    const Vec b = integrate(spec, x + k, t, opt).final_state();
    record(o, (b - a - k).cwiseAbs().maxCoeff(), 10 * opt.rtol);
  }
  return o;
}

/// X(s + t, x) = X(t, X(s, x)) within 10 (rtol + atol).
inline Outcome semigroup(std::uint64_t seed = 202) {
  Outcome o{"semigroup", 0, 0, 0.0, "10*(rtol+atol)"};
  Gen g(seed);
  IntegratorOptions opt;
  for (int i = 0; i < kInstances; ++i) {
    const FieldSpec spec = g.spec(i);
    const Vec x = g.point(spec.dim());
    const double s = g.uniform(0.1, 10.0);
    const double t = g.uniform(0.1, 10.0);
    const Vec direct = integrate(spec, x, s + t, opt).final_state();
    const Vec mid = integrate(spec, x, s, opt).final_state();
    const Vec composed = integrate(spec, mid, t, opt).final_state();
    record(o, (direct - composed).cwiseAbs().maxCoeff(), 10 * (opt.rtol + opt.atol));
  }
  return o;
}

/// Forward to t, then the reversed field back to 0, returns to x within 100 rtol.
/// Fields with attracting equilibria are excluded: reversal there amplifies errors exponentially.
inline Outcome reversibility(std::uint64_t seed = 303) {
  Outcome o{"reversibility", 0, 0, 0.0, "100*rtol"};
  Gen g(seed);
  IntegratorOptions fwd;
  IntegratorOptions back;
  back.reverse = true;
  for (int i = 0; i < kInstances; ++i) {
    const FieldSpec spec = g.spec(i, true);
    const Vec x = g.point(spec.dim());
    const double t = g.uniform(0.5, 10.0);
    const Vec y = integrate(spec, x, t, fwd).final_state();
    const Vec z = integrate(spec, y, t, back).final_state();
    record(o, (z - x).cwiseAbs().maxCoeff(), 100 * fwd.rtol);
  }
  return o;
}

/// Empirical measures sum to 1 within 1e-12.
inline Outcome measure_normalization(std::uint64_t seed = 404) {
  Outcome o{"measure normalization", 0, 0, 0.0, "1e-12"};
  Gen g(seed);
  for (int i = 0; i < kInstances; ++i) {
    const FieldSpec spec = g.spec(i);
    const int d = spec.dim();
    const int n = d == 3 ? g.integer(4, 16) : g.integer(4, 64);
    const auto traj = integrate(spec, g.point(d), g.uniform(1.0, 20.0));
    const auto mu = empirical_measure(traj, n);
    double total = 0.0;
    for (double w : mu.weights()) total += w;
    record(o, std::abs(total - 1.0), 1e-12);
  }
  return o;
}

/// Analytic gradient against central differences with h = 1e-5, within 1e-6.
inline Outcome gradient_check(std::uint64_t seed = 505) {
  Outcome o{"gradient vs finite differences", 0, 0, 0.0, "1e-6"};
  Gen g(seed);
  const double h = 1e-5;
  for (int i = 0; i < kInstances; ++i) {
    const int d = g.integer(1, 3);
    const ScalarField f = i % 2 == 0 ? g.raw(d) : g.squared(d, g.uniform(0.0, 1.0));
    const Vec x = g.point(d);
    const Vec grad = f.gradient(x);
    double dev = 0.0;
    for (int j = 0; j < d; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      dev = std::max(dev, std::abs(grad[j] - (f.value(xp) - f.value(xm)) / (2 * h)));
    }
    record(o, dev, 1e-6);
  }
  return o;
}

/// Harmonic mean <= arithmetic mean, strictly for nonconstant a.
inline Outcome harmonic_below_arithmetic(std::uint64_t seed = 606) {
  Outcome o{"harmonic <= arithmetic mean", 0, 0, 0.0, "< 0 (strict)"};
  Gen g(seed);
  for (int i = 0; i < kInstances; ++i) {
    const int d = g.integer(1, 2);
    const ScalarField a = g.positive(d, g.uniform(0.05, 1.0));
    const double arithmetic = torus_integral([&](const Vec& y) { return a.value(y); }, d).value;
    const double harmonic = harmonic_mean(a);
    // Deviation is (harmonic - arithmetic) / arithmetic, which must be negative.
    const double dev = (harmonic - arithmetic) / arithmetic;
    ++o.instances;
    o.worst = o.instances == 1 ? dev : std::max(o.worst, dev);
    if (!(dev < 0.0)) ++o.failures;
  }
  return o;
}

inline std::vector<Outcome> all() {
  return {lattice_equivariance(), semigroup(), reversibility(), measure_normalization(), gradient_check(),
          harmonic_below_arithmetic()};
}

}  // namespace props
