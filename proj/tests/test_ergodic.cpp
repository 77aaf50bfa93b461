#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "properties.hpp"
#include "torusflow/error.hpp"
#include "torusflow/ergodic.hpp"

using namespace torusflow;

namespace {

constexpr double kPi = std::numbers::pi;

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}
ScalarField two_plus_sin() { return ScalarField(1, {{{0}, 2, 0}, {{1}, 0, 1}}); }
ScalarField two_plus_sin_cos() { return ScalarField(2, {{{0, 0}, 2, 0}, {{1, 1}, 0, 0.5}, {{1, -1}, 0, 0.5}}); }
ScalarField cos2_field() { return ScalarField(1, {{{0.5}, oracle::kInvSqrtPi, 0}}, FieldMode::Squared); }
Vec irrational() { return v2(1, std::sqrt(2.0)) / std::sqrt(3.0); }

}  // namespace

TEST_CASE("birkhoff averages") {
  const auto spec = FieldSpec::direction(ScalarField::constant(2, 1.0), irrational());
  const auto traj = integrate(spec, v2(0.1, 0.2), 1e4);
  CHECK(birkhoff_average(traj, ScalarField::constant(2, 3.5)) == doctest::Approx(3.5).epsilon(1e-14));
  const ScalarField c(2, {{{1, 0}, 1, 0}});
  CHECK(std::abs(birkhoff_average(traj, c)) <= 0.01);
  // Explicit bound 1 / (pi xi_1 t).
  CHECK(std::abs(birkhoff_average(traj, c)) <= 1.0 / (kPi * irrational()[0] * 1e4) * (1 + 1e-6));
  CHECK(std::abs(birkhoff_average(traj, c, 100.0)) <= 1.0 / (kPi * irrational()[0] * 100.0) * (1 + 1e-6));

  // Along the cos^2 flow the average of b is (X(t) - x) / t.
  const auto vt = integrate(FieldSpec::one_d(cos2_field()), v1(0.1), 1e4);
  const double avg = birkhoff_average(vt, cos2_field());
  CHECK(avg == doctest::Approx((vt.final_state()[0] - 0.1) / 1e4).epsilon(1e-8));
  CHECK(avg < 1e-4);

  CHECK_THROWS_AS(birkhoff_average(Trajectory{}, c), Error);
  CHECK_THROWS_AS(birkhoff_average(traj, c, 2e4), Error);
}

TEST_CASE("drift estimates") {
  const auto unit = FieldSpec::direction(ScalarField::constant(2, 1.0), irrational());
  const auto est = drift_estimate(integrate(unit, v2(0, 0), 100.0));
  for (const auto& c : est.checkpoints) CHECK((c.drift - irrational()).cwiseAbs().maxCoeff() <= 1e-13);

  const auto cos2 = drift_estimate(integrate(FieldSpec::one_d(cos2_field()), v1(0.0), 1e4));
  for (const auto& c : cos2.checkpoints) CHECK(std::abs(c.drift[0]) <= 1.0 / c.t);

  const auto h = drift_estimate(integrate(FieldSpec::one_d(two_plus_sin()), v1(0.0), 1e4));
  CHECK(std::abs(h.final[0] - oracle::kSqrt3) <= 1e-3);
  CHECK(h.dispersion[0] <= 1e-3);
}

TEST_CASE("empirical measures") {
  // Equilibrium: a single bin holds all the mass.
  const auto eq = empirical_measure(integrate(FieldSpec::one_d(cos2_field()), v1(0.5), 100.0), 16);
  const std::size_t bin = eq.bin_of(v1(0.5));
  CHECK(eq.weights()[bin] == doctest::Approx(1.0).epsilon(1e-12));

  // Unit-speed rotation over an integer time: uniform.
  const int n = 32;
  const auto uni = empirical_measure(integrate(FieldSpec::one_d(ScalarField::constant(1, 1.0)), v1(0.3), 50.0), n);
  for (double w : uni.weights()) CHECK(std::abs(w - 1.0 / n) <= 1.0 / (n * 50.0));

  // 1D positive b: weights follow the bin averages of bbar / b.
  const int m = 16;
  const double t = 1e4;
  const auto mu = empirical_measure(integrate(FieldSpec::one_d(two_plus_sin()), v1(0.0), t), m);
  for (int i = 0; i < m; ++i) {
    const double cell = oracle::kSqrt3 * oracle::trapezoid_1d(
                                             [&](double s) {
                                               const double y = (i + s) / m;
                                               return 1.0 / (2 + std::sin(2 * kPi * y));
                                             },
                                             4096) /
                        m;
    CHECK(std::abs(mu.weights()[i] - cell) <= 2.0 / t);
  }

  CHECK_THROWS_AS(empirical_measure(integrate(FieldSpec::one_d(two_plus_sin()), v1(0), 1.0), 1), Error);
  const auto big = FieldSpec::generic(std::vector<ScalarField>(5, ScalarField::constant(5, 1.0)));
  CHECK_THROWS_AS(empirical_measure(integrate(big, Vec::Zero(5), 1.0), 64), Error);
}

TEST_CASE("measure averages") {
  const auto traj = integrate(FieldSpec::direction(two_plus_sin_cos(), irrational()), v2(0.2, 0.1), 1000.0);
  const auto mu = empirical_measure(traj, 64);
  CHECK(measure_average(mu, ScalarField::constant(2, 1.0)) == doctest::Approx(1.0).epsilon(1e-12));

  const ScalarField f(2, {{{1, 2}, 0.3, -0.2}, {{0, 1}, 0.5, 0.1}});
  const double lip = f.lipschitz_bound();
  const auto dirac = EmpiricalMeasure::dirac(v2(0.37, 0.81), 32);
  CHECK(std::abs(measure_average(dirac, f) - f.value(v2(0.37, 0.81))) <= lip / 32);

  // Binned vs time average.
  CHECK(std::abs(measure_average(mu, f) - birkhoff_average(traj, f)) <= lip / 64);

  // int b d(nu_t) against the drift.
  const auto spec = FieldSpec::direction(two_plus_sin_cos(), irrational());
  const Vec mv = measure_vector_average(mu, spec);
  const Vec drift = drift_estimate(traj).final;
  const double lip_b = two_plus_sin_cos().lipschitz_bound();
  CHECK((mv - drift).cwiseAbs().maxCoeff() <= lip_b / 64 + 2.0 / 1000.0);

  CHECK_THROWS_AS(measure_average(mu, ScalarField::constant(1, 1.0)), DimensionMismatch);
  CHECK_THROWS_AS(measure_vector_average(mu, FieldSpec::one_d(two_plus_sin())), DimensionMismatch);
}

TEST_CASE("drift equals the birkhoff average of b") {
  props::Gen g(41);
  for (int i = 0; i < 10; ++i) {
    const FieldSpec spec = g.spec(i);
    const int d = spec.dim();
    const Vec x = g.point(d);
    const auto traj = integrate(spec, x, 50.0);
    const Vec drift = drift_estimate(traj).final;
    for (int j = 0; j < d; ++j) {
      const double avg = birkhoff_average(traj, [&](const Vec& y) { return spec.velocity(y)[j]; });
      CHECK(std::abs(avg - (drift[j] - x[j] / 50.0)) <= 1e-9);
    }
  }
}

TEST_CASE("C_b probe") {
  const auto spec = FieldSpec::direction(two_plus_sin_cos(), irrational());
  std::vector<Vec> starts = {v2(0, 0), v2(0.1, 0.7), v2(0.25, 0.5), v2(0.6, 0.3), v2(0.9, 0.9)};
  const auto probe = cb_probe(spec, starts, 1e4, 64);
  CHECK(probe.estimates.size() == 5);
  CHECK(probe.diameter <= 0.02 * oracle::kHarmonicMean2d);

  const auto rational = FieldSpec::direction(two_plus_sin_cos(), v2(1, 0));
  std::vector<Vec> lines = {v2(0, 0), v2(0, 0.25)};
  const auto rp = cb_probe(rational, lines, 1e4, 64, {}, 2);
  CHECK(rp.diameter == doctest::Approx(2.0 - oracle::kSqrt3).epsilon(0.01));
  CHECK(rp.measure_drifts.size() == 2);

  const auto current = FieldSpec::current(
      MatrixField(2, {ScalarField::constant(2, 1), ScalarField::constant(2, 0), ScalarField::constant(2, 0),
                      ScalarField::constant(2, 1)},
                  0.1),
      ScalarField(2, {{{1, 1}, oracle::kInvFourPi, 0}, {{1, -1}, oracle::kInvFourPi, 0}}));
  std::vector<Vec> basin = {v2(0.1, 0.05), v2(-0.2, 0.1), v2(0.15, -0.2)};
  const auto cp = cb_probe(current, basin, 1e3, 32);
  CHECK(cp.diameter <= 1e-6);
  for (const auto& e : cp.estimates) CHECK(e.final.cwiseAbs().maxCoeff() <= 1e-6);
}
