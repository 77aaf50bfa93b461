#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "properties.hpp"
#include "torusflow/diffeomorphism.hpp"
#include "torusflow/direction.hpp"
#include "torusflow/error.hpp"
#include "torusflow/field_spec.hpp"
#include "torusflow/matrix_field.hpp"
#include "torusflow/quadrature.hpp"
#include "torusflow/scalar_field.hpp"
#include "torusflow/sign_analysis.hpp"

using namespace torusflow;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }
Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

ScalarField two_plus_sin() { return ScalarField(1, {{{0}, 2, 0}, {{1}, 0, 1}}); }
ScalarField two_plus_sin_cos() { return ScalarField(2, {{{0, 0}, 2, 0}, {{1, 1}, 0, 0.5}, {{1, -1}, 0, 0.5}}); }
ScalarField cos2_over_pi(int d) {
  std::vector<double> k(d, 0.0);
  k[0] = 0.5;
  return ScalarField(d, {{k, oracle::kInvSqrtPi, 0}}, FieldMode::Squared);
}

}  // namespace

TEST_CASE("scalar field evaluation") {
  CHECK(ScalarField::constant(3, 1.0).value(Vec::Random(3)) == 1.0);
  CHECK(two_plus_sin().value(v1(0.25)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(std::abs(cos2_over_pi(2).value(v2(0.5, 0.3))) < 1e-32);
  CHECK(cos2_over_pi(1).value(v1(0.0)) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-15));
  CHECK(two_plus_sin_cos().value(v2(0.25, 0.0)) == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("scalar field gradient") {
  CHECK(ScalarField::constant(2, 5.0).gradient(v2(0.1, 0.2)).norm() == 0.0);
  const ScalarField s(1, {{{1}, 0, 1}});
  CHECK(s.gradient(v1(0.0))[0] == doctest::Approx(2 * std::numbers::pi).epsilon(1e-15));
  // Relative agreement with central differences.
  props::Gen g(7);
  for (int i = 0; i < 50; ++i) {
    const ScalarField f = i % 2 ? g.raw(2) : g.squared(2, 0.3);
    const Vec x = g.point(2);
    const Vec grad = f.gradient(x);
    for (int j = 0; j < 2; ++j) {
      Vec xp = x, xm = x;
      xp[j] += 1e-5;
      xm[j] -= 1e-5;
      const double fd = (f.value(xp) - f.value(xm)) / 2e-5;
      CHECK(std::abs(grad[j] - fd) <= 1e-7 * std::max(1.0, std::abs(fd)) + 1e-6);
    }
  }
}

TEST_CASE("scalar field validation") {
  CHECK_THROWS_AS(two_plus_sin().value(v2(0, 0)), DimensionMismatch);
  CHECK_THROWS_AS(two_plus_sin().gradient(v2(0, 0)), DimensionMismatch);
  CHECK_THROWS_AS(ScalarField(1, {{{0.5}, 1, 0}}), InvalidField);
  CHECK_THROWS_AS(ScalarField(2, {{{0.5, 0}, 1, 0}, {{1, 0}, 1, 0}}, FieldMode::Squared), InvalidField);
  CHECK_THROWS_AS(ScalarField(1, {{{0}, 1, 1}}), InvalidField);
  CHECK_THROWS_AS(ScalarField(1, {{{1}, 1, 0}, {{-1}, 1, 0}}), InvalidField);
  CHECK_THROWS_AS(ScalarField(1, {{{1}, 1, 0}}, FieldMode::Raw, 0.5), InvalidField);
  CHECK_THROWS_AS(ScalarField(2, {{{1}, 1, 0}}), DimensionMismatch);
}

TEST_CASE("squared fields are nonnegative and bounded below by the offset") {
  props::Gen g(11);
  for (int rep = 0; rep < 5; ++rep) {
    const double m = rep * 0.25;
    const ScalarField f = g.squared(2, m);
    double lo = INFINITY;
    const int n = 256;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lo = std::min(lo, f.value(v2(double(i) / n, double(j) / n)));
    CHECK(lo >= 0.0);
    CHECK(lo >= m);
  }
}

TEST_CASE("periodicity of every field family") {
  props::Gen g(13);
  for (int i = 0; i < 100; ++i) {
    const FieldSpec spec = g.spec(i);
    const int d = spec.dim();
    const Vec x = g.point(d);
    Vec k(d);
    for (int j = 0; j < d; ++j) k[j] = g.integer(-2, 2);
    CHECK((eval_field(spec, x + k) - eval_field(spec, x)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("sign analysis") {
  CHECK(analyze_sign(two_plus_sin()).kind == SignClass::Positive);
  CHECK(analyze_sign(two_plus_sin()).minimum == doctest::Approx(1.0).epsilon(1e-9));
  const auto v = analyze_sign(cos2_over_pi(2));
  CHECK(v.kind == SignClass::Vanishing);
  CHECK(std::abs(v.minimum) < kEpsZero);
  CHECK(analyze_sign(ScalarField(1, {{{0}, 0.5, 0}, {{1}, 0, 1}})).kind == SignClass::ChangesSign);
  const auto c = analyze_sign(ScalarField(1, {{{1}, 1, 0}}, FieldMode::Squared, 0.1));
  CHECK(c.kind == SignClass::Positive);
  CHECK(c.certified);
  // Irrational zero location: 2 - 2 cos(2 pi (y - 0.3137)) touches 0 off the grid.
  const double s = 2 * std::numbers::pi * 0.3137;
  const ScalarField off(1, {{{0}, 2, 0}, {{1}, -2 * std::cos(s), -2 * std::sin(s)}});
  CHECK(analyze_sign(off).kind == SignClass::Vanishing);
}

TEST_CASE("direction and rectified fields") {
  const auto one = FieldSpec::direction(ScalarField::constant(2, 1.0), v2(1, 0));
  CHECK((eval_field(one, v2(0.3, 0.7)) - v2(1, 0)).norm() == 0.0);
  const auto a = two_plus_sin_cos();
  const Vec xi = v2(1, std::sqrt(2.0));
  const auto dir = FieldSpec::direction(a, xi);
  const auto rect = FieldSpec::rectified(a, xi, Diffeomorphism::identity(2));
  props::Gen g(17);
  for (int i = 0; i < 20; ++i) {
    const Vec x = g.point(2, -3, 3);
    CHECK((eval_field(dir, x) - eval_field(rect, x)).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK_THROWS_AS(FieldSpec::direction(ScalarField(1, {{{0}, 0.5, 0}, {{1}, 0, 1}}), v1(1)), InvalidField);
  CHECK_THROWS_AS(FieldSpec::direction(a, Vec::Zero(2)), InvalidField);
  CHECK_THROWS_AS(FieldSpec::direction(a, v1(1)), DimensionMismatch);
}

TEST_CASE("current fields") {
  const auto spec = FieldSpec::current(MatrixField::scalar_identity(2, 1.0),
                                       ScalarField(2, {{{1, 0}, 0, 1.0 / (2 * std::numbers::pi)}}));
  const Vec b = eval_field(spec, v2(0, 0));
  CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(b[1]) < 1e-15);

  props::Gen g(19);
  for (int i = 0; i < 20; ++i) {
    std::vector<ScalarField> factor;
    for (int j = 0; j < 9; ++j) factor.push_back(g.raw(3, 2, 1, 0.5));
    const double m = g.uniform(0.0, 1.0);
    const MatrixField A(3, std::move(factor), m);
    const Mat v = A.value(g.point(3));
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Vec z = g.point(3);
    CHECK(z.dot(v * z) >= m * z.squaredNorm() - 1e-14);
  }
  CHECK_THROWS_AS(FieldSpec::current(MatrixField::scalar_identity(2), cos2_over_pi(2)), InvalidField);
}

TEST_CASE("diffeomorphisms") {
  IntMat A(2, 2);
  A << 1, 1, 0, 1;
  CHECK(integer_determinant(A) == 1);
  IntMat Ainv(2, 2);
  Ainv << 1, -1, 0, 1;
  CHECK(unimodular_inverse(A) == Ainv);
  IntMat B(2, 2);
  B << 2, 0, 0, 1;
  CHECK_THROWS_AS(unimodular_inverse(B), InvalidField);
  CHECK_THROWS_AS(Diffeomorphism(B, {ScalarField::constant(2, 0), ScalarField::constant(2, 0)}), InvalidField);

  const auto id = Diffeomorphism::identity(2);
  CHECK(id.is_identity());
  CHECK((id.inverse(v2(3.7, -1.2)) - v2(3.7, -1.2)).norm() < 1e-15);

  const Diffeomorphism lin(A, {ScalarField::constant(2, 0), ScalarField::constant(2, 0)});
  const Vec y = v2(0.3, 1.9);
  CHECK((lin.inverse(y) - Ainv.cast<double>() * y).norm() < 1e-14);

  const Diffeomorphism phi(A, {ScalarField(2, {{{0, 1}, 0, 0.05}}), ScalarField(2, {{{1, 0}, 0, 0.05}})});
  CHECK(phi.certified());
  CHECK(phi.jacobian_sign() == 1);
  props::Gen g(23);
  for (int i = 0; i < 100; ++i) {
    const Vec x = g.point(2, -3, 3);
    Vec k(2);
    k << g.integer(-2, 2), g.integer(-2, 2);
    CHECK((phi.forward(x + k) - phi.forward(x) - A.cast<double>() * k).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((phi.inverse(phi.forward(x)) - x).cwiseAbs().maxCoeff() <= 1e-10);
  }
  // Jacobian against central differences.
  const Vec x = v2(0.2, 0.6);
  const Mat J = phi.jacobian(x);
  for (int j = 0; j < 2; ++j) {
    Vec xp = x, xm = x;
    xp[j] += 1e-6;
    xm[j] -= 1e-6;
    CHECK(((phi.forward(xp) - phi.forward(xm)) / 2e-6 - J.col(j)).cwiseAbs().maxCoeff() < 1e-8);
  }
  // Strong periodic part folds the torus: rejected.
  CHECK_THROWS_AS(Diffeomorphism(IntMat::Identity(2, 2),
                                 {ScalarField(2, {{{1, 0}, 0, 0.5}}), ScalarField::constant(2, 0)}),
                  InvalidField);
  CHECK_THROWS_AS(phi.forward(v1(0)), DimensionMismatch);
}

TEST_CASE("direction classification") {
  const auto e1 = classify_direction(v2(1, 0), 8);
  REQUIRE(std::holds_alternative<RationalPeriod>(e1));
  CHECK(std::get<RationalPeriod>(e1).period == doctest::Approx(1.0));
  CHECK(std::get<RationalPeriod>(e1).lattice == IntVec(IntVec::Unit(2, 0)));

  const auto diag = classify_direction(v2(1, 1) / std::sqrt(2.0), 8);
  REQUIRE(std::holds_alternative<RationalPeriod>(diag));
  CHECK(std::get<RationalPeriod>(diag).period == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::get<RationalPeriod>(diag).lattice == IntVec(IntVec::Ones(2)));

  const auto irr = classify_direction(v2(1, std::sqrt(2.0)) / std::sqrt(3.0), 64, 1e-9);
  CHECK(std::holds_alternative<TotallyIrrational>(irr));

  // (1, 1e-10): resonant with k = (0, 1) but no short parallel lattice vector.
  const auto ind = classify_direction(v2(1, 1e-10).normalized(), 8);
  CHECK(std::holds_alternative<Indeterminate>(ind));
  CHECK(!describe(irr).empty());
}

TEST_CASE("quadrature") {
  const double pi = std::numbers::pi;
  const auto r = adaptive_gauss_legendre([](double s) { return std::exp(s); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(std::exp(1.0) - 1).epsilon(1e-14));
  const auto t = torus_integral([&](const Vec& y) { return 1.0 / (2 + std::sin(2 * pi * y[0])); }, 1);
  CHECK(t.value == doctest::Approx(1.0 / oracle::kSqrt3).epsilon(1e-13));
  const auto t2 = torus_integral(
      [&](const Vec& y) { return 1.0 / two_plus_sin_cos().value(y); }, 2);
  CHECK(1.0 / t2.value == doctest::Approx(oracle::kHarmonicMean2d).epsilon(1e-12));
}
