#include "torusflow/invariance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "torusflow/error.hpp"
#include "torusflow/quadrature.hpp"
#include "torusflow/sign_analysis.hpp"

namespace torusflow {
namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t grid_size(int dim, int n) {
  std::size_t s = 1;
  for (int i = 0; i < dim; ++i) s *= static_cast<std::size_t>(n);
  return s;
}

Vec cell_center(int dim, int n, std::size_t flat) {
  Vec c(dim);
  for (int i = 0; i < dim; ++i) {
    c[i] = (static_cast<double>(flat % static_cast<std::size_t>(n)) + 0.5) / n;
    flat /= static_cast<std::size_t>(n);
  }
  return c;
}

double flux(const FieldSpec& spec, const TestFunction& psi, const Vec& x) {
  return spec.velocity(x).dot(psi.gradient(x));
}

void check_dims(const FieldSpec& spec, const TestFunction& psi, int mu_dim) {
  if (spec.dim() != psi.dim() || spec.dim() != mu_dim)
    throw DimensionMismatch("field, measure and test function must share one dimension");
}

}  // namespace

TestFunction::TestFunction(ScalarField psi) : psi_(std::move(psi)) {
  if (psi_.mode() != FieldMode::Raw) throw InvalidField("test functions must be Raw fields");
}

std::vector<TestFunction> test_function_panel(int dim, int count, std::uint64_t seed, int max_frequency) {
  std::mt19937_64 rng(seed);
  const int width = 2 * max_frequency + 1;
  std::vector<TestFunction> panel;
  panel.reserve(count);
  for (int p = 0; p < count; ++p) {
    std::set<std::vector<double>> used;
    std::vector<FourierTerm> terms;
    while (terms.size() < 3) {
      std::vector<double> k(dim);
      for (int i = 0; i < dim; ++i)
        k[i] = static_cast<double>(static_cast<int>(rng() % static_cast<std::uint64_t>(width)) - max_frequency);
      // Canonical half space: first nonzero component positive.
      auto first = std::find_if(k.begin(), k.end(), [](double v) { return v != 0.0; });
      if (first == k.end()) continue;
      if (*first < 0.0)
        for (double& v : k) v = -v;
      if (!used.insert(k).second) {
        if (used.size() >= static_cast<std::size_t>((std::pow(width, dim) - 1) / 2)) break;
        continue;
      }
      terms.push_back({k, 2.0 * unit_uniform(rng) - 1.0, 2.0 * unit_uniform(rng) - 1.0});
    }
    double norm2 = 0.0;
    for (const auto& t : terms) norm2 += t.cos_coeff * t.cos_coeff + t.sin_coeff * t.sin_coeff;
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& t : terms) {
      t.cos_coeff *= scale;
      t.sin_coeff *= scale;
    }
    panel.emplace_back(ScalarField(dim, std::move(terms)));
  }
  return panel;
}

DensityField::DensityField(int dim, int resolution, std::vector<double> values, double normalization)
    : dim_(dim), n_(resolution), values_(std::move(values)), normalization_(normalization) {
  if (values_.size() != grid_size(dim_, n_)) throw DimensionMismatch("density values do not match n^d");
}

Vec DensityField::center(std::size_t flat) const { return cell_center(dim_, n_, flat); }

double DensityField::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

double DensityField::integrate(const PointFunction& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * f(center(i));
  return s / static_cast<double>(values_.size());
}

double divcurl_residual(const FieldSpec& spec, const EmpiricalMeasure& mu, const TestFunction& psi) {
  check_dims(spec, psi, mu.dim());
  return measure_average(mu, [&](const Vec& x) { return flux(spec, psi, x); });
}

double divcurl_residual(const FieldSpec& spec, const DensityField& sigma, const TestFunction& psi) {
  check_dims(spec, psi, sigma.dim());
  return sigma.integrate([&](const Vec& x) { return flux(spec, psi, x); });
}

double trajectory_residual(const FieldSpec& spec, const Trajectory& traj, const TestFunction& psi,
                           std::optional<double> horizon) {
  check_dims(spec, psi, static_cast<int>(traj.x0.size()));
  return birkhoff_average(traj, [&](const Vec& x) { return flux(spec, psi, x); }, horizon);
}

std::vector<double> trajectory_residuals(const FieldSpec& spec, const Trajectory& traj,
                                         const std::vector<TestFunction>& panel, std::optional<double> horizon) {
  for (const auto& psi : panel) check_dims(spec, psi, static_cast<int>(traj.x0.size()));
  return birkhoff_averages(
      traj,
      [&](const Vec& x, std::span<double> out) {
        const Vec b = spec.velocity(x);
        for (std::size_t i = 0; i < panel.size(); ++i) out[i] = b.dot(panel[i].gradient(x));
      },
      panel.size(), horizon);
}

double identity_residual(const Trajectory& traj, const TestFunction& psi, std::optional<double> horizon) {
  const double t = horizon.value_or(traj.t_end);
  const double sign = traj.reversed ? -1.0 : 1.0;
  return sign * (psi.value(traj.state_at(t)) - psi.value(traj.x0)) / t;
}

DensityField harmonic_density_1d(const ScalarField& b, int resolution) {
  if (b.dim() != 1) throw DimensionMismatch("harmonic density needs a one-dimensional field");
  const auto sign = analyze_sign(b);
  if (sign.kind != SignClass::Positive) {
    const bool negative = b.mode() == FieldMode::Raw && analyze_sign(b.scaled(-1.0)).kind == SignClass::Positive;
    if (!negative)
      throw VanishingField("b vanishes on the circle; the limiting measures are Dirac masses at its zeros");
  }
  const auto inv = torus_integral([&](const Vec& y) { return 1.0 / b.value(y); }, 1);
  if (!inv.converged) throw ConvergenceFailure("quadrature of 1/b did not converge");
  const double bbar = 1.0 / inv.value;

  std::vector<double> values(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) values[i] = bbar / b.value(cell_center(1, resolution, i));
  return DensityField(1, resolution, std::move(values), bbar);
}

DensityField rectified_density(const ScalarField& a, const Diffeomorphism& phi, int resolution) {
  if (a.dim() != phi.dim()) throw DimensionMismatch("speed profile and diffeomorphism differ in dimension");
  if (a.mode() == FieldMode::Squared && a.offset() == 0.0)
    throw VanishingField("squared speed profile without offset may vanish; no invariant density");
  if (a.mode() == FieldMode::Raw && analyze_sign(a).kind != SignClass::Positive)
    throw VanishingField("speed profile is not strictly positive; no invariant density");

  const int d = a.dim();
  const std::size_t size = grid_size(d, resolution);
  std::vector<double> values(size);
  double sum = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const Vec x = cell_center(d, resolution, i);
    values[i] = phi.jacobian(x).determinant() / a.value(phi.forward(x));
    sum += values[i];
  }
  const double z = static_cast<double>(size) / sum;
  for (double& v : values) v *= z;
  return DensityField(d, resolution, std::move(values), z);
}

std::vector<ResidualRow> residual_panel(const FieldSpec& spec, const Trajectory& traj,
                                        const std::vector<TestFunction>& panel,
                                        const std::vector<double>& horizons, int resolution) {
  std::vector<ResidualRow> rows;
  for (double t : horizons) {
    const EmpiricalMeasure mu = empirical_measure(traj, resolution, t);
    for (std::size_t p = 0; p < panel.size(); ++p) {
      ResidualRow r;
      r.psi_id = static_cast<int>(p);
      r.t = t;
      r.residual = divcurl_residual(spec, mu, panel[p]);
      r.identity = identity_residual(traj, panel[p], t);
      r.bound = 2.0 * panel[p].sup_bound() / t;
      rows.push_back(r);
    }
  }
  return rows;
}

double lipschitz_estimate(const PointFunction& g, int dim, int resolution) {
  const std::size_t size = grid_size(dim, resolution);
  const double h = 1e-6;
  double best = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    Vec x = cell_center(dim, resolution, i);
    double n2 = 0.0;
    for (int j = 0; j < dim; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double dj = (g(xp) - g(xm)) / (2.0 * h);
      n2 += dj * dj;
    }
    best = std::max(best, std::sqrt(n2));
  }
  return best;
}

}  // namespace torusflow
