#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "torusflow/diffeomorphism.hpp"
#include "torusflow/ergodic.hpp"
#include "torusflow/field_spec.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/scalar_field.hpp"

namespace torusflow {

/// Periodic C^1 test function psi (a Raw trigonometric polynomial).
class TestFunction {
 public:
  explicit TestFunction(ScalarField psi);

  const ScalarField& field() const { return psi_; }
  int dim() const { return psi_.dim(); }
  double value(const Vec& x) const { return psi_.value(x); }
  Vec gradient(const Vec& x) const { return psi_.gradient(x); }
  double sup_bound() const { return psi_.sup_bound(); }

 private:
  ScalarField psi_;
};

/// Deterministic panel of random test functions: three modes with
/// |k|_inf <= max_frequency and unit coefficient norm each.
std::vector<TestFunction> test_function_panel(int dim, int count, std::uint64_t seed, int max_frequency = 3);

/// Probability density sampled at the cell centers of an n^d grid; all
/// integrals against it use the same midpoint grid.
class DensityField {
 public:
  DensityField(int dim, int resolution, std::vector<double> values, double normalization);

  int dim() const { return dim_; }
  int resolution() const { return n_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t flat) const { return values_[flat]; }
  const std::vector<double>& values() const { return values_; }
  Vec center(std::size_t flat) const;
  /// Constant multiplying the unnormalized density.
  double normalization() const { return normalization_; }
  /// Grid integral of the density; 1 up to rounding.
  double integral() const;
  double integrate(const PointFunction& f) const;

 private:
  int dim_;
  int n_;
  std::vector<double> values_;
  double normalization_;
};

/// int b . grad(psi) d(mu) with the histogram midpoint rule.
double divcurl_residual(const FieldSpec& spec, const EmpiricalMeasure& mu, const TestFunction& psi);
/// int b . grad(psi) sigma dx on the density grid.
double divcurl_residual(const FieldSpec& spec, const DensityField& sigma, const TestFunction& psi);
/// The same functional against the unbinned occupation measure of the trajectory.
double trajectory_residual(const FieldSpec& spec, const Trajectory& traj, const TestFunction& psi,
                           std::optional<double> horizon = {});
/// trajectory_residual for a whole panel, sharing the velocity evaluations.
std::vector<double> trajectory_residuals(const FieldSpec& spec, const Trajectory& traj,
                                         const std::vector<TestFunction>& panel, std::optional<double> horizon = {});
/// (psi(X(t)) - psi(x0)) / t, negated for reversed trajectories; equals trajectory_residual exactly.
double identity_residual(const Trajectory& traj, const TestFunction& psi, std::optional<double> horizon = {});

/// sigma(y) = bbar / b(y) for a nonvanishing 1D field. Throws VanishingField.
DensityField harmonic_density_1d(const ScalarField& b, int resolution = 1024);

/// sigma proportional to det(grad Phi) / (a o Phi). Throws VanishingField.
DensityField rectified_density(const ScalarField& a, const Diffeomorphism& phi, int resolution = 128);

struct ResidualRow {
  int psi_id = 0;
  double t = 0.0;
  double residual = 0.0;
  double identity = 0.0;
  /// 2 max|psi| / t.
  double bound = 0.0;
};

/// Binned residual for every test function at every horizon.
std::vector<ResidualRow> residual_panel(const FieldSpec& spec, const Trajectory& traj,
                                        const std::vector<TestFunction>& panel,
                                        const std::vector<double>& horizons, int resolution);

/// max |grad g| over a grid by central differences; a numerical Lipschitz estimate.
double lipschitz_estimate(const PointFunction& g, int dim, int resolution);

}  // namespace torusflow
