#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "torusflow/direction.hpp"
#include "torusflow/field_spec.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  /// Sample times in (0, t_end]; empty selects the geometric schedule.
  std::vector<double> checkpoints;
  /// Retain the continuous extension of every step (needed for averages).
  bool keep_dense = true;
  /// Integrate X' = -b(X) instead.
  bool reverse = false;
  double stationary_speed = 1e-10;
  double stationary_dwell = 10.0;
  long long max_steps = 200'000'000;
};

/// t_j = 2^j for t_j < t_end, followed by t_end.
std::vector<double> geometric_schedule(double t_end);

/// Continuous extension of the accepted Dormand-Prince steps.
class DenseRecord {
 public:
  explicit DenseRecord(int dim = 0) : dim_(dim) {}

  void append(double t0, double h, const Vec (&coeff)[5]);

  std::size_t size() const { return t0_.size(); }
  int dim() const { return dim_; }
  double step_start(std::size_t i) const { return t0_[i]; }
  double step_length(std::size_t i) const { return h_[i]; }
  /// State at fraction theta in [0, 1] of step i.
  void state_into(std::size_t i, double theta, Vec& out) const;
  /// Index of the step containing t (clamped to the recorded range).
  std::size_t locate(double t) const;

 private:
  int dim_;
  std::vector<double> t0_;
  std::vector<double> h_;
  std::vector<double> coeff_;
};

struct Sample {
  double t = 0.0;
  Vec x;
};

struct StationaryExit {
  double time = 0.0;
  Vec state;
  std::string reason;
};

/// Lifted trajectory X(t, x0) in R^d, never wrapped to the torus.
struct Trajectory {
  std::string spec_id;
  Vec x0;
  double t_end = 0.0;
  double rtol = 0.0;
  double atol = 0.0;
  bool reversed = false;
  /// (0, x0) followed by the checkpoint samples; strictly increasing in t.
  std::vector<Sample> samples;
  std::optional<StationaryExit> stationary_exit;
  DenseRecord dense;
  long long accepted_steps = 0;
  long long rejected_steps = 0;

  bool has_dense() const { return dense.size() > 0 || stationary_exit.has_value(); }
  /// X(t) for 0 <= t <= t_end from the dense record.
  Vec state_at(double t) const;
  const Vec& final_state() const { return samples.back().x; }
};

/**
 * Adaptive Dormand-Prince 5(4) integration of X' = b(X) on the lifted space.
 *
 * The local error per step is held below 0.2 (atol + rtol min(1, 100 |dX|))
 * in RMS norm, dX being the step displacement; rtol refers to the unit cell,
 * not to the lifted |X|, and the integration
 * runs relative to the integer cell of x0 so that lattice translates of a
 * start follow the same step sequence. When
 * |b(X)| stays below `stationary_speed` for `stationary_dwell` time units the
 * trajectory is frozen and later samples repeat the last state.
 *
 * Throws IntegrationFailure on step-size underflow or a non-finite state.
 */
Trajectory integrate(const FieldSpec& spec, const Vec& x0, double t_end,
                     const IntegratorOptions& options = {});

/**
 * Exact solution along the line through x in direction xi of X' = a(X) xi.
 *
 * Returns x + (u - x.xi) xi where F(u) - F(x.xi) = t and F' = 1/a on the
 * line; F is evaluated by adaptive Gauss-Legendre quadrature and inverted by
 * bracketing plus safeguarded Newton.
 *
 * Throws VanishesOnLine when a has a zero on the traversed segment.
 */
Vec exact_line_solve(const ScalarField& a, const Vec& xi, const Vec& x, double t);

struct PeriodReport {
  bool found = false;
  /// X(., x) is an equilibrium (periodic in R^d with k = 0).
  bool stationary = false;
  double tau = 0.0;
  IntVec k;
  double residual = 0.0;
};

struct PeriodOptions {
  IntegratorOptions integrator{};
  int search_bound = kDefaultSearchBound;
};

/**
 * Detects X(tau, x) = x + k with tau <= tau_max.
 *
 * Direction fields with a rational direction and a positive line profile
 * get tau by quadrature of 1/a over one period; other fields are scanned
 * along the dense trajectory for near-lattice returns, each confirmed by a
 * fresh integration to the refined tau.
 */
PeriodReport detect_torus_period(const FieldSpec& spec, const Vec& x, double tau_max, double tol,
                                 const PeriodOptions& options = {});

}  // namespace torusflow
