#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "torusflow/field_spec.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

using PointFunction = std::function<double(const Vec&)>;

/**
 * (1/t) int_0^t f(X(s)) ds over the dense output of `traj`, with t the
 * trajectory horizon or the given prefix `horizon`.
 *
 * Every step is split so that the state moves at most 1/8 per piece in the
 * sup norm, and each piece uses 5-point Gauss-Legendre.
 */
double birkhoff_average(const Trajectory& traj, const PointFunction& f, std::optional<double> horizon = {});
double birkhoff_average(const Trajectory& traj, const ScalarField& f, std::optional<double> horizon = {});

/// Writes `count` values per point; one trajectory pass averages them all.
using MultiFunction = std::function<void(const Vec&, std::span<double>)>;
std::vector<double> birkhoff_averages(const Trajectory& traj, const MultiFunction& f, std::size_t count,
                                      std::optional<double> horizon = {});

struct DriftCheckpoint {
  double t = 0.0;
  Vec drift;
};

struct DriftEstimate {
  Vec x0;
  std::vector<DriftCheckpoint> checkpoints;
  Vec final;
  /// Per-component max - min of X(t)/t over checkpoints with t >= t_final / 4.
  Vec dispersion;
};

/// X(t)/t at every checkpoint of `traj`.
DriftEstimate drift_estimate(const Trajectory& traj);

/**
 * Time-average occupation measure of the wrapped trajectory on an n^d grid.
 * Bin b = (b_1..b_d) covers prod [b_i/n, (b_i+1)/n); the flat index is
 * sum_i b_i n^i.
 */
class EmpiricalMeasure {
 public:
  EmpiricalMeasure(int dim, int resolution, std::vector<double> weights, double horizon, Vec x0);

  /// All mass in the bin containing x.
  static EmpiricalMeasure dirac(const Vec& x, int resolution);

  int dim() const { return dim_; }
  int resolution() const { return n_; }
  double horizon() const { return horizon_; }
  const Vec& x0() const { return x0_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return weights_.size(); }

  std::vector<int> multi_index(std::size_t flat) const;
  Vec bin_center(std::size_t flat) const;
  std::size_t bin_of(const Vec& x) const;

 private:
  int dim_;
  int n_;
  std::vector<double> weights_;
  double horizon_;
  Vec x0_;
};

inline constexpr std::int64_t kMaxMeasureBins = 100'000'000;

/// Throws Error when n < 2 or n^d exceeds kMaxMeasureBins.
EmpiricalMeasure empirical_measure(const Trajectory& traj, int n, std::optional<double> horizon = {});

/// Midpoint rule: sum_bins weight * f(center).
double measure_average(const EmpiricalMeasure& mu, const PointFunction& f);
double measure_average(const EmpiricalMeasure& mu, const ScalarField& f);
Vec measure_vector_average(const EmpiricalMeasure& mu, const FieldSpec& spec);

struct CbProbe {
  std::vector<DriftEstimate> estimates;
  /// int b d(nu_t) for each start, from the binned empirical measure.
  std::vector<Vec> measure_drifts;
  double diameter = 0.0;
};

/// Drift estimates from several starts and the diameter of their final values.
CbProbe cb_probe(const FieldSpec& spec, std::span<const Vec> starts, double t_end, int n,
                 const IntegratorOptions& options = {}, int jobs = 1);

}  // namespace torusflow
