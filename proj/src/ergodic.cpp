#include "torusflow/ergodic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss.hpp>

#include "torusflow/error.hpp"

namespace torusflow {
namespace {

// Visits quadrature nodes (time weight, state) covering [0, horizon].
// `max_disp` bounds the sup-norm displacement per piece.
template <class Visitor>
void for_each_node(const Trajectory& traj, double horizon, double max_disp, unsigned nodes_per_piece,
                   Visitor&& visit) {
  if (!traj.has_dense()) throw Error("trajectory has no dense output");
  static const auto& abscissa5 = boost::math::quadrature::gauss<double, 5>::abscissa();
  static const auto& weights5 = boost::math::quadrature::gauss<double, 5>::weights();
  static const auto& abscissa2 = boost::math::quadrature::gauss<double, 2>::abscissa();
  static const auto& weights2 = boost::math::quadrature::gauss<double, 2>::weights();
  std::vector<double> nodes, weights;
  auto push = [&](const auto& a, const auto& w) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      nodes.push_back(0.5 * (1.0 + a[i]));
      weights.push_back(0.5 * w[i]);
      if (a[i] != 0.0) {
        nodes.push_back(0.5 * (1.0 - a[i]));
        weights.push_back(0.5 * w[i]);
      }
    }
  };
  if (nodes_per_piece == 5)
    push(abscissa5, weights5);
  else
    push(abscissa2, weights2);

  const auto& dense = traj.dense;
  const double moving_end = traj.stationary_exit ? std::min(horizon, traj.stationary_exit->time) : horizon;
  Vec a, b, state;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const double t0 = dense.step_start(i);
    if (t0 >= moving_end) break;
    const double h = dense.step_length(i);
    const double frac = std::min(1.0, (moving_end - t0) / h);
    dense.state_into(i, 0.0, a);
    dense.state_into(i, frac, b);
    const double disp = (b - a).lpNorm<Eigen::Infinity>();
    const auto pieces = 1 + static_cast<long long>(std::floor(disp / max_disp));
    const double piece = frac / static_cast<double>(pieces);
    for (long long p = 0; p < pieces; ++p) {
      for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double theta = piece * (static_cast<double>(p) + nodes[q]);
        dense.state_into(i, theta, state);
        visit(weights[q] * piece * h, state);
      }
    }
  }
  if (traj.stationary_exit && horizon > traj.stationary_exit->time)
    visit(horizon - traj.stationary_exit->time, traj.stationary_exit->state);
}

// Splits a piece of one dense step at the exact times where a coordinate
// crosses a bin boundary, so every sub-interval lies in a single bin.
template <class Sink>
class OccupationSplitter {
 public:
  OccupationSplitter(const DenseRecord& dense, int n, Sink sink) : dense_(dense), n_(n), sink_(std::move(sink)) {}

  void run(std::size_t step, double th0, double th1) {
    step_ = step;
    h_ = dense_.step_length(step);
    dense_.state_into(step_, th0, xa_);
    dense_.state_into(step_, th1, xb_);
    piece(th0, th1, xa_, xb_, 0);
  }

 private:
  double lifted_bin(double x) const { return std::floor(x * n_); }

  void piece(double th0, double th1, const Vec& x0, const Vec& x1, int depth) {
    cuts_.clear();
    bool wide = false;
    for (Eigen::Index j = 0; j < x0.size(); ++j) {
      const double l0 = lifted_bin(x0[j]);
      const double l1 = lifted_bin(x1[j]);
      if (l0 == l1) continue;
      if (std::abs(l1 - l0) > 1.0) {
        wide = true;
        break;
      }
      cuts_.push_back(crossing(j, std::max(l0, l1) / n_, th0, th1, x0[j], x1[j]));
    }
    if (wide && depth < 30) {
      const double mid = 0.5 * (th0 + th1);
      Vec xm;
      dense_.state_into(step_, mid, xm);
      piece(th0, mid, x0, xm, depth + 1);
      piece(mid, th1, xm, x1, depth + 1);
      return;
    }
    if (cuts_.empty()) {
      sink_((th1 - th0) * h_, x0);
      return;
    }
    std::vector<double> cuts = cuts_;
    std::sort(cuts.begin(), cuts.end());
    double prev = th0;
    Vec xm;
    for (std::size_t c = 0; c <= cuts.size(); ++c) {
      const double next = c < cuts.size() ? cuts[c] : th1;
      if (next > prev) {
        dense_.state_into(step_, 0.5 * (prev + next), xm);
        sink_((next - prev) * h_, xm);
      }
      prev = next;
    }
  }

  // Root of x_j(theta) = level in [th0, th1] by the Illinois variant of regula falsi.
  double crossing(Eigen::Index j, double level, double th0, double th1, double x0, double x1) {
    double fa = x0 - level, fb = x1 - level;
    double a = th0, b = th1;
    int side = 0;
    for (int it = 0; it < 60 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      const double c = (fa == fb) ? 0.5 * (a + b) : b - fb * (b - a) / (fb - fa);
      dense_.state_into(step_, c, tmp_);
      const double fc = tmp_[j] - level;
      if (fc == 0.0) return c;
      if ((fc < 0.0) == (fb < 0.0)) {
        b = c;
        fb = fc;
        if (side == -1) fa *= 0.5;
        side = -1;
      } else {
        a = c;
        fa = fc;
        if (side == 1) fb *= 0.5;
        side = 1;
      }
    }
    return 0.5 * (a + b);
  }

  const DenseRecord& dense_;
  int n_;
  Sink sink_;
  std::size_t step_ = 0;
  double h_ = 0.0;
  Vec xa_, xb_, tmp_;
  std::vector<double> cuts_;
};

// Neumaier compensated summation.
class Neumaier {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double resolve_horizon(const Trajectory& traj, std::optional<double> horizon) {
  const double t = horizon.value_or(traj.t_end);
  if (!(t > 0.0) || t > traj.t_end * (1.0 + 1e-15)) throw Error("averaging horizon must lie in (0, t_end]");
  return std::min(t, traj.t_end);
}

}  // namespace

double birkhoff_average(const Trajectory& traj, const PointFunction& f, std::optional<double> horizon) {
  if (traj.samples.empty()) throw Error("empty trajectory");
  const double t = resolve_horizon(traj, horizon);
  Neumaier total, weight;
  for_each_node(traj, t, 0.125, 5, [&](double w, const Vec& x) {
    total.add(w * f(x));
    weight.add(w);
  });
  return total.value() / weight.value();
}

std::vector<double> birkhoff_averages(const Trajectory& traj, const MultiFunction& f, std::size_t count,
                                      std::optional<double> horizon) {
  if (traj.samples.empty()) throw Error("empty trajectory");
  const double t = resolve_horizon(traj, horizon);
  std::vector<Neumaier> totals(count);
  std::vector<double> values(count);
  Neumaier weight;
  for_each_node(traj, t, 0.125, 5, [&](double w, const Vec& x) {
    f(x, values);
    for (std::size_t i = 0; i < count; ++i) totals[i].add(w * values[i]);
    weight.add(w);
  });
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = totals[i].value() / weight.value();
  return out;
}

double birkhoff_average(const Trajectory& traj, const ScalarField& f, std::optional<double> horizon) {
  return birkhoff_average(traj, PointFunction([&f](const Vec& x) { return f.value(x); }), horizon);
}

DriftEstimate drift_estimate(const Trajectory& traj) {
  DriftEstimate est;
  est.x0 = traj.x0;
  for (const auto& s : traj.samples)
    if (s.t > 0.0) est.checkpoints.push_back({s.t, s.x / s.t});
  if (est.checkpoints.empty()) throw Error("trajectory has no positive-time samples");
  est.final = est.checkpoints.back().drift;
  const double t_final = est.checkpoints.back().t;
  Vec lo = est.final, hi = est.final;
  for (const auto& c : est.checkpoints) {
    if (c.t < 0.25 * t_final) continue;
    lo = lo.cwiseMin(c.drift);
    hi = hi.cwiseMax(c.drift);
  }
  est.dispersion = hi - lo;
  return est;
}

EmpiricalMeasure::EmpiricalMeasure(int dim, int resolution, std::vector<double> weights, double horizon, Vec x0)
    : dim_(dim), n_(resolution), weights_(std::move(weights)), horizon_(horizon), x0_(std::move(x0)) {
  if (resolution < 2) throw Error("measure resolution must be at least 2");
  double expected = 1.0;
  for (int i = 0; i < dim; ++i) expected *= resolution;
  if (static_cast<double>(weights_.size()) != expected) throw DimensionMismatch("weights do not match n^d bins");
}

EmpiricalMeasure EmpiricalMeasure::dirac(const Vec& x, int resolution) {
  double bins = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) bins *= resolution;
  if (bins > static_cast<double>(kMaxMeasureBins)) throw Error("measure grid too large");
  EmpiricalMeasure mu(static_cast<int>(x.size()), resolution, std::vector<double>(static_cast<std::size_t>(bins), 0.0),
                      0.0, x);
  mu.weights_[mu.bin_of(x)] = 1.0;
  return mu;
}

std::vector<int> EmpiricalMeasure::multi_index(std::size_t flat) const {
  std::vector<int> idx(dim_);
  for (int i = 0; i < dim_; ++i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(n_));
    flat /= static_cast<std::size_t>(n_);
  }
  return idx;
}

Vec EmpiricalMeasure::bin_center(std::size_t flat) const {
  Vec c(dim_);
  for (int i = 0; i < dim_; ++i) {
    c[i] = (static_cast<double>(flat % static_cast<std::size_t>(n_)) + 0.5) / n_;
    flat /= static_cast<std::size_t>(n_);
  }
  return c;
}

std::size_t EmpiricalMeasure::bin_of(const Vec& x) const {
  if (x.size() != dim_) throw DimensionMismatch("point dimension does not match the measure");
  std::size_t flat = 0, stride = 1;
  for (int i = 0; i < dim_; ++i) {
    const double w = x[i] - std::floor(x[i]);
    auto b = static_cast<long long>(std::floor(w * n_));
    b = std::clamp<long long>(b, 0, n_ - 1);
    flat += static_cast<std::size_t>(b) * stride;
    stride *= static_cast<std::size_t>(n_);
  }
  return flat;
}

EmpiricalMeasure empirical_measure(const Trajectory& traj, int n, std::optional<double> horizon) {
  if (n < 2) throw Error("measure resolution must be at least 2");
  if (!traj.has_dense()) throw Error("trajectory has no dense output");
  const int d = static_cast<int>(traj.x0.size());
  double bins = 1.0;
  for (int i = 0; i < d; ++i) bins *= n;
  if (bins > static_cast<double>(kMaxMeasureBins))
    throw Error("measure grid n^d = " + std::to_string(bins) + " exceeds the 1e8 bin guard");
  const double t = resolve_horizon(traj, horizon);

  EmpiricalMeasure mu(d, n, std::vector<double>(static_cast<std::size_t>(bins), 0.0), t, traj.x0);
  std::vector<double> w(mu.size(), 0.0);
  OccupationSplitter split(traj.dense, n, [&](double dt, const Vec& x) { w[mu.bin_of(x)] += dt; });

  const auto& dense = traj.dense;
  const double moving_end = traj.stationary_exit ? std::min(t, traj.stationary_exit->time) : t;
  Vec a, b;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const double t0 = dense.step_start(i);
    if (t0 >= moving_end) break;
    const double h = dense.step_length(i);
    const double frac = std::min(1.0, (moving_end - t0) / h);
    dense.state_into(i, 0.0, a);
    dense.state_into(i, frac, b);
    const double disp = (b - a).lpNorm<Eigen::Infinity>();
    const auto pieces = 1 + static_cast<long long>(std::floor(disp * 4.0 * n));
    const double piece = frac / static_cast<double>(pieces);
    for (long long p = 0; p < pieces; ++p)
      split.run(i, piece * static_cast<double>(p), p + 1 == pieces ? frac : piece * static_cast<double>(p + 1));
  }
  if (traj.stationary_exit && t > traj.stationary_exit->time)
    w[mu.bin_of(traj.stationary_exit->state)] += t - traj.stationary_exit->time;

  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  return EmpiricalMeasure(d, n, std::move(w), t, traj.x0);
}

double measure_average(const EmpiricalMeasure& mu, const PointFunction& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weights()[i] != 0.0) s += mu.weights()[i] * f(mu.bin_center(i));
  return s;
}

double measure_average(const EmpiricalMeasure& mu, const ScalarField& f) {
  if (f.dim() != mu.dim()) throw DimensionMismatch("field and measure differ in dimension");
  return measure_average(mu, PointFunction([&f](const Vec& x) { return f.value(x); }));
}

Vec measure_vector_average(const EmpiricalMeasure& mu, const FieldSpec& spec) {
  if (spec.dim() != mu.dim()) throw DimensionMismatch("field and measure differ in dimension");
  Vec s = Vec::Zero(spec.dim());
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weights()[i] != 0.0) s += mu.weights()[i] * spec.velocity(mu.bin_center(i));
  return s;
}

CbProbe cb_probe(const FieldSpec& spec, std::span<const Vec> starts, double t_end, int n,
                 const IntegratorOptions& options, int jobs) {
  if (starts.size() < 2) throw Error("cb_probe needs at least two start points");
  CbProbe probe;
  probe.estimates.resize(starts.size());
  probe.measure_drifts.resize(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        const Trajectory traj = integrate(spec, starts[i], t_end, options);
        probe.estimates[i] = drift_estimate(traj);
        probe.measure_drifts[i] = measure_vector_average(empirical_measure(traj, n), spec);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(starts.size()));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (std::size_t i = 0; i < starts.size(); ++i)
    for (std::size_t j = i + 1; j < starts.size(); ++j)
      probe.diameter = std::max(probe.diameter, (probe.estimates[i].final - probe.estimates[j].final).norm());
  return probe;
}

}  // namespace torusflow
