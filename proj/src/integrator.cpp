#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/error.hpp"
#include "torusflow/flow.hpp"

namespace torusflow {
namespace {

// Dormand-Prince 5(4) tableau with Hairer's continuous extension.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;
constexpr double kTolCalibration = 0.2;
constexpr double kDisplacementRef = 1e-2;

bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace

std::vector<double> geometric_schedule(double t_end) {
  std::vector<double> s;
  for (double t = 1.0; t < t_end; t *= 2.0) s.push_back(t);
  s.push_back(t_end);
  return s;
}

void DenseRecord::append(double t0, double h, const Vec (&coeff)[5]) {
  t0_.push_back(t0);
  h_.push_back(h);
  for (const auto& c : coeff) coeff_.insert(coeff_.end(), c.data(), c.data() + dim_);
}

void DenseRecord::state_into(std::size_t i, double theta, Vec& out) const {
  out.resize(dim_);
  const double* r = coeff_.data() + i * 5 * dim_;
  const double theta1 = 1.0 - theta;
  for (int j = 0; j < dim_; ++j) {
    out[j] = r[j] + theta * (r[dim_ + j] +
                             theta1 * (r[2 * dim_ + j] + theta * (r[3 * dim_ + j] + theta1 * r[4 * dim_ + j])));
  }
}

std::size_t DenseRecord::locate(double t) const {
  if (t0_.empty()) return 0;
  auto it = std::upper_bound(t0_.begin(), t0_.end(), t);
  if (it == t0_.begin()) return 0;
  return static_cast<std::size_t>(std::distance(t0_.begin(), it) - 1);
}

Vec Trajectory::state_at(double t) const {
  if (stationary_exit && t >= stationary_exit->time) return stationary_exit->state;
  if (t <= 0.0) return x0;
  if (dense.size() == 0) {
    for (const auto& s : samples)
      if (s.t == t) return s.x;
    throw Error("trajectory kept no dense output; state_at needs keep_dense");
  }
  const std::size_t i = dense.locate(t);
  const double theta = std::clamp((t - dense.step_start(i)) / dense.step_length(i), 0.0, 1.0);
  Vec out;
  dense.state_into(i, theta, out);
  return out;
}

Trajectory integrate(const FieldSpec& spec, const Vec& x0, double t_end, const IntegratorOptions& options) {
  const int d = spec.dim();
  if (x0.size() != d) throw DimensionMismatch("start point dimension does not match the field");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw Error("t_end must be positive and finite");
  if (!(options.rtol > 0.0 && options.rtol <= 1e-2) || !(options.atol > 0.0 && options.atol <= 1e-2))
    throw Error("integrator tolerances must lie in (0, 1e-2]");
  if (!all_finite(x0)) throw IntegrationFailure("non-finite start point");

  const double sign = options.reverse ? -1.0 : 1.0;
  auto rhs = [&](const Vec& y) -> Vec { return sign * spec.velocity(y); };

  std::vector<double> schedule = options.checkpoints.empty() ? geometric_schedule(t_end) : options.checkpoints;
  std::sort(schedule.begin(), schedule.end());
  schedule.erase(std::remove_if(schedule.begin(), schedule.end(), [&](double t) { return !(t > 0.0) || t > t_end; }),
                 schedule.end());
  schedule.erase(std::unique(schedule.begin(), schedule.end()), schedule.end());
  if (schedule.empty() || schedule.back() != t_end) schedule.push_back(t_end);

  Trajectory traj;
  traj.spec_id = spec.label();
  traj.x0 = x0;
  traj.t_end = t_end;
  traj.rtol = options.rtol;
  traj.atol = options.atol;
  traj.reversed = options.reverse;
  traj.dense = DenseRecord(d);
  traj.samples.push_back({0.0, x0});
  std::size_t next_cp = 0;

  // The torus has unit size, so rtol is taken relative to the cell rather than to the lifted |X|,
  // tapered by the step displacement so that the error floor sinks near equilibria.
  // The per-step target is a fraction of the tolerance: errors along a trajectory add up coherently.
  auto scale = [&](const Vec& a, const Vec& b) -> Vec {
    const double rel = std::min(1.0, (b - a).lpNorm<Eigen::Infinity>() / kDisplacementRef);
    return Vec::Constant(a.size(), kTolCalibration * (options.atol + options.rtol * rel));
  };
  auto rms = [d](const Vec& v) { return std::sqrt(v.squaredNorm() / d); };

  // Integrate relative to the integer cell of x0 so that lattice translates share one step sequence.
  const Vec shift = x0.array().floor().matrix();
  double t = 0.0;
  Vec y = x0 - shift;
  Vec k1 = rhs(y);
  if (!all_finite(k1)) throw IntegrationFailure("non-finite velocity at the start point");

  // Initial step size (Hairer's heuristic).
  double h;
  {
    const Vec sc = scale(y, y);
    const double dn0 = rms(y.cwiseQuotient(sc));
    const double dn1 = rms(k1.cwiseQuotient(sc));
    double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 : 0.01 * dn0 / dn1;
    const Vec f1 = rhs(y + h0 * k1);
    const double dn2 = rms((f1 - k1).cwiseQuotient(sc)) / h0;
    const double big = std::max(dn1, dn2);
    const double h1 = big <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / big, 0.2);
    h = std::min({100.0 * h0, h1, t_end});
  }

  bool dwell = false;
  double dwell_start = 0.0;
  if (k1.norm() < options.stationary_speed) {
    dwell = true;
    dwell_start = 0.0;
  }
  bool last_rejected = false;
  long long steps = 0;
  Vec k2, k3, k4, k5, k6, k7, y1, err, ys;
  Vec coeff[5];

  while (t < t_end) {
    if (++steps > options.max_steps) throw IntegrationFailure("step budget exhausted at t = " + std::to_string(t));
    bool last = false;
    if (t + h >= t_end || t_end - (t + h) <= 1e-14 * t_end) {
      h = t_end - t;
      last = true;
    }
    if (h <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      std::ostringstream os;
      os << "step size underflow at t = " << t << " (|b| = " << k1.norm()
         << "); stiffness near a zero of the speed profile";
      throw IntegrationFailure(os.str());
    }

    ys = y + h * a21 * k1;
    k2 = rhs(ys);
    ys = y + h * (a31 * k1 + a32 * k2);
    k3 = rhs(ys);
    ys = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    k4 = rhs(ys);
    ys = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    k5 = rhs(ys);
    ys = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    k6 = rhs(ys);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    k7 = rhs(y1);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double errn = rms(err.cwiseQuotient(scale(y, y1)));

    if (!std::isfinite(errn) || !all_finite(y1)) {
      ++traj.rejected_steps;
      h *= kFacMin;
      last_rejected = true;
      continue;
    }
    if (errn > 1.0) {
      ++traj.rejected_steps;
      h *= std::max(kFacMin, kSafety * std::pow(errn, -0.2));
      last_rejected = true;
      continue;
    }

    ++traj.accepted_steps;
    const double t1 = last ? t_end : t + h;
    coeff[0] = y + shift;
    coeff[1] = y1 - y;
    coeff[2] = h * k1 - coeff[1];
    coeff[3] = coeff[1] - h * k7 - coeff[2];
    coeff[4] = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    if (options.keep_dense) traj.dense.append(t, h, coeff);

    while (next_cp < schedule.size() && schedule[next_cp] <= t1) {
      const double tc = schedule[next_cp];
      if (tc == t1) {
        traj.samples.push_back({tc, y1 + shift});
      } else {
        const double theta = (tc - t) / h;
        const double theta1 = 1.0 - theta;
        Vec xc = coeff[0] + theta * (coeff[1] + theta1 * (coeff[2] + theta * (coeff[3] + theta1 * coeff[4])));
        traj.samples.push_back({tc, std::move(xc)});
      }
      ++next_cp;
    }

    t = t1;
    y = y1;
    k1 = k7;

    if (k1.norm() < options.stationary_speed) {
      if (!dwell) {
        dwell = true;
        dwell_start = t;
      } else if (t - dwell_start >= options.stationary_dwell && t < t_end) {
        std::ostringstream os;
        os << "|b| < " << options.stationary_speed << " for " << options.stationary_dwell << " time units";
        traj.stationary_exit = StationaryExit{t, y + shift, os.str()};
        for (; next_cp < schedule.size(); ++next_cp) traj.samples.push_back({schedule[next_cp], y + shift});
        break;
      }
    } else {
      dwell = false;
    }

    double fac = std::clamp(kSafety * std::pow(std::max(errn, 1e-16), -0.2), kFacMin, kFacMax);
    if (last_rejected) fac = std::min(fac, 1.0);
    last_rejected = false;
    h *= fac;
  }
  return traj;
}

}  // namespace torusflow
