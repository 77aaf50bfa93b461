#include "torusflow/sign_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>

namespace torusflow {
namespace {

constexpr int kCandidates = 8;

SignClass classify(double minimum, double eps_zero) {
  if (minimum < -eps_zero) return SignClass::ChangesSign;
  if (minimum < eps_zero) return SignClass::Vanishing;
  return SignClass::Positive;
}

// Gauss-Newton iteration towards a zero of the base polynomial q; used for
// Squared fields with zero offset where q^2 has a rank-deficient Hessian.
// Gauss-Newton on q for f = q^2: grad q = grad f / (2q), so the step is -2 f grad f / |grad f|^2.
Vec refine_squared(const ScalarField& f, const Vec& x0, int max_iter) {
  Vec x = x0;
  double fx = f.value(x);
  for (int it = 0; it < max_iter && fx > 0.0; ++it) {
    Vec g;
    f.value_and_gradient(x, g);
    const double gg = g.squaredNorm();
    if (gg == 0.0) break;
    Vec step = -(2.0 * fx / gg) * g;
    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      Vec trial = x + lambda * step;
      const double ft = f.value(trial);
      if (ft < fx) {
        x = std::move(trial);
        fx = ft;
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved || (lambda * step).norm() < 1e-16) break;
  }
  return x;
}

}  // namespace

int default_grid_resolution(int dim) {
  switch (dim) {
    case 1:
      return 4096;
    case 2:
      return 256;
    case 3:
      return 64;
    default:
      return std::max(4, static_cast<int>(std::floor(std::pow(double(1 << 20), 1.0 / dim))));
  }
}

Vec local_minimize(const ScalarField& f, const Vec& x0, int max_iter) {
  if (f.mode() == FieldMode::Squared && f.offset() == 0.0) return refine_squared(f, x0, max_iter);

  const int d = f.dim();
  const double hb = std::max(f.hessian_bound(), 1e-300);
  Vec x = x0;
  Vec g;
  double fx = f.value_and_gradient(x, g);
  for (int it = 0; it < max_iter; ++it) {
    if (g.norm() == 0.0) break;
    // Finite-difference Hessian from the analytic gradient.
    const double h = 1e-6;
    Mat hess(d, d);
    for (int j = 0; j < d; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      hess.col(j) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * h);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> eig(hess);
    Vec lam = eig.eigenvalues().cwiseAbs().cwiseMax(1e-10 * hb);
    Vec step = -eig.eigenvectors() * ((eig.eigenvectors().transpose() * g).cwiseQuotient(lam));

    double lambda = 1.0;
    bool improved = false;
    for (int k = 0; k < 40; ++k) {
      Vec trial = x + lambda * step;
      Vec gt;
      const double ft = f.value_and_gradient(trial, gt);
      if (ft < fx) {
        x = std::move(trial);
        fx = ft;
        g = std::move(gt);
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved || (lambda * step).norm() < 1e-15) break;
  }
  return x;
}

SignReport analyze_sign(const ScalarField& f, double eps_zero) {
  if (f.mode() == FieldMode::Squared && f.offset() > 0.0) {
    SignReport r;
    r.kind = SignClass::Positive;
    r.minimum = f.offset();
    r.certified = true;
    return r;
  }

  const int d = f.dim();
  const int n = default_grid_resolution(d);
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= n;

  std::vector<double> values(static_cast<std::size_t>(total));
  Vec x(d);
  for (std::int64_t p = 0; p < total; ++p) {
    std::int64_t rem = p;
    for (int i = 0; i < d; ++i) {
      x[i] = static_cast<double>(rem % n) / n;
      rem /= n;
    }
    values[static_cast<std::size_t>(p)] = f.value(x);
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(total));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  const auto k = std::min<std::int64_t>(kCandidates, total);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](auto a, auto b) { return values[a] < values[b]; });

  auto grid_point = [&](std::int64_t flat) {
    Vec p(d);
    for (int i = 0; i < d; ++i) {
      p[i] = static_cast<double>(flat % n) / n;
      flat /= n;
    }
    return p;
  };

  SignReport best;
  best.minimum = values[static_cast<std::size_t>(order[0])];
  best.argmin = grid_point(order[0]);
  for (std::int64_t c = 0; c < k; ++c) {
    Vec xr = local_minimize(f, grid_point(order[c]));
    const double v = f.value(xr);
    if (v < best.minimum) {
      best.minimum = v;
      best.argmin = std::move(xr);
    }
  }
  best.kind = classify(best.minimum, eps_zero);
  return best;
}

SignReport analyze_sign_on_segment(const ScalarField& f, const Vec& xi, const Vec& base, double s0,
                                   double s1, double eps_zero) {
  if (f.mode() == FieldMode::Squared && f.offset() > 0.0) {
    SignReport r;
    r.minimum = f.offset();
    r.certified = true;
    return r;
  }
  if (s1 < s0) std::swap(s0, s1);
  auto line = [&](double s) -> double { return f.value(s * xi + base); };

  const double h = 1.0 / (64.0 * std::max(1.0, f.max_frequency()));
  const auto samples = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil((s1 - s0) / h)) + 1);
  const double ds = (s1 - s0) / static_cast<double>(samples - 1);

  std::vector<std::pair<double, double>> candidates;  // (value, s)
  candidates.reserve(kCandidates + 1);
  for (std::int64_t i = 0; i < samples; ++i) {
    const double s = s0 + ds * static_cast<double>(i);
    const double v = line(s);
    if (candidates.size() < kCandidates || v < candidates.back().first) {
      candidates.emplace_back(v, s);
      std::sort(candidates.begin(), candidates.end());
      if (candidates.size() > kCandidates) candidates.pop_back();
    }
  }

  SignReport best;
  best.minimum = candidates.front().first;
  double best_s = candidates.front().second;
  for (const auto& [v, s] : candidates) {
    const double lo = std::max(s0, s - ds);
    const double hi = std::min(s1, s + ds);
    auto [sm, vm] = boost::math::tools::brent_find_minima(line, lo, hi, 52);
    if (vm < best.minimum) {
      best.minimum = vm;
      best_s = sm;
    }
    if (v < best.minimum) {
      best.minimum = v;
      best_s = s;
    }
  }
  best.argmin = best_s * xi + base;
  best.kind = classify(best.minimum, eps_zero);
  return best;
}

}  // namespace torusflow
