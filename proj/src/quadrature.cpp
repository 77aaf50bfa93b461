#include "torusflow/quadrature.hpp"

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace torusflow {
namespace {

// Nodes and weights on [0, 1] for an N-point Gauss-Legendre rule.
template <unsigned N>
struct UnitRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  UnitRule() {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& abscissa = Rule::abscissa();
    const auto& w = Rule::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      if (abscissa[i] == 0.0) {
        nodes.push_back(0.5);
        weights.push_back(0.5 * w[i]);
        continue;
      }
      nodes.push_back(0.5 * (1.0 - abscissa[i]));
      weights.push_back(0.5 * w[i]);
      nodes.push_back(0.5 * (1.0 + abscissa[i]));
      weights.push_back(0.5 * w[i]);
    }
  }
};

const UnitRule<10>& line_rule() {
  static const UnitRule<10> rule;
  return rule;
}

const UnitRule<8>& cell_rule() {
  static const UnitRule<8> rule;
  return rule;
}

bool close_enough(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b)) || a == b;
}

double tensor_sum(const std::function<double(const Vec&)>& f, int dim, std::int64_t panels) {
  const auto& rule = cell_rule();
  const auto per_panel = static_cast<std::int64_t>(rule.nodes.size());
  const std::int64_t m = panels * per_panel;
  std::vector<double> x1(static_cast<std::size_t>(m));
  std::vector<double> w1(static_cast<std::size_t>(m));
  for (std::int64_t p = 0; p < panels; ++p)
    for (std::int64_t q = 0; q < per_panel; ++q) {
      x1[p * per_panel + q] = (static_cast<double>(p) + rule.nodes[q]) / panels;
      w1[p * per_panel + q] = rule.weights[q] / panels;
    }

  std::vector<std::int64_t> idx(dim, 0);
  Vec x(dim);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int i = 0; i < dim; ++i) {
      x[i] = x1[idx[i]];
      w *= w1[idx[i]];
    }
    total += w * f(x);
    int i = 0;
    while (i < dim && ++idx[i] == m) idx[i++] = 0;
    if (i == dim) break;
  }
  return total;
}

}  // namespace

double composite_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                std::int64_t panels) {
  const auto& rule = line_rule();
  const double h = (b - a) / static_cast<double>(panels);
  double total = 0.0;
  for (std::int64_t p = 0; p < panels; ++p) {
    const double left = a + h * static_cast<double>(p);
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) s += rule.weights[q] * f(left + h * rule.nodes[q]);
    total += s * h;
  }
  return total;
}

QuadratureResult adaptive_gauss_legendre(const std::function<double(double)>& f, double a, double b,
                                         double rel_tol, std::int64_t initial_panels,
                                         std::int64_t max_panels) {
  QuadratureResult r;
  std::int64_t panels = std::max<std::int64_t>(1, initial_panels);
  double prev = composite_gauss_legendre(f, a, b, panels);
  while (panels * 2 <= max_panels) {
    panels *= 2;
    const double next = composite_gauss_legendre(f, a, b, panels);
    if (close_enough(prev, next, rel_tol)) {
      r.value = next;
      r.converged = true;
      r.points = panels * 10;
      return r;
    }
    prev = next;
  }
  r.value = prev;
  r.points = panels * 10;
  return r;
}

QuadratureResult torus_integral(const std::function<double(const Vec&)>& f, int dim, double rel_tol,
                                std::int64_t initial_points, std::int64_t max_total) {
  const auto per_panel = static_cast<std::int64_t>(cell_rule().nodes.size());
  auto total_points = [dim](std::int64_t m) { return std::pow(static_cast<double>(m), dim); };

  std::int64_t panels = std::max<std::int64_t>(1, initial_points / per_panel);
  while (panels > 1 && total_points(panels * per_panel) > static_cast<double>(max_total)) panels /= 2;

  QuadratureResult r;
  double prev = tensor_sum(f, dim, panels);
  r.value = prev;
  r.points = panels * per_panel;
  while (total_points(2 * panels * per_panel) <= static_cast<double>(max_total)) {
    panels *= 2;
    const double next = tensor_sum(f, dim, panels);
    r.value = next;
    r.points = panels * per_panel;
    if (close_enough(prev, next, rel_tol)) {
      r.converged = true;
      return r;
    }
    prev = next;
  }
  return r;
}

}  // namespace torusflow
