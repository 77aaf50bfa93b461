#include "torusflow/direction.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "torusflow/error.hpp"

namespace torusflow {

DirectionClass classify_direction(const Vec& xi, int search_bound, double tol) {
  const auto d = xi.size();
  if (d < 1) throw InvalidField("empty direction vector");
  if (std::abs(xi.norm() - 1.0) > 1e-12) throw InvalidField("direction vector must have unit length");
  if (search_bound < 1) throw InvalidField("search bound must be positive");

  Eigen::Index j = 0;
  xi.cwiseAbs().maxCoeff(&j);
  for (int m = 1; m <= search_bound; ++m) {
    const double t0 = m / std::abs(xi[j]);
    IntVec k(d);
    bool in_box = true;
    for (Eigen::Index i = 0; i < d; ++i) {
      k[i] = std::llround(t0 * xi[i]);
      if (std::llabs(k[i]) > search_bound) in_box = false;
    }
    if (!in_box) break;
    const double period = k.cast<double>().dot(xi);
    if ((period * xi - k.cast<double>()).lpNorm<Eigen::Infinity>() <= kRationalTol)
      return RationalPeriod{period, k};
  }

  // Largest bound whose box fits the enumeration budget.
  int bound = search_bound;
  while (bound > 1 && std::pow(2.0 * bound + 1.0, static_cast<double>(d)) > static_cast<double>(1u << 28)) --bound;

  IntVec k = IntVec::Constant(d, -bound);
  double min_dot = std::numeric_limits<double>::infinity();
  IntVec argmin;
  while (true) {
    // Half space: first nonzero component positive.
    Eigen::Index first = 0;
    while (first < d && k[first] == 0) ++first;
    if (first < d && k[first] > 0) {
      const double dot = std::abs(k.cast<double>().dot(xi));
      if (dot < min_dot) {
        min_dot = dot;
        argmin = k;
      }
    }
    Eigen::Index i = 0;
    while (i < d && k[i] == bound) {
      k[i] = -bound;
      ++i;
    }
    if (i == d) break;
    ++k[i];
  }
  if (min_dot > tol) return TotallyIrrational{bound, min_dot};
  return Indeterminate{bound, argmin};
}

std::string describe(const DirectionClass& cls) {
  std::ostringstream os;
  if (const auto* r = std::get_if<RationalPeriod>(&cls)) {
    os << "rational(T=" << r->period << ", k=[";
    for (Eigen::Index i = 0; i < r->lattice.size(); ++i) os << (i ? " " : "") << r->lattice[i];
    os << "])";
  } else if (const auto* t = std::get_if<TotallyIrrational>(&cls)) {
    os << "irrational(bound=" << t->search_bound << ", min|xi.k|=" << t->min_abs_dot << ")";
  } else {
    os << "indeterminate(bound=" << std::get<Indeterminate>(cls).search_bound << ")";
  }
  return os.str();
}

}  // namespace torusflow
