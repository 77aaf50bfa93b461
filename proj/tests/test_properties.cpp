#include <doctest.h>

#include "properties.hpp"

namespace {
void check(const props::Outcome& o) {
  INFO(o.name << ": " << o.failures << "/" << o.instances << " failed, worst " << o.worst << " vs " << o.limit);
  CHECK(o.instances == props::kInstances);
  CHECK(o.ok());
}
}  // namespace

TEST_CASE("lattice equivariance") { check(props::lattice_equivariance()); }
TEST_CASE("semigroup") { check(props::semigroup()); }
TEST_CASE("time reversal") { check(props::reversibility()); }
TEST_CASE("measure normalization") { check(props::measure_normalization()); }
TEST_CASE("analytic gradients") { check(props::gradient_check()); }
TEST_CASE("harmonic below arithmetic mean") { check(props::harmonic_below_arithmetic()); }
