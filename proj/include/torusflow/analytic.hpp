#pragma once

#include <string>
#include <string_view>

#include "torusflow/direction.hpp"
#include "torusflow/field_spec.hpp"
#include "torusflow/scalar_field.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

enum class DriftCase {
  OneDPositive,
  OneDVanishing,
  IrrationalPositive,
  IrrationalVanishing,
  RationalLinePositive,
  RationalLineVanishing,
  Rectified,
  Current,
  Unsupported,
};

std::string_view to_string(DriftCase c);

struct DriftPrediction {
  Vec value;
  DriftCase case_tag = DriftCase::Unsupported;
  /// FNV-1a digest of the inputs that determined the prediction.
  std::string inputs_digest;
  std::string note;
};

/// (int_{[0,1]^d} 1/a)^{-1}. Throws VanishingField unless a > 0.
double harmonic_mean(const ScalarField& a, int initial_points = 64);

/// Harmonic mean of s -> a(s xi + proj(x)) over [x.xi, x.xi + period].
/// Throws VanishesOnLine if a has a zero on that line.
double line_harmonic_mean(const ScalarField& a, const Vec& xi, double period, const Vec& x);

/**
 * Closed-form limit of X(t, x)/t.
 *
 * OneD: bbar = (int 1/b)^{-1} when b has no zero, else 0. Direction: the
 * harmonic mean times xi (irrational xi, a > 0), the line harmonic mean times
 * xi (rational xi, a > 0 on the line through x), 0 when a vanishes on the
 * torus or on that line respectively. Rectified: the Direction value at
 * Phi(x) mapped by A^{-1}. Current: 0. Generic fields and indeterminate
 * directions are Unsupported.
 */
DriftPrediction predict_drift(const FieldSpec& spec, const Vec& x, const DirectionClass& direction_class);
/// Classifies the field's direction with `search_bound` first.
DriftPrediction predict_drift(const FieldSpec& spec, const Vec& x, int search_bound = kDefaultSearchBound);

}  // namespace torusflow
