#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "torusflow/field_spec.hpp"
#include "torusflow/types.hpp"

namespace torusflow {

/// Run parameters of a scenario; defaults apply to omitted keys.
struct RunSettings {
  double t_end = 1e4;
  double rtol = 1e-10;
  double atol = 1e-12;
  int grid = 64;
  int search_bound = 64;
  std::uint64_t seed = 1;
  int panel_size = 10;
  /// A start passes when max_i |measured_i - predicted_i| <= abs_tol + rel_tol * |predicted|_inf.
  double rel_tol = 0.01;
  double abs_tol = 1e-3;
  double period_horizon = 100.0;
  double period_tol = 1e-6;
};

struct Scenario {
  std::string id;
  FieldSpec spec;
  std::vector<Vec> starts;
  RunSettings run;
  /// File stem for the per-scenario CSV files.
  std::string output;
};

/**
 * Strict parser for the scenario format.
 *
 *   # comment
 *   [scenario <id>]
 *   family = direction | rectified | current | oned | generic
 *   dim    = <d>
 *   a.term = <k_1> ... <k_d> : <cos> <sin>      (repeatable)
 *   a.mode = raw | squared      a.offset = <m>
 *   xi     = <x_1> ... <x_d>                    (normalized on load)
 *   starts = <p_1> ; <p_2> ; ...               (each d numbers)
 *
 * Rectified fields add `phi.lattice = <row> ; <row> ...` and optional
 * `phi.periodic.<i>.term`. Current fields use `v.term`, `A.ridge` and
 * `A.factor.<i>.<j>.term` (1-based, missing entries are zero). OneD uses
 * `b.*`; generic fields use `b.<i>.*`. Run keys: t_end, rtol, atol, grid,
 * bound, seed, panel, rel_tol, abs_tol, period_horizon, period_tol, output.
 *
 * Numbers are parsed with std::from_chars. Unknown keys, duplicate ids and
 * malformed values raise ParseError with the line number.
 */
std::vector<Scenario> parse_scenarios(std::string_view text);
std::vector<Scenario> parse_scenario_file(const std::filesystem::path& path);

/// The bundled gallery covering every closed-form drift case.
std::string_view gallery_text();

}  // namespace torusflow
