#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "torusflow/analytic.hpp"
#include "torusflow/ergodic.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/invariance.hpp"
#include "torusflow/scenario.hpp"

namespace torusflow {

enum class Verdict { Pass, Fail, Unsupported, Failed };

std::string_view to_string(Verdict v);

/// Outcome for one (scenario, start) pair.
struct StartResult {
  std::string scenario_id;
  std::size_t scenario_index = 0;
  std::size_t start_index = 0;
  Vec x0;
  Verdict verdict = Verdict::Failed;
  /// Message of the exception behind a Failed verdict.
  std::string failure;

  DriftEstimate drift;
  std::optional<DriftPrediction> prediction;
  /// |measured - predicted| per component; empty without a prediction.
  Vec abs_error;
  double tolerance = 0.0;

  std::vector<ResidualRow> residuals;
  double residual_max = 0.0;
  std::optional<EmpiricalMeasure> measure;
  std::optional<PeriodReport> period;
  bool stationary_exit = false;
};

struct ComparisonReport {
  /// Ordered by (scenario_id, start_index).
  std::vector<StartResult> rows;

  bool all_pass() const;
};

/// Runs every start of every scenario on `jobs` worker threads.
ComparisonReport run(const std::vector<Scenario>& scenarios, int jobs = 1);

/// Predictions only, no integration.
ComparisonReport predict(const std::vector<Scenario>& scenarios);

/**
 * Writes <output>.drift.csv, <output>.measure.csv, <output>.residuals.csv and
 * <output>.period.csv per scenario plus comparison.csv and comparison.txt.
 * Each file starts with a "# schema_version=1 generated=<UTC time>" line.
 */
void write_artifacts(const ComparisonReport& report, const std::vector<Scenario>& scenarios,
                     const std::filesystem::path& out_dir);

/// The structured-text comparison table.
std::string comparison_text(const ComparisonReport& report);

/// Shortest round-trip decimal form of x.
std::string format_double(double x);

}  // namespace torusflow
