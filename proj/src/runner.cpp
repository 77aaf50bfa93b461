#include "torusflow/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "torusflow/error.hpp"

namespace torusflow {
namespace {

constexpr int kSchemaVersion = 1;
constexpr std::int64_t kMaxReportedBins = 10'000'000;

bool measure_fits(int dim, int n) {
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) {
    total *= n;
    if (total > kMaxReportedBins) return false;
  }
  return true;
}

std::vector<double> residual_horizons(double t_end) {
  std::vector<double> out;
  for (double t = 1.0; t < t_end * (1 - 1e-12); t *= 10.0) out.push_back(t);
  out.push_back(t_end);
  return out;
}

void grade(StartResult& r, const RunSettings& run, const Vec& measured) {
  if (!r.prediction || r.prediction->case_tag == DriftCase::Unsupported) {
    r.verdict = Verdict::Unsupported;
    return;
  }
  const Vec& p = r.prediction->value;
  r.abs_error = (measured - p).cwiseAbs();
  r.tolerance = run.abs_tol + run.rel_tol * p.cwiseAbs().maxCoeff();
  r.verdict = r.abs_error.maxCoeff() <= r.tolerance ? Verdict::Pass : Verdict::Fail;
}

StartResult run_start(const Scenario& sc, std::size_t scenario_index, std::size_t start_index,
                      const std::vector<TestFunction>& panel) {
  StartResult r;
  r.scenario_id = sc.id;
  r.scenario_index = scenario_index;
  r.start_index = start_index;
  r.x0 = sc.starts[start_index];
  try {
    const RunSettings& run = sc.run;
    r.prediction = predict_drift(sc.spec, r.x0, run.search_bound);

    IntegratorOptions opts;
    opts.rtol = run.rtol;
    opts.atol = run.atol;
    const Trajectory traj = integrate(sc.spec, r.x0, run.t_end, opts);
    r.stationary_exit = traj.stationary_exit.has_value();
    r.drift = drift_estimate(traj);

    const int dim = sc.spec.dim();
    if (measure_fits(dim, run.grid)) {
      r.measure = empirical_measure(traj, run.grid);
      r.residuals = residual_panel(sc.spec, traj, panel, residual_horizons(run.t_end), run.grid);
      for (const auto& row : r.residuals)
        if (row.t == run.t_end) r.residual_max = std::max(r.residual_max, std::abs(row.residual));
    }

    PeriodOptions popts;
    popts.integrator = opts;
    popts.search_bound = run.search_bound;
    r.period = detect_torus_period(sc.spec, r.x0, run.period_horizon, run.period_tol, popts);

    grade(r, run, r.drift.final);
  } catch (const std::exception& e) {
    r.verdict = Verdict::Failed;
    r.failure = e.what();
  }
  return r;
}

void order_rows(std::vector<StartResult>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const StartResult& a, const StartResult& b) {
    if (a.scenario_id != b.scenario_id) return a.scenario_id < b.scenario_id;
    return a.start_index < b.start_index;
  });
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path, const std::string& stamp) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# schema_version=" << kSchemaVersion << " generated=" << stamp << '\n';
  return out;
}

std::string numbered(const std::string& stem, int dim) {
  std::string s;
  for (int i = 1; i <= dim; ++i) s += "," + stem + std::to_string(i);
  return s;
}

std::string joined(const Vec& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += "," + format_double(v[i]);
  return s;
}

std::string point(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s + ")";
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Unsupported: return "UNSUPPORTED";
    case Verdict::Failed: return "FAILED";
  }
  return "FAILED";
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

bool ComparisonReport::all_pass() const {
  return std::none_of(rows.begin(), rows.end(),
                      [](const StartResult& r) { return r.verdict == Verdict::Fail || r.verdict == Verdict::Failed; });
}

ComparisonReport run(const std::vector<Scenario>& scenarios, int jobs) {
  struct Task {
    std::size_t scenario;
    std::size_t start;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<TestFunction>> panels;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    panels.push_back(test_function_panel(sc.spec.dim(), sc.run.panel_size, sc.run.seed));
    for (std::size_t i = 0; i < sc.starts.size(); ++i) tasks.push_back({s, i});
  }

  std::vector<StartResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++)
      results[i] = run_start(scenarios[tasks[i].scenario], tasks[i].scenario, tasks[i].start,
                             panels[tasks[i].scenario]);
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }

  ComparisonReport report{std::move(results)};
  order_rows(report.rows);
  return report;
}

ComparisonReport predict(const std::vector<Scenario>& scenarios) {
  ComparisonReport report;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    for (std::size_t i = 0; i < sc.starts.size(); ++i) {
      StartResult r;
      r.scenario_id = sc.id;
      r.scenario_index = s;
      r.start_index = i;
      r.x0 = sc.starts[i];
      try {
        r.prediction = predict_drift(sc.spec, r.x0, sc.run.search_bound);
        r.verdict = r.prediction->case_tag == DriftCase::Unsupported ? Verdict::Unsupported : Verdict::Pass;
      } catch (const std::exception& e) {
        r.verdict = Verdict::Failed;
        r.failure = e.what();
      }
      report.rows.push_back(std::move(r));
    }
  }
  order_rows(report.rows);
  return report;
}

std::string comparison_text(const ComparisonReport& report) {
  std::ostringstream out;
  std::size_t pass = 0;
  for (const auto& r : report.rows) {
    out << "scenario=" << r.scenario_id << " start=" << r.start_index << " x0=" << point(r.x0)
        << " status=" << to_string(r.verdict);
    if (r.prediction) {
      out << " case=" << to_string(r.prediction->case_tag) << " predicted=" << point(r.prediction->value);
    }
    if (r.drift.final.size() > 0) out << " measured=" << point(r.drift.final);
    if (r.abs_error.size() > 0)
      out << " max_error=" << format_double(r.abs_error.maxCoeff()) << " tolerance=" << format_double(r.tolerance);
    if (!r.residuals.empty()) out << " residual_max=" << format_double(r.residual_max);
    if (r.period) {
      if (r.period->found)
        out << " period_tau=" << format_double(r.period->tau) << " period_k=" << point(r.period->k.cast<double>());
      else
        out << " period=none";
    }
    if (r.stationary_exit) out << " stationary_exit=1";
    if (!r.failure.empty()) out << " failure=\"" << r.failure << '"';
    out << '\n';
    if (r.verdict == Verdict::Pass) ++pass;
  }
  out << "summary rows=" << report.rows.size() << " pass=" << pass << " verdict=" << (report.all_pass() ? "PASS" : "FAIL")
      << '\n';
  return out.str();
}

void write_artifacts(const ComparisonReport& report, const std::vector<Scenario>& scenarios,
                     const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stamp = utc_timestamp();

  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    const auto& sc = scenarios[s];
    const int d = sc.spec.dim();
    auto drift = open_csv(out_dir / (sc.output + ".drift.csv"), stamp);
    drift << "scenario_id,start_index,t" << numbered("X", d) << numbered("drift", d) << '\n';
    auto measure = open_csv(out_dir / (sc.output + ".measure.csv"), stamp);
    measure << "scenario_id,start_index,bin" << numbered("index", d) << numbered("center", d) << ",weight\n";
    auto resid = open_csv(out_dir / (sc.output + ".residuals.csv"), stamp);
    resid << "scenario_id,start_index,psi_id,t,residual,identity,bound\n";
    auto period = open_csv(out_dir / (sc.output + ".period.csv"), stamp);
    period << "scenario_id,start_index,found,stationary,tau" << numbered("k", d) << ",residual\n";

    for (const auto& r : report.rows) {
      if (r.scenario_index != s) continue;
      const std::string key = r.scenario_id + "," + std::to_string(r.start_index);
      for (const auto& c : r.drift.checkpoints)
        drift << key << ',' << format_double(c.t) << joined(r.x0 + c.t * c.drift) << joined(c.drift) << '\n';
      if (r.measure) {
        const auto& w = r.measure->weights();
        for (std::size_t b = 0; b < w.size(); ++b) {
          if (w[b] == 0.0) continue;
          measure << key << ',' << b;
          for (int idx : r.measure->multi_index(b)) measure << ',' << idx;
          measure << joined(r.measure->bin_center(b)) << ',' << format_double(w[b]) << '\n';
        }
      }
      for (const auto& row : r.residuals)
        resid << key << ',' << row.psi_id << ',' << format_double(row.t) << ',' << format_double(row.residual) << ','
              << format_double(row.identity) << ',' << format_double(row.bound) << '\n';
      if (r.period) {
        const auto& p = *r.period;
        period << key << ',' << (p.found ? 1 : 0) << ',' << (p.stationary ? 1 : 0) << ',' << format_double(p.tau);
        for (int i = 0; i < d; ++i) period << ',' << (p.k.size() == d ? p.k[i] : 0);
        period << ',' << format_double(p.residual) << '\n';
      }
    }
  }

  auto table = open_csv(out_dir / "comparison.csv", stamp);
  table << "scenario_id,start_index,component,case_tag,measured,predicted,abs_error,tolerance,status,residual_max\n";
  for (const auto& r : report.rows) {
    const std::string key = r.scenario_id + "," + std::to_string(r.start_index);
    const std::string tag = r.prediction ? std::string(to_string(r.prediction->case_tag)) : "";
    const Eigen::Index d = r.x0.size();
    if (r.verdict == Verdict::Failed) {
      table << key << ",," << tag << ",,,,," << to_string(r.verdict) << ",\n";
      continue;
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      table << key << ',' << i + 1 << ',' << tag << ',';
      if (r.drift.final.size() == d) table << format_double(r.drift.final[i]);
      table << ',';
      if (r.prediction && r.prediction->value.size() == d) table << format_double(r.prediction->value[i]);
      table << ',';
      if (r.abs_error.size() == d) table << format_double(r.abs_error[i]) << ',' << format_double(r.tolerance);
      else table << ',';
      table << ',' << to_string(r.verdict) << ',' << format_double(r.residual_max) << '\n';
    }
  }

  std::ofstream txt(out_dir / "comparison.txt");
  if (!txt) throw Error("cannot write " + (out_dir / "comparison.txt").string());
  txt << "# schema_version=" << kSchemaVersion << " generated=" << stamp << '\n' << comparison_text(report);
}

}  // namespace torusflow
