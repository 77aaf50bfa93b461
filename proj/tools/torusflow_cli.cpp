#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

#include "torusflow/error.hpp"
#include "torusflow/runner.hpp"
#include "torusflow/scenario.hpp"

using namespace torusflow;

int main(int argc, char** argv) {
  CLI::App app{"Drift, invariant measure and invariance experiments for periodic flows on the torus"};
  app.require_subcommand(1);

  std::string run_file;
  std::string out_dir = "out";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* run_cmd = app.add_subcommand("run", "Integrate every scenario and compare with the closed-form drift");
  run_cmd->add_option("file", run_file, "Scenario file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", out_dir, "Output directory");
  run_cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string predict_file;
  auto* predict_cmd = app.add_subcommand("predict", "Print the closed-form drift for every start");
  predict_cmd->add_option("file", predict_file, "Scenario file")->required()->check(CLI::ExistingFile);

  std::string gallery_path;
  auto* gallery_cmd = app.add_subcommand("gallery", "Write the bundled scenario file");
  gallery_cmd->add_option("path", gallery_path, "Destination (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto scenarios = parse_scenario_file(run_file);
      const auto report = run(scenarios, jobs);
      write_artifacts(report, scenarios, out_dir);
      std::cout << comparison_text(report);
      return report.all_pass() ? 0 : 1;
    }
    if (*predict_cmd) {
      const auto report = predict(parse_scenario_file(predict_file));
      std::cout << comparison_text(report);
      return report.all_pass() ? 0 : 1;
    }
    if (*gallery_cmd) {
      if (gallery_path.empty()) {
        std::cout << gallery_text();
      } else {
        std::ofstream out(gallery_path);
        if (!(out << gallery_text())) throw Error("cannot write " + gallery_path);
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
