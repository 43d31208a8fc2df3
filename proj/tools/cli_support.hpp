#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "zidrm/simulation.hpp"

namespace zidrm::cli {

// Everything a run needs; round-trips through JSON so a --config file can
// stand in for the flag set.
struct AnalysisConfig {
  // fit inputs: either one grouped CSV or two single-column CSVs
  std::string input;
  std::string input0;
  std::string input1;
  double zero_tol = 0.0;

  std::string basis = "log";
  std::string functional = "mean_pair";
  int moment_k = 1;
  std::string map = "log_ratio";
  std::vector<std::string> ci = {"I4L"};
  std::vector<std::string> tests;
  double gamma = 0.05;
  int bootstrap_b = 999;
  std::uint64_t seed = 1;
  int workers = 1;

  // simulate inputs
  std::vector<std::string> models;
  int n0 = 100;
  int n1 = 100;
  int reps = 1000;
  bool has_custom_scenario = false;
  MixtureScenario custom_scenario;

  // common
  std::string out;              // empty = stdout
  std::string format = "json";  // json | table
  double grad_tol = 1e-10;
  int max_iter = 200;

  nlohmann::ordered_json to_json() const;
  static AnalysisConfig from_json(const nlohmann::ordered_json& j);
};

// CSV ingestion.  Both forms require a header line.
std::vector<double> read_csv_values(const std::string& path);  // column: value
void read_csv_grouped(const std::string& path, std::vector<double>* raw0,
                      std::vector<double>* raw1);  // columns: group,value

// Exit codes: 0 success, 1 usage or I/O error, 2 numerical failure.
int cmd_fit(const AnalysisConfig& config, std::ostream& os, std::ostream& err);
int cmd_simulate(const AnalysisConfig& config, std::ostream& os, std::ostream& err);

}  // namespace zidrm::cli
