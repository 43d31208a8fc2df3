#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli_support.hpp"
#include "zidrm/errors.hpp"

namespace {

using zidrm::cli::AnalysisConfig;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

// --config is applied before flag parsing so that explicit flags override
// values from the file.
int preload_config(int argc, char** argv, AnalysisConfig* cfg) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) {
        std::cerr << "cannot open config file '" << argv[i + 1] << "'\n";
        return 1;
      }
      try {
        *cfg = AnalysisConfig::from_json(nlohmann::ordered_json::parse(in));
      } catch (const std::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return 1;
      }
    }
  }
  return 0;
}

void attach_common(CLI::App* sub, AnalysisConfig* cfg, std::string* ci_list,
                   std::string* config_path) {
  sub->add_option("--config", *config_path, "JSON config file (flags override it)");
  sub->add_option("--ci", *ci_list, "comma list of CI methods: I1,I1B,I4,I4L");
  sub->add_option("--gamma", cfg->gamma, "significance level (default 0.05)");
  sub->add_option("--bootstrap-b", cfg->bootstrap_b,
                  "bootstrap resamples for I1B (default 999)");
  sub->add_option("--seed", cfg->seed, "RNG seed");
  sub->add_option("--grad-tol", cfg->grad_tol, "solver gradient tolerance");
  sub->add_option("--max-iter", cfg->max_iter, "solver iteration cap");
  sub->add_option("--out", cfg->out, "output path (default stdout)");
  sub->add_option("--format", cfg->format, "json | table")
      ->check(CLI::IsMember({"json", "table"}));
}

}  // namespace

int main(int argc, char** argv) {
  AnalysisConfig cfg;
  if (int rc = preload_config(argc, argv, &cfg)) return rc;

  CLI::App app{"Semiparametric two-sample inference for zero-inflated data "
               "under a density ratio model"};
  app.require_subcommand(1);

  std::string ci_list, tests_list, models_list, config_path;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a dataset from CSV");
  fit_cmd->add_option("--input", cfg.input, "CSV with 'group' and 'value' columns");
  fit_cmd->add_option("--input0", cfg.input0, "CSV with a 'value' column, sample 0");
  fit_cmd->add_option("--input1", cfg.input1, "CSV with a 'value' column, sample 1");
  fit_cmd->add_option("--zero-tol", cfg.zero_tol,
                      "values <= zero-tol count as zeros (default 0)");
  fit_cmd->add_option("--basis", cfg.basis, "log | identity | log+identity");
  fit_cmd->add_option("--functional", cfg.functional,
                      "moment_k | mean_pair | mean_and_m2 | mean_and_xlogx");
  fit_cmd->add_option("--k", cfg.moment_k, "moment order for --functional moment_k");
  fit_cmd->add_option("--map", cfg.map,
                      "ratio | log_ratio | variance_pair | variance_diff | "
                      "cv_pair | cv_diff | ge1_pair | ge1_diff");
  fit_cmd->add_option("--test", tests_list,
                      "comma list of maps tested against 0 (e.g. variance_diff)");
  attach_common(fit_cmd, &cfg, &ci_list, &config_path);

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run a Monte Carlo study");
  sim_cmd->add_option("--model", models_list, "comma list: model1..model10 or custom");
  sim_cmd->add_option("--n0", cfg.n0, "sample 0 size");
  sim_cmd->add_option("--n1", cfg.n1, "sample 1 size");
  sim_cmd->add_option("--reps", cfg.reps, "number of replicates");
  sim_cmd->add_option("--workers", cfg.workers, "worker threads");
  attach_common(sim_cmd, &cfg, &ci_list, &config_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (!ci_list.empty()) cfg.ci = split_list(ci_list);
  if (!tests_list.empty()) cfg.tests = split_list(tests_list);
  if (!models_list.empty()) cfg.models = split_list(models_list);

  if (fit_cmd->parsed()) return zidrm::cli::cmd_fit(cfg, std::cout, std::cerr);
  if (sim_cmd->parsed()) return zidrm::cli::cmd_simulate(cfg, std::cout, std::cerr);
  return 1;
}
