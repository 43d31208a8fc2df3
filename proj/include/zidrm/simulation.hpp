#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zidrm/data.hpp"
#include "zidrm/inference.hpp"
#include "zidrm/solver.hpp"

namespace zidrm {

struct TrueValues {
  double mu0 = 0.0, mu1 = 0.0;
  double var0 = 0.0, var1 = 0.0;
  double delta = 0.0;
};

// Zero-inflated log-normal pair: sample i mixes a point mass at zero
// (probability v_i) with LN(a_i, b_i), where a and b are the mean and
// variance on the log scale.
struct MixtureScenario {
  std::string name;
  double v0 = 0.3, v1 = 0.3;
  double a0 = 0.0, a1 = 0.0;
  double b0 = 1.0, b1 = 1.0;
  int n0 = 100, n1 = 100;

  TrueValues true_values() const;
};

// The ten preset parameterizations (sample sizes set by the caller).
MixtureScenario model_preset(int which);
MixtureScenario scenario_by_name(const std::string& name);

// One simulated dataset; replicate r draws only from stream (seed, 2r),
// so any subset of replicates can be generated in parallel.
TwoSampleData generate(const MixtureScenario& scenario, std::uint64_t seed,
                       std::uint64_t replicate = 0);

struct StudyOptions {
  int reps = 1000;
  std::vector<CiMethod> ci_set;
  std::uint64_t seed = 1;
  int workers = 1;
  int bootstrap_b = 999;
  double gamma = 0.05;
  SolverOptions solver;
};

struct EstimatorStats {
  double bias = 0.0;
  double mse = 0.0;
};

struct CiStats {
  double cp = 0.0;  // coverage probability, percent
  double al = 0.0;  // average length
};

struct McReport {
  std::map<std::string, EstimatorStats> estimators;
  std::map<std::string, CiStats> cis;
  int replicates = 0;
  int used = 0;
  int excluded_boundary = 0;
  int excluded_nonconverged = 0;
  TrueValues truth;
  double wall_seconds = 0.0;  // informational; not part of serialized output
};

// Monte Carlo study over `reps` replicates of the scenario: fits the model,
// computes the semiparametric and nonparametric point estimators of
// (delta, var0, var1), the requested CIs for delta, and aggregates bias/MSE
// and coverage/length.  Replicates whose fit has boundary nu or fails to
// converge are counted and excluded.  The report is a pure function of
// (scenario, reps, ci_set, seed, gamma, B): worker count only changes timing.
McReport run_study(const MixtureScenario& scenario, const StudyOptions& opts);

}  // namespace zidrm
