#pragma once

#include <Eigen/Core>
#include <functional>
#include <utility>
#include <vector>

#include "zidrm/basis.hpp"
#include "zidrm/data.hpp"
#include "zidrm/likelihood.hpp"
#include "zidrm/params.hpp"

namespace zidrm {

struct SolverOptions {
  double grad_tol = 1e-10;        // sup-norm of the gradient
  int max_iter = 200;
  double theta_norm_bound = 50.0; // separation heuristic, sup-norm of theta
};

struct FitDiagnostics {
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool boundary_nu = false;          // some n_i0 == 0; inference refuses the fit
  bool separation_suspected = false; // |theta| ran away while gradient stalled
};

// A fitted density ratio model: closed-form nu_hat and rho_hat, theta_hat
// from Newton ascent on the dual likelihood, empirical-likelihood weights
// p_ij, and the two estimated baseline CDFs as (x, mass) jump lists.
struct DrmFit {
  DrmFit(TwoSampleData d, BasisFunction b)
      : data(std::move(d)), basis(std::move(b)) {}

  TwoSampleData data;
  BasisFunction basis;
  double nu0 = 0.0, nu1 = 0.0;
  double rho = 0.0;
  Eigen::VectorXd theta;
  std::vector<double> weights0;  // p_ij aligned with data.pos0
  std::vector<double> weights1;  // p_ij aligned with data.pos1
  std::vector<std::pair<double, double>> g0_jumps;  // sorted by x, ties merged
  std::vector<std::pair<double, double>> g1_jumps;
  FitDiagnostics diagnostics;

  double w() const { return data.w(); }
  double delta_hat() const {
    return w() * (1.0 - nu0) + (1.0 - w()) * (1.0 - nu1);
  }
  // Validated bundle for interior fits, unchecked for boundary ones.
  ParamBundle bundle() const;
  // CDF values of the estimated baselines.
  double g0(double x) const;
  double g1(double x) const;
};

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool separation_suspected = false;
};

// Maximizes a concave objective by Newton ascent with Armijo backtracking
// (shrink 0.5, slope factor 1e-4).  When the Newton system is singular or
// the direction is not an ascent direction, retries with an escalating
// diagonal shift and finally falls back to steepest ascent.  Objective
// evaluations that throw OverflowError are treated as -inf by the line
// search.  Returns the best iterate seen; converged=false after max_iter.
NewtonResult newton_ascend(
    const std::function<LikelihoodEval(const Eigen::VectorXd&)>& objective,
    Eigen::VectorXd x0, const SolverOptions& opts);

// Maximum empirical likelihood fit.  Never throws on boundary zero counts
// or non-convergence; those outcomes are flagged in diagnostics.
DrmFit fit(const TwoSampleData& data, const BasisFunction& basis,
           const SolverOptions& opts = {});

}  // namespace zidrm
