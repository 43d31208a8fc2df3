#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <utility>

#include "zidrm/params.hpp"
#include "zidrm/solver.hpp"

namespace zidrm {

// Integrand u(x; nu, theta) of a p-dimensional linear functional
// psi = integral of u dG0, together with its analytic derivatives in nu
// (p x 2) and theta (p x (d+1)).  Evaluated on positive x only.
struct UFunctional {
  int p = 0;
  std::function<Eigen::VectorXd(double, const ParamBundle&)> value;
  std::function<Eigen::MatrixXd(double, const ParamBundle&)> d_nu;
  std::function<Eigen::MatrixXd(double, const ParamBundle&)> d_theta;
  std::string label;
};

// Smooth map g: R^p -> R^q with analytic Jacobian, used for delta-method
// inference on g(psi).
struct SmoothMap {
  int q = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;
  std::string label;
};

enum class BuiltinU { kMomentK, kMeanPair, kMeanAndM2, kMeanAndXLogX };
enum class BuiltinG {
  kRatio,
  kLogRatio,
  kVariancePair,
  kVarianceDiff,
  kCvPair,
  kCvDiff,
  kGe1Pair,
  kGe1Diff,
};

// Built-in functionals.
//   moment_k:       p=2, ((1-nu0) x^k, (1-nu1) x^k omega(x))
//   mean_pair:      moment_k with k=1
//   mean_and_m2:    p=4 stack of k=1 and k=2 rows per population
//   mean_and_xlogx: p=4, x and x log x rows per population
UFunctional builtin_u(BuiltinU which, int k = 1);

// Built-in smooth maps: mean ratio x2/x1 and its log, variances from raw
// moments, coefficients of variation, and the xi=1 entropy index
// x2/x1 - log x1, each as a pair or as the difference for testing equality.
SmoothMap builtin_g(BuiltinG which);

// Stacked functional ((1-nu0) a(x), (1-nu1) a(x) omega(x)) for a given
// m-dimensional a with a(0) = 0, so psi = (psi0, psi1).
UFunctional functional_pair_u(std::function<Eigen::VectorXd(double)> a, int m,
                              std::string label);

// Custom functionals/maps from value callables alone; derivatives fall back
// to central finite differences with step max(1e-6, 1e-6|param|).
UFunctional custom_u(int p,
                     std::function<Eigen::VectorXd(double, const ParamBundle&)> value,
                     std::string label);
SmoothMap custom_g(int q, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value,
                   std::string label);

// MELE of the functional: psi_hat = sum_ij p_ij u(X_ij; nu_hat, theta_hat).
Eigen::VectorXd psi_hat(const DrmFit& fit, const UFunctional& u);

// (psi_hat, g(psi_hat)).
std::pair<Eigen::VectorXd, Eigen::VectorXd> estimate(const DrmFit& fit,
                                                     const UFunctional& u,
                                                     const SmoothMap& g);

// CLI registry lookups; throw DomainError for unknown names.
UFunctional u_by_name(const std::string& name, int k = 1);
SmoothMap g_by_name(const std::string& name);

}  // namespace zidrm
