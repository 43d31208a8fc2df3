#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <map>
#include <string>

#include "zidrm/asymptotics.hpp"
#include "zidrm/data.hpp"
#include "zidrm/functionals.hpp"
#include "zidrm/solver.hpp"

namespace zidrm {

enum class CiMethod { kI1, kI1B, kI4, kI4L };

std::string ci_method_name(CiMethod m);
CiMethod ci_method_by_name(const std::string& name);

struct IntervalResult {
  double lower = 0.0;
  double upper = 0.0;
  CiMethod method = CiMethod::kI4;
  double level = 0.95;        // 1 - gamma
  double se = 0.0;            // standard error the interval was built from
  int bootstrap_reps = 0;     // 0 unless bootstrap-based
  int degenerate_redraws = 0; // resamples rejected for having no positives
  int failed_draws = 0;       // draws abandoned after the redraw cap
};

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;  // significance level -> rejected
};

// Wald CI for a scalar map phi = g(psi), Gamma_g scaled by 1/n so the
// endpoints are phi_hat -+ z_{gamma/2} se.  With log_transform the interval
// is built for log phi through the log-composed map and exponentiated
// (requires phi_hat > 0); `se` then refers to the log scale.
IntervalResult wald_interval(const DrmFit& fit, const UFunctional& u,
                             const SmoothMap& g, double gamma,
                             bool log_transform);

// Wald test of H0: g(psi) = null_value using the chi-square_q calibration
//   n (g(psi_hat) - null)' Gamma_g^{-1} (g(psi_hat) - null).
// reject_at is filled for 0.01/0.05/0.10 and the requested gamma.
TestResult wald_region_test(const DrmFit& fit, const UFunctional& u,
                            const SmoothMap& g, const Eigen::VectorXd& null_value,
                            double gamma);

// Fully nonparametric estimators: psi_i~ = n_i^{-1} sum_j a(X_ij) over all
// observations (zeros contribute a(0) = 0), raw-scale means/variances with
// the n_i - 1 denominator, and the mean ratio.
struct NonparamEstimates {
  Eigen::VectorXd psi0, psi1;
  double mu0 = 0.0, mu1 = 0.0;
  double var0 = 0.0, var1 = 0.0;
  double delta = 0.0;
};
NonparamEstimates nonparam_estimates(const TwoSampleData& data,
                                     const std::function<Eigen::VectorXd(double)>& a,
                                     int m);

// Convenience overload for a(x) = x.
NonparamEstimates nonparam_estimates(const TwoSampleData& data);

// Nonparametric Wald CI for the mean ratio built on the log scale (I1).
IntervalResult nonparam_log_wald(const TwoSampleData& data, double gamma);

// A statistic on the log scale together with its standard error, the input
// of the bootstrap-t construction.
struct LogScaleStat {
  double value = 0.0;
  double se = 0.0;
};
using LogStatFn = std::function<LogScaleStat(const TwoSampleData&)>;

// log delta~ with its delta-method standard error; the default I1B statistic.
LogStatFn log_mean_ratio_stat();

enum class BootstrapKind {
  kSymmetricT,   // Wald form with the (1-gamma) quantile of |t*| as critical value
  kEqualTailedT, // reflect the gamma/2 and 1-gamma/2 quantiles of t*
  kPercentile,   // quantiles of the resampled estimates themselves
};

struct BootstrapOptions {
  BootstrapKind kind = BootstrapKind::kSymmetricT;
  int max_redraw = 1000;  // redraw cap per degenerate resample
};

// Bootstrap Wald-type CI (I1B): resamples each sample independently with
// replacement preserving n0 and n1, studentizes the statistic against the
// original estimate, and maps back from the log scale.  The default keeps
// the Wald form and replaces the normal quantile by the bootstrap critical
// value; the equal-tailed and percentile constructions are available for
// sensitivity checks.  Deterministic for a fixed seed.  Resamples without a
// positive observation in either sample are redrawn (capped, counted).
IntervalResult bootstrap_wald(const TwoSampleData& data, const LogStatFn& stat,
                              double gamma, int B, std::uint64_t seed,
                              const BootstrapOptions& opts = {});

}  // namespace zidrm
