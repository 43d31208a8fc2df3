#pragma once

#include <Eigen/Core>
#include <functional>

#include "zidrm/functionals.hpp"
#include "zidrm/solver.hpp"

namespace zidrm {

// Condition number above which a required inverse is declared singular.
inline constexpr double kSingularConditionNumber = 1e12;

struct PsdDiagnostics {
  bool psd = true;
  double min_eigenvalue = 0.0;
};

PsdDiagnostics psd_check(const Eigen::MatrixXd& m, double tol = 1e-8);

// Plug-in expectation under G0_hat: sum_ij p_ij f(X_ij).
Eigen::VectorXd empirical_e0(const DrmFit& fit,
                             const std::function<Eigen::VectorXd(double)>& f);
double empirical_e0_scalar(const DrmFit& fit,
                           const std::function<double(double)>& f);

// A_theta_hat = Delta_hat (1 - rho_hat) E0_hat{h1 Q Q'}; throws
// SingularMatrixError when its condition number signals basis degeneracy.
Eigen::MatrixXd a_theta_hat(const DrmFit& fit);

// Plug-in asymptotic covariance of sqrt(n) (eta_hat - eta*), with
// eta = (nu0, nu1, rho, theta); dimension (3 + d + 1).
Eigen::MatrixXd lambda_hat(const DrmFit& fit);

// Plug-in covariance of the score S_n / sqrt(n); exposed for testing only.
Eigen::MatrixXd b_hat(const DrmFit& fit);

struct MMatrices {
  Eigen::MatrixXd m1;  // p x 2,     E0_hat{du/dnu}
  Eigen::VectorXd m2;  // p,         E0_hat{du/dalpha} - rho_hat psi_hat
  Eigen::MatrixXd m3;  // p x (d+1), E0_hat{du/dtheta - h1 u Q'}
};
MMatrices m_matrices(const DrmFit& fit, const UFunctional& u);

// Plug-in asymptotic covariance of sqrt(n) (psi_hat - psi*).
Eigen::MatrixXd gamma_hat(const DrmFit& fit, const UFunctional& u);

// Delta-method covariance of sqrt(n) {g(psi_hat) - g(psi*)}.
Eigen::MatrixXd gamma_g_hat(const DrmFit& fit, const UFunctional& u,
                            const SmoothMap& g);

// Covariances of the stacked (psi0, psi1) estimators for a given a(x):
// block-diagonal nonparametric Gamma_non, the semiparametric Gamma_sem
// obtained by subtracting the h1-weighted projection-residual term, and the
// smallest eigenvalue of their difference (the efficiency gap).
struct NonSemResult {
  Eigen::MatrixXd gamma_non;
  Eigen::MatrixXd gamma_sem;
  double min_eig_gap = 0.0;
};
NonSemResult gamma_non_and_sem(const DrmFit& fit,
                               const std::function<Eigen::VectorXd(double)>& a,
                               int m);

// Everything above bundled for reporting.
struct CovarianceReport {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd gamma_g;
  Eigen::MatrixXd gamma_non;
  Eigen::MatrixXd gamma_sem;
  double min_eig_gap = 0.0;
  PsdDiagnostics lambda_psd, gamma_psd, gamma_g_psd;
};
CovarianceReport covariance_report(const DrmFit& fit, const UFunctional& u,
                                   const SmoothMap& g,
                                   const std::function<Eigen::VectorXd(double)>& a,
                                   int m);

}  // namespace zidrm
