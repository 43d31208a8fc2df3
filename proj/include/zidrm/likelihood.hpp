#pragma once

#include <Eigen/Core>

#include "zidrm/basis.hpp"
#include "zidrm/data.hpp"
#include "zidrm/params.hpp"

namespace zidrm {

// Value, gradient, and Hessian of a log-likelihood at one point.
struct LikelihoodEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

// Binomial log-likelihood of the zero counts,
//   ell0(nu) = sum_i { n_i0 log nu_i + n_i1 log(1 - nu_i) },
// with analytic gradient and (diagonal) Hessian.  nu must be interior.
LikelihoodEval ell0(const TwoSampleData& data, double nu0, double nu1);

// Dual empirical log-likelihood in theta with rho fixed at
// rho_hat = n11 / (n01 + n11):
//   ell1(theta) = -sum_ij log{1 + rho_hat[omega(x;theta) - 1]}
//                 + sum_j theta'Q(X_1j),
// sums over positive observations only.  Gradient and Hessian are the
// analytic forms; throws OverflowError when theta'Q leaves the exp range.
LikelihoodEval ell1_dual(const TwoSampleData& data, const BasisFunction& basis,
                         const Eigen::VectorXd& theta);

// Blocks of the second-derivative matrix of the expanded function
// H(nu, rho, theta) = ell0(nu) + ell1-with-free-rho(theta), evaluated at an
// arbitrary bundle.  Parameter order throughout: (nu0, nu1, rho, theta).
// The (nu, rho) and (nu, theta) cross blocks vanish identically.
struct HBlocks {
  Eigen::Matrix2d nu_nu;       // diagonal
  double rho_rho = 0.0;        // + sum (omega-1)^2 / h^2
  Eigen::VectorXd theta_rho;   // - sum omega Q / h^2
  Eigen::MatrixXd theta_theta; // - sum h0 h1 Q Q'

  Eigen::MatrixXd assemble() const;  // full symmetric (3 + d + 1) matrix
};

HBlocks h_second_derivatives(const TwoSampleData& data, const ParamBundle& bundle);

// H itself and its first derivatives, used by the finite-difference checks
// and exposed because the score form S_n is meaningful in its own right.
double h_value(const TwoSampleData& data, const ParamBundle& bundle);
Eigen::VectorXd h_gradient(const TwoSampleData& data, const ParamBundle& bundle);

}  // namespace zidrm
