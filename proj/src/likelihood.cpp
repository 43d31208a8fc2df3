#include "zidrm/likelihood.hpp"

#include <cmath>

#include "zidrm/errors.hpp"
#include "zidrm/math.hpp"

namespace zidrm {

namespace {

void check_interior(double nu, const char* name) {
  if (!(nu > 0.0 && nu < 1.0)) {
    throw DomainError(std::string(name) + " must lie strictly inside (0,1)");
  }
}

// Applies fn to every positive observation, sample 0 first then sample 1,
// in stored order.
template <typename Fn>
void for_each_positive(const TwoSampleData& data, Fn&& fn) {
  for (double x : data.pos0) fn(x);
  for (double x : data.pos1) fn(x);
}

}  // namespace

LikelihoodEval ell0(const TwoSampleData& data, double nu0, double nu1) {
  check_interior(nu0, "nu0");
  check_interior(nu1, "nu1");
  const double n00 = data.n00, n01 = data.n01();
  const double n10 = data.n10, n11 = data.n11();

  LikelihoodEval out;
  out.value = n00 * std::log(nu0) + n01 * std::log1p(-nu0) +
              n10 * std::log(nu1) + n11 * std::log1p(-nu1);
  out.gradient.resize(2);
  out.gradient(0) = n00 / nu0 - n01 / (1.0 - nu0);
  out.gradient(1) = n10 / nu1 - n11 / (1.0 - nu1);
  out.hessian = Eigen::MatrixXd::Zero(2, 2);
  out.hessian(0, 0) = -n00 / (nu0 * nu0) - n01 / ((1.0 - nu0) * (1.0 - nu0));
  out.hessian(1, 1) = -n10 / (nu1 * nu1) - n11 / ((1.0 - nu1) * (1.0 - nu1));
  return out;
}

LikelihoodEval ell1_dual(const TwoSampleData& data, const BasisFunction& basis,
                         const Eigen::VectorXd& theta) {
  const int dim = basis.dim() + 1;
  if (theta.size() != dim) {
    throw DimensionError("ell1_dual: theta length must equal basis dim + 1");
  }
  const double rho = data.rho_hat();

  KahanSum value;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);

  for_each_positive(data, [&](double x) {
    Eigen::VectorXd Q = basis.augmented(x);
    double t = theta.dot(Q);
    if (t > kLogOmegaMax) {
      throw OverflowError("ell1_dual: exp(theta'Q) exceeded the representable range");
    }
    value.add(-log1p_rho_expm1(rho, t));
    double h1 = h1_of(rho, t);
    grad.noalias() -= h1 * Q;
    hess.noalias() -= (h0_of(rho, t) * h1) * (Q * Q.transpose());
  });
  for (double x : data.pos1) {
    Eigen::VectorXd Q = basis.augmented(x);
    value.add(theta.dot(Q));
    grad.noalias() += Q;
  }

  LikelihoodEval out;
  out.value = value.value();
  out.gradient = std::move(grad);
  out.hessian = std::move(hess);
  return out;
}

HBlocks h_second_derivatives(const TwoSampleData& data, const ParamBundle& bundle) {
  const double nu0 = bundle.nu0(), nu1 = bundle.nu1(), rho = bundle.rho();
  if (bundle.boundary()) {
    throw DomainError("h_second_derivatives: bundle has boundary nu");
  }
  const int dim = bundle.basis().dim() + 1;

  HBlocks blocks;
  blocks.nu_nu.setZero();
  blocks.nu_nu(0, 0) =
      -data.n00 / (nu0 * nu0) - data.n01() / ((1.0 - nu0) * (1.0 - nu0));
  blocks.nu_nu(1, 1) =
      -data.n10 / (nu1 * nu1) - data.n11() / ((1.0 - nu1) * (1.0 - nu1));
  blocks.theta_rho = Eigen::VectorXd::Zero(dim);
  blocks.theta_theta = Eigen::MatrixXd::Zero(dim, dim);

  const BasisFunction& basis = bundle.basis();
  for_each_positive(data, [&](double x) {
    Eigen::VectorXd Q = basis.augmented(x);
    double t = bundle.theta().dot(Q);
    double h = h_of(rho, t);                    // overflow-guarded
    double em1_over_h = std::expm1(t) / h;      // (omega-1)/h, safe for t <= 709
    double om_over_h = h1_of(rho, t) / rho;     // omega/h, bounded by 1/rho
    blocks.rho_rho += em1_over_h * em1_over_h;
    blocks.theta_rho.noalias() -= (om_over_h / h) * Q;
    blocks.theta_theta.noalias() -=
        (h0_of(rho, t) * h1_of(rho, t)) * (Q * Q.transpose());
  });
  return blocks;
}

Eigen::MatrixXd HBlocks::assemble() const {
  const int dim = static_cast<int>(theta_rho.size());
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(3 + dim, 3 + dim);
  full.topLeftCorner<2, 2>() = nu_nu;
  full(2, 2) = rho_rho;
  full.block(3, 2, dim, 1) = theta_rho;
  full.block(2, 3, 1, dim) = theta_rho.transpose();
  full.bottomRightCorner(dim, dim) = theta_theta;
  return full;
}

double h_value(const TwoSampleData& data, const ParamBundle& bundle) {
  if (bundle.boundary()) throw DomainError("h_value: bundle has boundary nu");
  LikelihoodEval zero_part = ell0(data, bundle.nu0(), bundle.nu1());
  KahanSum value;
  value.add(zero_part.value);
  const BasisFunction& basis = bundle.basis();
  const double rho = bundle.rho();
  for_each_positive(data, [&](double x) {
    double t = bundle.theta().dot(basis.augmented(x));
    if (t > kLogOmegaMax) {
      throw OverflowError("h_value: exp(theta'Q) exceeded the representable range");
    }
    value.add(-log1p_rho_expm1(rho, t));
  });
  for (double x : data.pos1) {
    value.add(bundle.theta().dot(basis.augmented(x)));
  }
  return value.value();
}

Eigen::VectorXd h_gradient(const TwoSampleData& data, const ParamBundle& bundle) {
  if (bundle.boundary()) throw DomainError("h_gradient: bundle has boundary nu");
  const int dim = bundle.basis().dim() + 1;
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(3 + dim);
  LikelihoodEval zero_part = ell0(data, bundle.nu0(), bundle.nu1());
  grad.head<2>() = zero_part.gradient;

  const BasisFunction& basis = bundle.basis();
  const double rho = bundle.rho();
  for_each_positive(data, [&](double x) {
    Eigen::VectorXd Q = basis.augmented(x);
    double t = bundle.theta().dot(Q);
    double h = h_of(rho, t);
    grad(2) -= std::expm1(t) / h;
    grad.tail(dim).noalias() -= h1_of(rho, t) * Q;
  });
  for (double x : data.pos1) {
    grad.tail(dim).noalias() += basis.augmented(x);
  }
  return grad;
}

}  // namespace zidrm
