#include "zidrm/params.hpp"

#include <cmath>
#include <utility>

#include "zidrm/errors.hpp"

namespace zidrm {

double log1p_rho_expm1(double rho, double t) {
  // For t <= 0: 1 + rho(e^t - 1) stays in (1-rho, 1].
  if (t <= 0.0) return std::log1p(rho * std::expm1(t));
  // For t > 0 factor out e^t: log = t + log{1 + (1-rho)(e^{-t} - 1)}.
  return t + std::log1p((1.0 - rho) * std::expm1(-t));
}

double h_of(double rho, double t) {
  if (t > kLogOmegaMax) {
    throw OverflowError("exp(theta'Q) exceeded the representable range");
  }
  return (1.0 - rho) + rho * std::exp(t);
}

double h1_of(double rho, double t) {
  if (t <= 0.0) {
    double e = std::exp(t);
    return rho * e / ((1.0 - rho) + rho * e);
  }
  double e = std::exp(-t);
  return rho / (rho + (1.0 - rho) * e);
}

double h0_of(double rho, double t) {
  if (t <= 0.0) {
    double e = std::exp(t);
    return (1.0 - rho) / ((1.0 - rho) + rho * e);
  }
  double e = std::exp(-t);
  return (1.0 - rho) * e / (rho + (1.0 - rho) * e);
}

ParamBundle::ParamBundle(double nu0, double nu1, double rho,
                         Eigen::VectorXd theta, BasisFunction basis,
                         bool checked)
    : nu0_(nu0),
      nu1_(nu1),
      rho_(rho),
      theta_(std::move(theta)),
      basis_(std::move(basis)),
      boundary_(!(nu0 > 0.0 && nu0 < 1.0 && nu1 > 0.0 && nu1 < 1.0)) {
  if (!(rho_ > 0.0 && rho_ < 1.0)) {
    throw DomainError("ParamBundle: rho must lie strictly inside (0,1)");
  }
  if (checked && boundary_) {
    throw DomainError("ParamBundle: nu must lie strictly inside (0,1)");
  }
  if (theta_.size() != basis_.dim() + 1) {
    throw DimensionError("ParamBundle: theta length must equal basis dim + 1");
  }
  for (Eigen::Index i = 0; i < theta_.size(); ++i) {
    if (!std::isfinite(theta_(i))) {
      throw DomainError("ParamBundle: theta must be finite");
    }
  }
}

ParamBundle::ParamBundle(double nu0, double nu1, double rho,
                         Eigen::VectorXd theta, BasisFunction basis)
    : ParamBundle(nu0, nu1, rho, std::move(theta), std::move(basis), true) {}

ParamBundle ParamBundle::unchecked(double nu0, double nu1, double rho,
                                   Eigen::VectorXd theta, BasisFunction basis) {
  return ParamBundle(nu0, nu1, rho, std::move(theta), std::move(basis), false);
}

double ParamBundle::omega(double x) const {
  double t = log_omega(x);
  if (t > kLogOmegaMax) {
    throw OverflowError("exp(theta'Q) exceeded the representable range");
  }
  return std::exp(t);
}

}  // namespace zidrm
