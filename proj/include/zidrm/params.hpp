#pragma once

#include <Eigen/Core>

#include "zidrm/basis.hpp"

namespace zidrm {

// exp arguments above this raise OverflowError instead of silently saturating.
inline constexpr double kLogOmegaMax = 709.0;

// Stable evaluation of log{1 + rho(e^t - 1)}; valid for all finite t.
double log1p_rho_expm1(double rho, double t);

// h(t) = (1 - rho) + rho e^t and the mixing kernels
// h1 = rho e^t / h, h0 = (1 - rho) / h, computed without overflow.
double h_of(double rho, double t);       // throws OverflowError for t > kLogOmegaMax
double h1_of(double rho, double t);      // stable for all finite t
double h0_of(double rho, double t);      // = 1 - h1, computed directly

// Parameter bundle (nu0, nu1, rho, theta) with its basis attached.
// The checked constructor rejects boundary values of nu and rho because the
// variance formulas divide by nu(1-nu) and rho(1-rho).  unchecked() exists
// for descriptive handling of boundary fits (nu_i = 0); those bundles are
// refused by all variance and interval routines upstream.
class ParamBundle {
 public:
  ParamBundle(double nu0, double nu1, double rho, Eigen::VectorXd theta,
              BasisFunction basis);
  static ParamBundle unchecked(double nu0, double nu1, double rho,
                               Eigen::VectorXd theta, BasisFunction basis);

  double nu0() const { return nu0_; }
  double nu1() const { return nu1_; }
  double rho() const { return rho_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  const BasisFunction& basis() const { return basis_; }
  bool boundary() const { return boundary_; }

  // Delta = w(1-nu0) + (1-w)(1-nu1) for a sample fraction w = n0/n.
  double delta(double w) const {
    return w * (1.0 - nu0_) + (1.0 - w) * (1.0 - nu1_);
  }

  double log_omega(double x) const {  // theta'Q(x)
    return theta_.dot(basis_.augmented(x));
  }
  double omega(double x) const;        // exp{theta'Q(x)}, overflow-guarded
  double h(double x) const { return h_of(rho_, log_omega(x)); }
  double h0(double x) const { return h0_of(rho_, log_omega(x)); }
  double h1(double x) const { return h1_of(rho_, log_omega(x)); }

 private:
  ParamBundle(double nu0, double nu1, double rho, Eigen::VectorXd theta,
              BasisFunction basis, bool checked);

  double nu0_, nu1_, rho_;
  Eigen::VectorXd theta_;
  BasisFunction basis_;
  bool boundary_;
};

}  // namespace zidrm
