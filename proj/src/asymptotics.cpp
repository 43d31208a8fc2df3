#include "zidrm/asymptotics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "zidrm/errors.hpp"

namespace zidrm {

namespace {

void require_clean(const DrmFit& fit, const char* where) {
  if (!fit.diagnostics.converged) {
    throw DomainError(std::string(where) + ": fit did not converge");
  }
  if (fit.diagnostics.boundary_nu) {
    throw DomainError(std::string(where) +
                      ": fit has boundary nu, variance formulas are undefined");
  }
}

// Cached per-observation quantities shared by every plug-in sum below.
struct PointCache {
  std::vector<double> x, p, omega, h, h1;
  std::vector<Eigen::VectorXd> Q;
};

PointCache cache_points(const DrmFit& fit) {
  PointCache c;
  auto add = [&](const std::vector<double>& xs, const std::vector<double>& ws) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      double t = fit.theta.dot(fit.basis.augmented(xs[j]));
      c.x.push_back(xs[j]);
      c.p.push_back(ws[j]);
      c.omega.push_back(std::exp(t));
      c.h.push_back(h_of(fit.rho, t));
      c.h1.push_back(h1_of(fit.rho, t));
      c.Q.push_back(fit.basis.augmented(xs[j]));
    }
  };
  add(fit.data.pos0, fit.weights0);
  add(fit.data.pos1, fit.weights1);
  return c;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Inverse through the spectral decomposition, with a condition-number gate.
Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kSingularConditionNumber) {
    throw SingularMatrixError(std::string(what) +
                              " is numerically singular (condition number > 1e12)");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::Vector2d w_vector(const DrmFit& fit) {
  return {1.0 / (1.0 - fit.nu0), -1.0 / (1.0 - fit.nu1)};
}

}  // namespace

PsdDiagnostics psd_check(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
  PsdDiagnostics d;
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  d.psd = d.min_eigenvalue >= -tol;
  return d;
}

Eigen::VectorXd empirical_e0(const DrmFit& fit,
                             const std::function<Eigen::VectorXd(double)>& f) {
  Eigen::VectorXd total;
  auto add = [&](const std::vector<double>& xs, const std::vector<double>& ws) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      Eigen::VectorXd v = f(xs[j]);
      if (!v.allFinite()) {
        throw DomainError("empirical_e0: f returned a non-finite value");
      }
      if (total.size() == 0) total = Eigen::VectorXd::Zero(v.size());
      total.noalias() += ws[j] * v;
    }
  };
  add(fit.data.pos0, fit.weights0);
  add(fit.data.pos1, fit.weights1);
  return total;
}

double empirical_e0_scalar(const DrmFit& fit,
                           const std::function<double(double)>& f) {
  Eigen::VectorXd v = empirical_e0(fit, [&](double x) {
    Eigen::VectorXd out(1);
    out(0) = f(x);
    return out;
  });
  return v(0);
}

Eigen::MatrixXd a_theta_hat(const DrmFit& fit) {
  require_clean(fit, "a_theta_hat");
  PointCache c = cache_points(fit);
  const int dim = fit.basis.dim() + 1;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    acc.noalias() += (c.p[j] * c.h1[j]) * (c.Q[j] * c.Q[j].transpose());
  }
  return fit.delta_hat() * (1.0 - fit.rho) * acc;
}

Eigen::MatrixXd lambda_hat(const DrmFit& fit) {
  require_clean(fit, "lambda_hat");
  const int dim = fit.basis.dim() + 1;
  const double w = fit.w(), rho = fit.rho, delta = fit.delta_hat();

  Eigen::MatrixXd a_theta = a_theta_hat(fit);
  Eigen::MatrixXd a_theta_inv = guarded_inverse(a_theta, "A_theta");

  Eigen::Vector2d a_nu_inv{fit.nu0 * (1.0 - fit.nu0) / w,
                           fit.nu1 * (1.0 - fit.nu1) / (1.0 - w)};
  Eigen::Vector2d wv = w_vector(fit);

  Eigen::MatrixXd lambda = Eigen::MatrixXd::Zero(3 + dim, 3 + dim);
  lambda(0, 0) = a_nu_inv(0);
  lambda(1, 1) = a_nu_inv(1);
  Eigen::Vector2d cross = rho * (1.0 - rho) * a_nu_inv.cwiseProduct(wv);
  lambda.block<2, 1>(0, 2) = cross;
  lambda.block<1, 2>(2, 0) = cross.transpose();
  lambda(2, 2) =
      rho * (1.0 - rho) * (rho * fit.nu0 + (1.0 - rho) * fit.nu1) / delta;

  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e(0) = 1.0;
  lambda.bottomRightCorner(dim, dim) =
      a_theta_inv - (e * e.transpose()) / (delta * rho * (1.0 - rho));
  return lambda;
}

Eigen::MatrixXd b_hat(const DrmFit& fit) {
  require_clean(fit, "b_hat");
  const int dim = fit.basis.dim() + 1;
  const double w = fit.w(), rho = fit.rho, delta = fit.delta_hat();
  const double s = 1.0 / w + 1.0 / (1.0 - w);

  PointCache c = cache_points(fit);
  double a_rho_acc = 0.0;
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    double em1 = c.omega[j] - 1.0;
    a_rho_acc += c.p[j] * em1 * em1 / c.h[j];
  }
  double a_rho = delta * a_rho_acc;

  Eigen::MatrixXd a_theta = a_theta_hat(fit);
  Eigen::Vector2d a_nu{w / (fit.nu0 * (1.0 - fit.nu0)),
                       (1.0 - w) / (fit.nu1 * (1.0 - fit.nu1))};
  Eigen::Vector2d wv = w_vector(fit);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  e(0) = 1.0;
  Eigen::VectorXd a_theta_e = a_theta * e;

  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3 + dim, 3 + dim);
  b(0, 0) = a_nu(0);
  b(1, 1) = a_nu(1);
  b(2, 2) = a_rho - s * std::pow(rho * (1.0 - rho) * a_rho, 2);
  b.bottomRightCorner(dim, dim) =
      a_theta - s * (a_theta_e * a_theta_e.transpose());
  Eigen::Vector2d b12 = -rho * (1.0 - rho) * a_rho * wv;
  b.block<2, 1>(0, 2) = b12;
  b.block<1, 2>(2, 0) = b12.transpose();
  Eigen::MatrixXd b13 = wv * a_theta_e.transpose();  // 2 x (d+1)
  b.block(0, 3, 2, dim) = b13;
  b.block(3, 0, dim, 2) = b13.transpose();
  Eigen::RowVectorXd b23 =
      s * rho * (1.0 - rho) * a_rho * a_theta_e.transpose();
  b.block(2, 3, 1, dim) = b23;
  b.block(3, 2, dim, 1) = b23.transpose();
  return b;
}

MMatrices m_matrices(const DrmFit& fit, const UFunctional& u) {
  require_clean(fit, "m_matrices");
  ParamBundle pb = fit.bundle();
  const int dim = fit.basis.dim() + 1;

  MMatrices out;
  out.m1 = Eigen::MatrixXd::Zero(u.p, 2);
  out.m2 = Eigen::VectorXd::Zero(u.p);
  out.m3 = Eigen::MatrixXd::Zero(u.p, dim);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(u.p);

  PointCache c = cache_points(fit);
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    Eigen::VectorXd uv = u.value(c.x[j], pb);
    Eigen::MatrixXd dnu = u.d_nu(c.x[j], pb);
    Eigen::MatrixXd dth = u.d_theta(c.x[j], pb);
    if (uv.size() != u.p || dnu.rows() != u.p || dnu.cols() != 2 ||
        dth.rows() != u.p || dth.cols() != dim) {
      throw DimensionError("m_matrices: functional derivative shapes are inconsistent");
    }
    psi.noalias() += c.p[j] * uv;
    out.m1.noalias() += c.p[j] * dnu;
    out.m2.noalias() += c.p[j] * dth.col(0);  // (du/dtheta) e = du/dalpha
    out.m3.noalias() += c.p[j] * (dth - c.h1[j] * uv * c.Q[j].transpose());
  }
  out.m2.noalias() -= fit.rho * psi;
  return out;
}

Eigen::MatrixXd gamma_hat(const DrmFit& fit, const UFunctional& u) {
  require_clean(fit, "gamma_hat");
  ParamBundle pb = fit.bundle();
  const double w = fit.w(), rho = fit.rho, delta = fit.delta_hat();

  Eigen::MatrixXd uu_over_h = Eigen::MatrixXd::Zero(u.p, u.p);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(u.p);
  PointCache c = cache_points(fit);
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    Eigen::VectorXd uv = u.value(c.x[j], pb);
    psi.noalias() += c.p[j] * uv;
    uu_over_h.noalias() += (c.p[j] / c.h[j]) * (uv * uv.transpose());
  }

  MMatrices m = m_matrices(fit, u);
  Eigen::Vector2d a_nu_inv{fit.nu0 * (1.0 - fit.nu0) / w,
                           fit.nu1 * (1.0 - fit.nu1) / (1.0 - w)};
  Eigen::MatrixXd a_theta_inv = guarded_inverse(a_theta_hat(fit), "A_theta");

  Eigen::MatrixXd gamma = uu_over_h / delta;
  gamma.noalias() -= (psi * psi.transpose()) / delta;
  gamma.noalias() += m.m1 * a_nu_inv.asDiagonal() * m.m1.transpose();
  gamma.noalias() -=
      (m.m2 * m.m2.transpose()) / (delta * rho * (1.0 - rho));
  gamma.noalias() += m.m3 * a_theta_inv * m.m3.transpose();
  return symmetrized(gamma);
}

Eigen::MatrixXd gamma_g_hat(const DrmFit& fit, const UFunctional& u,
                            const SmoothMap& g) {
  Eigen::MatrixXd gamma = gamma_hat(fit, u);
  Eigen::VectorXd psi = psi_hat(fit, u);
  Eigen::MatrixXd jac = g.jacobian(psi);
  if (jac.rows() != g.q || jac.cols() != u.p) {
    throw DimensionError("gamma_g_hat: jacobian shape differs from (q, p)");
  }
  return symmetrized(jac * gamma * jac.transpose());
}

NonSemResult gamma_non_and_sem(const DrmFit& fit,
                               const std::function<Eigen::VectorXd(double)>& a,
                               int m) {
  require_clean(fit, "gamma_non_and_sem");
  const double w = fit.w(), rho = fit.rho, delta = fit.delta_hat();
  const int dim = fit.basis.dim() + 1;

  PointCache c = cache_points(fit);
  Eigen::VectorXd psi0 = Eigen::VectorXd::Zero(m), psi1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd aa0 = Eigen::MatrixXd::Zero(m, m), aa1 = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd h1_a_qt = Eigen::MatrixXd::Zero(m, dim);
  std::vector<Eigen::VectorXd> ax(c.x.size());
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    ax[j] = a(c.x[j]);
    if (ax[j].size() != m) {
      throw DimensionError("gamma_non_and_sem: a(x) has wrong length");
    }
    psi0.noalias() += c.p[j] * ax[j];
    psi1.noalias() += (c.p[j] * c.omega[j]) * ax[j];
    aa0.noalias() += c.p[j] * (ax[j] * ax[j].transpose());
    aa1.noalias() += (c.p[j] * c.omega[j]) * (ax[j] * ax[j].transpose());
    h1_a_qt.noalias() += (c.p[j] * c.h1[j]) * (ax[j] * c.Q[j].transpose());
  }
  psi0 *= (1.0 - fit.nu0);
  psi1 *= (1.0 - fit.nu1);

  // V_i from the plug-in F_i moments; a(0) = 0 so zeros contribute nothing
  // to the integrals.
  Eigen::MatrixXd v0 = (1.0 - fit.nu0) * aa0 - psi0 * psi0.transpose();
  Eigen::MatrixXd v1 = (1.0 - fit.nu1) * aa1 - psi1 * psi1.transpose();

  NonSemResult out;
  out.gamma_non = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  out.gamma_non.topLeftCorner(m, m) = v0 / w;
  out.gamma_non.bottomRightCorner(m, m) = v1 / (1.0 - w);

  Eigen::MatrixXd a_theta_inv = guarded_inverse(a_theta_hat(fit), "A_theta");
  Eigen::MatrixXd proj = delta * (1.0 - rho) * h1_a_qt * a_theta_inv;  // m x dim

  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t j = 0; j < c.x.size(); ++j) {
    Eigen::VectorXd d = ax[j] - proj * c.Q[j];
    k.noalias() += (c.p[j] * c.h1[j]) * (d * d.transpose());
  }

  double scale = delta * (1.0 - rho);
  Eigen::MatrixXd correction(2 * m, 2 * m);
  correction.topLeftCorner(m, m) = scale / (w * w) * k;
  correction.topRightCorner(m, m) = -scale / (w * (1.0 - w)) * k;
  correction.bottomLeftCorner(m, m) = correction.topRightCorner(m, m);
  correction.bottomRightCorner(m, m) = scale / ((1.0 - w) * (1.0 - w)) * k;

  out.gamma_sem = symmetrized(out.gamma_non - correction);
  out.min_eig_gap = psd_check(correction, 0.0).min_eigenvalue;
  return out;
}

CovarianceReport covariance_report(const DrmFit& fit, const UFunctional& u,
                                   const SmoothMap& g,
                                   const std::function<Eigen::VectorXd(double)>& a,
                                   int m) {
  CovarianceReport rep;
  rep.lambda = lambda_hat(fit);
  rep.gamma = gamma_hat(fit, u);
  rep.gamma_g = gamma_g_hat(fit, u, g);
  NonSemResult ns = gamma_non_and_sem(fit, a, m);
  rep.gamma_non = std::move(ns.gamma_non);
  rep.gamma_sem = std::move(ns.gamma_sem);
  rep.min_eig_gap = ns.min_eig_gap;
  rep.lambda_psd = psd_check(rep.lambda);
  rep.gamma_psd = psd_check(rep.gamma);
  rep.gamma_g_psd = psd_check(rep.gamma_g);
  return rep;
}

}  // namespace zidrm
