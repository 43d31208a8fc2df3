#include "zidrm/functionals.hpp"

#include <array>
#include <cmath>

#include "zidrm/errors.hpp"

namespace zidrm {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    throw DomainError(std::string(what) + " must be positive at the evaluation point");
  }
}

double fd_step(double v) { return std::max(1e-6, 1e-6 * std::fabs(v)); }

}  // namespace

UFunctional builtin_u(BuiltinU which, int k) {
  switch (which) {
    case BuiltinU::kMeanPair:
      return builtin_u(BuiltinU::kMomentK, 1);
    case BuiltinU::kMomentK: {
      if (k < 1) throw DomainError("builtin_u: moment order k must be >= 1");
      UFunctional u;
      u.p = 2;
      u.label = "moment_" + std::to_string(k);
      u.value = [k](double x, const ParamBundle& pb) {
        double a = pow_int(x, k);
        Eigen::VectorXd v(2);
        v(0) = (1.0 - pb.nu0()) * a;
        v(1) = (1.0 - pb.nu1()) * a * pb.omega(x);
        return v;
      };
      u.d_nu = [k](double x, const ParamBundle& pb) {
        double a = pow_int(x, k);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
        m(0, 0) = -a;
        m(1, 1) = -a * pb.omega(x);
        return m;
      };
      u.d_theta = [k](double x, const ParamBundle& pb) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, pb.theta().size());
        m.row(1) = (1.0 - pb.nu1()) * pow_int(x, k) * pb.omega(x) *
                   pb.basis().augmented(x).transpose();
        return m;
      };
      return u;
    }
    case BuiltinU::kMeanAndM2:
    case BuiltinU::kMeanAndXLogX: {
      const bool xlogx = which == BuiltinU::kMeanAndXLogX;
      // Second row of each population block: x^2, or x log x.
      auto second = [xlogx](double x) { return xlogx ? x * std::log(x) : x * x; };
      UFunctional u;
      u.p = 4;
      u.label = xlogx ? "mean_and_xlogx" : "mean_and_m2";
      u.value = [second](double x, const ParamBundle& pb) {
        double om = pb.omega(x), s = second(x);
        Eigen::VectorXd v(4);
        v(0) = (1.0 - pb.nu0()) * x;
        v(1) = (1.0 - pb.nu0()) * s;
        v(2) = (1.0 - pb.nu1()) * x * om;
        v(3) = (1.0 - pb.nu1()) * s * om;
        return v;
      };
      u.d_nu = [second](double x, const ParamBundle& pb) {
        double om = pb.omega(x), s = second(x);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, 2);
        m(0, 0) = -x;
        m(1, 0) = -s;
        m(2, 1) = -x * om;
        m(3, 1) = -s * om;
        return m;
      };
      u.d_theta = [second](double x, const ParamBundle& pb) {
        double om = pb.omega(x), s = second(x);
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(4, pb.theta().size());
        Eigen::RowVectorXd qt = pb.basis().augmented(x).transpose();
        m.row(2) = (1.0 - pb.nu1()) * x * om * qt;
        m.row(3) = (1.0 - pb.nu1()) * s * om * qt;
        return m;
      };
      return u;
    }
  }
  throw DomainError("builtin_u: unknown kind");
}

SmoothMap builtin_g(BuiltinG which) {
  SmoothMap g;
  switch (which) {
    case BuiltinG::kRatio:
      g.q = 1;
      g.label = "ratio";
      g.value = [](const Eigen::VectorXd& x) {
        require_positive(x(0), "ratio: x1");
        Eigen::VectorXd v(1);
        v(0) = x(1) / x(0);
        return v;
      };
      g.jacobian = [](const Eigen::VectorXd& x) {
        require_positive(x(0), "ratio: x1");
        Eigen::MatrixXd j(1, 2);
        j(0, 0) = -x(1) / (x(0) * x(0));
        j(0, 1) = 1.0 / x(0);
        return j;
      };
      return g;
    case BuiltinG::kLogRatio:
      g.q = 1;
      g.label = "log_ratio";
      g.value = [](const Eigen::VectorXd& x) {
        require_positive(x(0), "log_ratio: x1");
        require_positive(x(1), "log_ratio: x2");
        Eigen::VectorXd v(1);
        v(0) = std::log(x(1)) - std::log(x(0));
        return v;
      };
      g.jacobian = [](const Eigen::VectorXd& x) {
        require_positive(x(0), "log_ratio: x1");
        require_positive(x(1), "log_ratio: x2");
        Eigen::MatrixXd j(1, 2);
        j(0, 0) = -1.0 / x(0);
        j(0, 1) = 1.0 / x(1);
        return j;
      };
      return g;
    case BuiltinG::kVariancePair:
      g.q = 2;
      g.label = "variance_pair";
      g.value = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(2);
        v(0) = x(1) - x(0) * x(0);
        v(1) = x(3) - x(2) * x(2);
        return v;
      };
      g.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 4);
        j(0, 0) = -2.0 * x(0);
        j(0, 1) = 1.0;
        j(1, 2) = -2.0 * x(2);
        j(1, 3) = 1.0;
        return j;
      };
      return g;
    case BuiltinG::kVarianceDiff:
      g.q = 1;
      g.label = "variance_diff";
      g.value = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v(0) = (x(3) - x(2) * x(2)) - (x(1) - x(0) * x(0));
        return v;
      };
      g.jacobian = [](const Eigen::VectorXd& x) {
        Eigen::MatrixXd j(1, 4);
        j << 2.0 * x(0), -1.0, -2.0 * x(2), 1.0;
        return j;
      };
      return g;
    case BuiltinG::kCvPair:
    case BuiltinG::kCvDiff: {
      const bool diff = which == BuiltinG::kCvDiff;
      auto parts = [](const Eigen::VectorXd& x) {
        require_positive(x(0), "cv: x1");
        require_positive(x(2), "cv: x3");
        double v0 = x(1) - x(0) * x(0);
        double v1 = x(3) - x(2) * x(2);
        if (!(v0 > 0.0) || !(v1 > 0.0)) {
          throw DomainError("cv: plug-in variance is not positive");
        }
        return std::array<double, 4>{std::sqrt(v0), x(0), std::sqrt(v1), x(2)};
      };
      g.q = diff ? 1 : 2;
      g.label = diff ? "cv_diff" : "cv_pair";
      g.value = [parts, diff](const Eigen::VectorXd& x) {
        auto [s0, m0, s1, m1] = parts(x);
        if (diff) {
          Eigen::VectorXd v(1);
          v(0) = s1 / m1 - s0 / m0;
          return v;
        }
        Eigen::VectorXd v(2);
        v(0) = s0 / m0;
        v(1) = s1 / m1;
        return v;
      };
      g.jacobian = [parts, diff](const Eigen::VectorXd& x) {
        auto [s0, m0, s1, m1] = parts(x);
        Eigen::RowVector4d r0{-x(1) / (s0 * m0 * m0), 1.0 / (2.0 * s0 * m0), 0.0, 0.0};
        Eigen::RowVector4d r1{0.0, 0.0, -x(3) / (s1 * m1 * m1), 1.0 / (2.0 * s1 * m1)};
        if (diff) {
          Eigen::MatrixXd j(1, 4);
          j = r1 - r0;
          return j;
        }
        Eigen::MatrixXd j(2, 4);
        j.row(0) = r0;
        j.row(1) = r1;
        return j;
      };
      return g;
    }
    case BuiltinG::kGe1Pair:
    case BuiltinG::kGe1Diff: {
      const bool diff = which == BuiltinG::kGe1Diff;
      g.q = diff ? 1 : 2;
      g.label = diff ? "ge1_diff" : "ge1_pair";
      g.value = [diff](const Eigen::VectorXd& x) {
        require_positive(x(0), "ge1: x1");
        require_positive(x(2), "ge1: x3");
        double e0 = x(1) / x(0) - std::log(x(0));
        double e1 = x(3) / x(2) - std::log(x(2));
        if (diff) {
          Eigen::VectorXd v(1);
          v(0) = e1 - e0;
          return v;
        }
        Eigen::VectorXd v(2);
        v(0) = e0;
        v(1) = e1;
        return v;
      };
      g.jacobian = [diff](const Eigen::VectorXd& x) {
        require_positive(x(0), "ge1: x1");
        require_positive(x(2), "ge1: x3");
        Eigen::RowVector4d r0{-x(1) / (x(0) * x(0)) - 1.0 / x(0), 1.0 / x(0), 0.0, 0.0};
        Eigen::RowVector4d r1{0.0, 0.0, -x(3) / (x(2) * x(2)) - 1.0 / x(2), 1.0 / x(2)};
        if (diff) {
          Eigen::MatrixXd j(1, 4);
          j = r1 - r0;
          return j;
        }
        Eigen::MatrixXd j(2, 4);
        j.row(0) = r0;
        j.row(1) = r1;
        return j;
      };
      return g;
    }
  }
  throw DomainError("builtin_g: unknown kind");
}

UFunctional functional_pair_u(std::function<Eigen::VectorXd(double)> a, int m,
                              std::string label) {
  if (m < 1) throw DimensionError("functional_pair_u: m must be >= 1");
  UFunctional u;
  u.p = 2 * m;
  u.label = std::move(label);
  u.value = [a, m](double x, const ParamBundle& pb) {
    Eigen::VectorXd ax = a(x);
    if (ax.size() != m) throw DimensionError("functional_pair_u: a(x) has wrong length");
    Eigen::VectorXd v(2 * m);
    v.head(m) = (1.0 - pb.nu0()) * ax;
    v.tail(m) = (1.0 - pb.nu1()) * pb.omega(x) * ax;
    return v;
  };
  u.d_nu = [a, m](double x, const ParamBundle& pb) {
    Eigen::VectorXd ax = a(x);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * m, 2);
    d.col(0).head(m) = -ax;
    d.col(1).tail(m) = -pb.omega(x) * ax;
    return d;
  };
  u.d_theta = [a, m](double x, const ParamBundle& pb) {
    Eigen::VectorXd ax = a(x);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2 * m, pb.theta().size());
    d.bottomRows(m) = (1.0 - pb.nu1()) * pb.omega(x) * ax *
                      pb.basis().augmented(x).transpose();
    return d;
  };
  return u;
}

UFunctional custom_u(int p,
                     std::function<Eigen::VectorXd(double, const ParamBundle&)> value,
                     std::string label) {
  if (p < 1) throw DimensionError("custom_u: p must be >= 1");
  UFunctional u;
  u.p = p;
  u.label = std::move(label);
  u.value = value;

  auto with_nu = [](const ParamBundle& pb, double nu0, double nu1) {
    return ParamBundle::unchecked(nu0, nu1, pb.rho(), pb.theta(), pb.basis());
  };
  u.d_nu = [value, p, with_nu](double x, const ParamBundle& pb) {
    Eigen::MatrixXd d(p, 2);
    {
      double h = fd_step(pb.nu0());
      d.col(0) = (value(x, with_nu(pb, pb.nu0() + h, pb.nu1())) -
                  value(x, with_nu(pb, pb.nu0() - h, pb.nu1()))) /
                 (2.0 * h);
    }
    {
      double h = fd_step(pb.nu1());
      d.col(1) = (value(x, with_nu(pb, pb.nu0(), pb.nu1() + h)) -
                  value(x, with_nu(pb, pb.nu0(), pb.nu1() - h))) /
                 (2.0 * h);
    }
    return d;
  };
  u.d_theta = [value, p](double x, const ParamBundle& pb) {
    Eigen::MatrixXd d(p, pb.theta().size());
    for (Eigen::Index j = 0; j < pb.theta().size(); ++j) {
      double h = fd_step(pb.theta()(j));
      Eigen::VectorXd up = pb.theta(), dn = pb.theta();
      up(j) += h;
      dn(j) -= h;
      ParamBundle bu =
          ParamBundle::unchecked(pb.nu0(), pb.nu1(), pb.rho(), up, pb.basis());
      ParamBundle bd =
          ParamBundle::unchecked(pb.nu0(), pb.nu1(), pb.rho(), dn, pb.basis());
      d.col(j) = (value(x, bu) - value(x, bd)) / (2.0 * h);
    }
    return d;
  };
  return u;
}

SmoothMap custom_g(int q, std::function<Eigen::VectorXd(const Eigen::VectorXd&)> value,
                   std::string label) {
  if (q < 1) throw DimensionError("custom_g: q must be >= 1");
  SmoothMap g;
  g.q = q;
  g.label = std::move(label);
  g.value = value;
  g.jacobian = [value, q](const Eigen::VectorXd& x) {
    Eigen::MatrixXd j(q, x.size());
    for (Eigen::Index c = 0; c < x.size(); ++c) {
      double h = fd_step(x(c));
      Eigen::VectorXd up = x, dn = x;
      up(c) += h;
      dn(c) -= h;
      j.col(c) = (value(up) - value(dn)) / (2.0 * h);
    }
    return j;
  };
  return g;
}

Eigen::VectorXd psi_hat(const DrmFit& fit, const UFunctional& u) {
  if (!fit.diagnostics.converged) {
    throw DomainError("psi_hat: fit did not converge");
  }
  ParamBundle pb = fit.bundle();
  Eigen::VectorXd total = Eigen::VectorXd::Zero(u.p);
  auto accumulate = [&](const std::vector<double>& xs,
                        const std::vector<double>& ws) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      Eigen::VectorXd v = u.value(xs[j], pb);
      if (v.size() != u.p) {
        throw DimensionError("psi_hat: u.value length differs from u.p");
      }
      total.noalias() += ws[j] * v;
    }
  };
  accumulate(fit.data.pos0, fit.weights0);
  accumulate(fit.data.pos1, fit.weights1);
  return total;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> estimate(const DrmFit& fit,
                                                     const UFunctional& u,
                                                     const SmoothMap& g) {
  Eigen::VectorXd psi = psi_hat(fit, u);
  Eigen::VectorXd mapped = g.value(psi);
  if (mapped.size() != g.q) {
    throw DimensionError("estimate: g.value length differs from g.q");
  }
  return {std::move(psi), std::move(mapped)};
}

UFunctional u_by_name(const std::string& name, int k) {
  if (name == "moment_k") return builtin_u(BuiltinU::kMomentK, k);
  if (name == "mean_pair") return builtin_u(BuiltinU::kMeanPair);
  if (name == "mean_and_m2") return builtin_u(BuiltinU::kMeanAndM2);
  if (name == "mean_and_xlogx") return builtin_u(BuiltinU::kMeanAndXLogX);
  throw DomainError("unknown functional '" + name + "'");
}

SmoothMap g_by_name(const std::string& name) {
  if (name == "ratio") return builtin_g(BuiltinG::kRatio);
  if (name == "log_ratio") return builtin_g(BuiltinG::kLogRatio);
  if (name == "variance_pair") return builtin_g(BuiltinG::kVariancePair);
  if (name == "variance_diff") return builtin_g(BuiltinG::kVarianceDiff);
  if (name == "cv_pair") return builtin_g(BuiltinG::kCvPair);
  if (name == "cv_diff") return builtin_g(BuiltinG::kCvDiff);
  if (name == "ge1_pair") return builtin_g(BuiltinG::kGe1Pair);
  if (name == "ge1_diff") return builtin_g(BuiltinG::kGe1Diff);
  throw DomainError("unknown map '" + name + "'");
}

}  // namespace zidrm
