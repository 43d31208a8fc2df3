#include <doctest.h>

#include <Eigen/LU>
#include <cmath>

#include "support.hpp"
#include "zidrm/asymptotics.hpp"
#include "zidrm/errors.hpp"

using namespace zidrm;
using namespace zidrm::test;

namespace {

Eigen::VectorXd a_identity(double x) {
  Eigen::VectorXd v(1);
  v(0) = x;
  return v;
}

// Plain-loop plug-in expectation, independent of the library path.
template <typename Fn>
double direct_e0(const DrmFit& f, Fn&& fn) {
  double total = 0.0;
  for (std::size_t j = 0; j < f.data.pos0.size(); ++j)
    total += f.weights0[j] * fn(f.data.pos0[j]);
  for (std::size_t j = 0; j < f.data.pos1.size(); ++j)
    total += f.weights1[j] * fn(f.data.pos1[j]);
  return total;
}

double omega_at(const DrmFit& f, double x) {
  return std::exp(f.theta.dot(f.basis.augmented(x)));
}

double h1_at(const DrmFit& f, double x) {
  double om = omega_at(f, x);
  return f.rho * om / (1.0 - f.rho + f.rho * om);
}

}  // namespace

TEST_SUITE("asymptotics") {

TEST_CASE("plug-in expectations of the constraint functions") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  CHECK(empirical_e0_scalar(f, [](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(empirical_e0_scalar(f, [&](double x) { return omega_at(f, x); }) ==
        doctest::Approx(1.0).epsilon(1e-10));
  // E0_hat{log x} against the frozen oracle sum.
  CHECK(empirical_e0_scalar(f, [](double x) { return std::log(x); }) ==
        doctest::Approx(kSixPointE0LogX).epsilon(1e-9));
  CHECK_THROWS_AS(empirical_e0_scalar(
                      f, [](double) { return std::nan(""); }),
                  DomainError);
}

TEST_CASE("lambda_hat blocks") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  Eigen::MatrixXd lambda = lambda_hat(f);
  REQUIRE(lambda.rows() == 5);

  double w = f.w();
  CHECK(lambda(0, 0) == doctest::Approx(f.nu0 * (1 - f.nu0) / w).epsilon(1e-12));
  CHECK(lambda(1, 1) ==
        doctest::Approx(f.nu1 * (1 - f.nu1) / (1 - w)).epsilon(1e-12));
  CHECK(lambda(0, 1) == 0.0);

  // (nu, theta) and (rho, theta) blocks vanish exactly.
  CHECK(lambda.block(0, 3, 3, 2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lambda.block(3, 0, 2, 3).cwiseAbs().maxCoeff() == 0.0);

  CHECK(rel_close(lambda, Eigen::MatrixXd(lambda.transpose()), 1e-10));
  CHECK(psd_check(lambda).psd);

  // (rho,rho) entry per the closed form.
  double expect = f.rho * (1 - f.rho) *
                  (f.rho * f.nu0 + (1 - f.rho) * f.nu1) / f.delta_hat();
  CHECK(lambda(2, 2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("lambda_hat equals the sandwich of the score and curvature plug-ins") {
  // Assemble A_hat from its lemma building blocks with plain loops and
  // check Lambda = A^{-1} B A^{-1} numerically.
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  for (int i = 0; i < 5; ++i) {
    TwoSampleData d = random_dataset(888, i);
    DrmFit f = fit(d, basis);
    double w = f.w(), rho = f.rho, delta = f.delta_hat();

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
    a(0, 0) = w / (f.nu0 * (1 - f.nu0));
    a(1, 1) = (1 - w) / (f.nu1 * (1 - f.nu1));
    double a_rho = delta * direct_e0(f, [&](double x) {
      double om = omega_at(f, x);
      double h = 1 - rho + rho * om;
      return (om - 1) * (om - 1) / h;
    });
    a(2, 2) = -a_rho;
    Eigen::MatrixXd a_theta = Eigen::MatrixXd::Zero(2, 2);
    Eigen::VectorXd a_theta_rho = Eigen::VectorXd::Zero(2);
    auto walk = [&](const std::vector<double>& xs, const std::vector<double>& ws) {
      for (std::size_t j = 0; j < xs.size(); ++j) {
        Eigen::VectorXd q = basis.augmented(xs[j]);
        double om = omega_at(f, xs[j]);
        double h = 1 - rho + rho * om;
        a_theta += ws[j] * delta * (1 - rho) * (rho * om / h) * q * q.transpose();
        a_theta_rho += ws[j] * delta * (om / h) * q;
      }
    };
    walk(d.pos0, f.weights0);
    walk(d.pos1, f.weights1);
    a.block<2, 1>(3, 2) = a_theta_rho;
    a.block<1, 2>(2, 3) = a_theta_rho.transpose();
    a.bottomRightCorner(2, 2) = a_theta;

    Eigen::MatrixXd sandwich = a.inverse() * b_hat(f) * a.inverse();
    CHECK(rel_close(lambda_hat(f), sandwich, 1e-8));
  }
}

TEST_CASE("m-matrices of a constant functional") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  Eigen::VectorXd c(1);
  c << 3.0;
  UFunctional u;
  u.p = 1;
  u.label = "const";
  u.value = [c](double, const ParamBundle&) { return c; };
  u.d_nu = [](double, const ParamBundle&) {
    return Eigen::MatrixXd::Zero(1, 2).eval();
  };
  u.d_theta = [](double, const ParamBundle& pb) {
    return Eigen::MatrixXd::Zero(1, pb.theta().size()).eval();
  };
  MMatrices m = m_matrices(f, u);
  CHECK(m.m1.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.m2(0) == doctest::Approx(-f.rho * 3.0).epsilon(1e-12));
  // M3 = -c E0{h1 Q'}.
  Eigen::RowVector2d expected;
  expected(0) = -3.0 * direct_e0(f, [&](double x) { return h1_at(f, x); });
  expected(1) = -3.0 * direct_e0(f, [&](double x) {
    return h1_at(f, x) * std::log(x);
  });
  CHECK(rel_close(m.m3, Eigen::MatrixXd(expected), 1e-12));
}

TEST_CASE("m-matrices hand check on symmetric data") {
  TwoSampleData d = symmetric_data();
  DrmFit f = fit(d, BasisFunction::make(BasisKind::kLog));
  REQUIRE(f.theta.lpNorm<Eigen::Infinity>() <= 1e-10);  // omega == 1
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  Eigen::VectorXd psi = psi_hat(f, u);
  double mbar = direct_e0(f, [](double x) { return x; });
  MMatrices m = m_matrices(f, u);
  CHECK(m.m2(0) == doctest::Approx(-f.rho * psi(0)).epsilon(1e-10));
  CHECK(m.m2(1) ==
        doctest::Approx((1 - f.nu1) * mbar - f.rho * psi(1)).epsilon(1e-10));
  // M1 is the diagonal of scaled means.
  CHECK(m.m1(0, 0) == doctest::Approx(-mbar).epsilon(1e-10));
  CHECK(m.m1(1, 1) == doctest::Approx(-mbar).epsilon(1e-10));
  CHECK(m.m1(0, 1) == 0.0);
  CHECK(m.m1(1, 0) == 0.0);
}

TEST_CASE("m3 is insensitive to replacing d_theta by finite differences") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional exact = builtin_u(BuiltinU::kMeanPair);
  UFunctional fd = custom_u(2, exact.value, "fd");
  MMatrices a = m_matrices(f, exact);
  MMatrices b = m_matrices(f, fd);
  CHECK(rel_close(a.m3, b.m3, 1e-5));
  CHECK(rel_close(a.m1, b.m1, 1e-5));
}

TEST_CASE("gamma_hat of the unit functional collapses to zero") {
  // sum p * 1 == 1 identically, so the plug-in variance must cancel to
  // rounding error across its five terms.
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  UFunctional u;
  u.p = 1;
  u.label = "one";
  u.value = [](double, const ParamBundle&) {
    return Eigen::VectorXd::Ones(1).eval();
  };
  u.d_nu = [](double, const ParamBundle&) {
    return Eigen::MatrixXd::Zero(1, 2).eval();
  };
  u.d_theta = [](double, const ParamBundle& pb) {
    return Eigen::MatrixXd::Zero(1, pb.theta().size()).eval();
  };
  for (int i = 0; i < 5; ++i) {
    DrmFit f = fit(random_dataset(311, i), basis);
    CHECK(std::fabs(gamma_hat(f, u)(0, 0)) <= 1e-10);
  }
  DrmFit f6 = fit(six_point_data(), basis);
  CHECK(std::fabs(gamma_hat(f6, u)(0, 0)) <= 1e-12);
}

TEST_CASE("gamma_hat is symmetric and PSD on random fits") {
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  UFunctional u = builtin_u(BuiltinU::kMeanAndM2);
  for (int i = 0; i < 10; ++i) {
    DrmFit f = fit(random_dataset(977, i), basis);
    Eigen::MatrixXd g = gamma_hat(f, u);
    CHECK(rel_close(g, Eigen::MatrixXd(g.transpose()), 1e-10));
    CHECK(psd_check(g).min_eigenvalue >= -1e-8);
  }
}

TEST_CASE("delta-method map variances") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  Eigen::MatrixXd gamma = gamma_hat(f, u);
  Eigen::VectorXd psi = psi_hat(f, u);

  // Identity map returns gamma itself.
  SmoothMap ident = custom_g(
      2, [](const Eigen::VectorXd& x) { return x; }, "identity");
  SmoothMap ident_exact = ident;
  ident_exact.jacobian = [](const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Identity(x.size(), x.size()).eval();
  };
  CHECK(rel_close(gamma_g_hat(f, u, ident_exact), gamma, 1e-12));

  // Ratio: quadratic form with v = (-mu1/mu0^2, 1/mu0).
  Eigen::Vector2d v(-psi(1) / (psi(0) * psi(0)), 1.0 / psi(0));
  double expect = v.transpose() * gamma * v;
  double got = gamma_g_hat(f, u, builtin_g(BuiltinG::kRatio))(0, 0);
  CHECK(got == doctest::Approx(expect).epsilon(1e-12));

  // Exact delta-method identity between the two ratio scales.
  double lr = gamma_g_hat(f, u, builtin_g(BuiltinG::kLogRatio))(0, 0);
  double delta = psi(1) / psi(0);
  CHECK(rel_close(lr, got / (delta * delta), 1e-10));
}

TEST_CASE("a inside the tilt span makes the efficiency gap vanish") {
  // a(x) = 2 + 3 log x is a linear combination of Q(x) = (1, log x), so the
  // projection residual d(x) is identically zero.
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  auto a = [](double x) {
    Eigen::VectorXd v(1);
    v(0) = 2.0 + 3.0 * std::log(x);
    return v;
  };
  NonSemResult r = gamma_non_and_sem(f, a, 1);
  CHECK(rel_close(r.gamma_sem, r.gamma_non, 1e-10));
  CHECK(std::fabs(r.min_eig_gap) <= 1e-10);
}

TEST_CASE("efficiency gap is nonnegative on random datasets") {
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  for (int i = 0; i < 20; ++i) {
    DrmFit f = fit(random_dataset(1234, i), basis);
    NonSemResult r = gamma_non_and_sem(f, a_identity, 1);
    CHECK(r.min_eig_gap >= -1e-8);
    CHECK(psd_check(r.gamma_non).min_eigenvalue >= -1e-8);
  }
}

TEST_CASE("general gamma and the stacked-pair covariance coincide for a(x)=x") {
  // Two independent constructions of the same asymptotic covariance.
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  for (int i = 0; i < 10; ++i) {
    DrmFit f = fit(random_dataset(4321, i), basis);
    Eigen::MatrixXd direct = gamma_hat(f, builtin_u(BuiltinU::kMeanPair));
    NonSemResult r = gamma_non_and_sem(f, a_identity, 1);
    CHECK(rel_close(direct, r.gamma_sem, 1e-8));
  }
  // Same agreement under the two-dimensional basis.
  BasisFunction both = BasisFunction::make(BasisKind::kLogAndIdentity);
  for (int i = 0; i < 5; ++i) {
    DrmFit f = fit(random_dataset(8765, i, 80, 90), both);
    Eigen::MatrixXd direct = gamma_hat(f, builtin_u(BuiltinU::kMeanPair));
    NonSemResult r = gamma_non_and_sem(f, a_identity, 1);
    CHECK(rel_close(direct, r.gamma_sem, 1e-8));
  }
}

TEST_CASE("plug-ins are invariant to observation reordering") {
  TwoSampleData d = six_point_data();
  TwoSampleData shuffled = d;
  std::swap(shuffled.pos0[0], shuffled.pos0[2]);
  std::swap(shuffled.pos1[0], shuffled.pos1[1]);
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  DrmFit f1 = fit(d, basis), f2 = fit(shuffled, basis);
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  CHECK(rel_close(gamma_hat(f1, u), gamma_hat(f2, u), 1e-9));
  CHECK(rel_close(lambda_hat(f1), lambda_hat(f2), 1e-9));
}

TEST_CASE("duplicating every observation leaves the per-root-n covariances fixed") {
  TwoSampleData d = six_point_data();
  TwoSampleData doubled = d;
  doubled.pos0.insert(doubled.pos0.end(), d.pos0.begin(), d.pos0.end());
  doubled.pos1.insert(doubled.pos1.end(), d.pos1.begin(), d.pos1.end());
  doubled.n00 *= 2;
  doubled.n10 *= 2;
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  DrmFit f1 = fit(d, basis), f2 = fit(doubled, basis);
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  CHECK(rel_close(lambda_hat(f1), lambda_hat(f2), 1e-8));
  CHECK(rel_close(gamma_hat(f1, u), gamma_hat(f2, u), 1e-8));
}

TEST_CASE("covariance routines refuse boundary fits") {
  TwoSampleData d = load_two_sample({1.0, 2.0, 3.0}, {0.0, 1.5, 2.5}, 0.0);
  DrmFit f = fit(d, BasisFunction::make(BasisKind::kLog));
  REQUIRE(f.diagnostics.boundary_nu);
  CHECK_THROWS_AS(lambda_hat(f), DomainError);
  CHECK_THROWS_AS(gamma_hat(f, builtin_u(BuiltinU::kMeanPair)), DomainError);
  CHECK_THROWS_AS(gamma_non_and_sem(f, a_identity, 1), DomainError);
}

TEST_CASE("degenerate basis raises the singularity error") {
  // All positives equal: Q(x) = (1, log x) is constant, A_theta is rank 1.
  TwoSampleData d = load_two_sample({0.0, 2.0, 2.0, 2.0}, {0.0, 2.0, 2.0}, 0.0);
  DrmFit f = fit(d, BasisFunction::make(BasisKind::kLog));
  CHECK_THROWS_AS(lambda_hat(f), SingularMatrixError);
}

TEST_CASE("covariance report bundles the pieces") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  CovarianceReport rep =
      covariance_report(f, builtin_u(BuiltinU::kMeanPair),
                        builtin_g(BuiltinG::kRatio), a_identity, 1);
  CHECK(rep.lambda.rows() == 5);
  CHECK(rep.gamma.rows() == 2);
  CHECK(rep.gamma_g.rows() == 1);
  CHECK(rep.gamma_non.rows() == 2);
  CHECK(rep.min_eig_gap >= -1e-8);
  CHECK(rep.gamma_psd.psd);
}

}  // TEST_SUITE
