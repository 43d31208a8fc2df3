#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "zidrm/errors.hpp"
#include "zidrm/inference.hpp"
#include "zidrm/math.hpp"

using namespace zidrm;
using namespace zidrm::test;

TEST_SUITE("inference") {

TEST_CASE("wald interval width uses the normal quantile") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  SmoothMap g = builtin_g(BuiltinG::kRatio);
  IntervalResult iv = wald_interval(f, u, g, 0.05, false);
  CHECK(iv.method == CiMethod::kI4);
  CHECK(iv.level == doctest::Approx(0.95));
  CHECK(iv.upper - iv.lower ==
        doctest::Approx(2.0 * 1.959964 * iv.se).epsilon(1e-6));
  double mid = 0.5 * (iv.lower + iv.upper);
  CHECK(mid == doctest::Approx(kSixPointDelta).epsilon(1e-8));
}

TEST_CASE("log-scale interval exponentiates and stays positive") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  SmoothMap g = builtin_g(BuiltinG::kRatio);
  IntervalResult iv = wald_interval(f, u, g, 0.05, true);
  CHECK(iv.method == CiMethod::kI4L);
  CHECK(iv.lower > 0.0);
  CHECK(iv.lower < iv.upper);
  // Geometric midpoint recovers the estimate.
  CHECK(std::sqrt(iv.lower * iv.upper) ==
        doctest::Approx(kSixPointDelta).epsilon(1e-8));
  // Plain and log intervals are linked through the same variance.
  IntervalResult plain = wald_interval(f, u, g, 0.05, false);
  CHECK(iv.se == doctest::Approx(plain.se / kSixPointDelta).epsilon(1e-8));
}

TEST_CASE("a constant map yields a degenerate interval") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  SmoothMap constant;
  constant.q = 1;
  constant.label = "const";
  constant.value = [](const Eigen::VectorXd&) {
    return Eigen::VectorXd::Constant(1, 2.5).eval();
  };
  constant.jacobian = [](const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Zero(1, x.size()).eval();
  };
  IntervalResult iv =
      wald_interval(f, builtin_u(BuiltinU::kMeanPair), constant, 0.05, false);
  CHECK(iv.se == 0.0);
  CHECK(iv.lower == 2.5);
  CHECK(iv.upper == 2.5);
}

TEST_CASE("log transform refuses nonpositive estimates") {
  TwoSampleData d = symmetric_data();
  DrmFit f = fit(d, BasisFunction::make(BasisKind::kLog));
  // variance difference is exactly zero on symmetric data
  CHECK_THROWS_AS(wald_interval(f, builtin_u(BuiltinU::kMeanAndM2),
                                builtin_g(BuiltinG::kVarianceDiff), 0.05, true),
                  NonPositivePhiError);
}

TEST_CASE("interval nesting in the significance level") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  SmoothMap g = builtin_g(BuiltinG::kRatio);
  for (bool log_t : {false, true}) {
    IntervalResult wide = wald_interval(f, u, g, 0.05, log_t);
    IntervalResult narrow = wald_interval(f, u, g, 0.10, log_t);
    CHECK(narrow.lower >= wide.lower);
    CHECK(narrow.upper <= wide.upper);
  }
  TwoSampleData d = six_point_data();
  IntervalResult w1 = nonparam_log_wald(d, 0.05);
  IntervalResult n1 = nonparam_log_wald(d, 0.10);
  CHECK(n1.lower >= w1.lower);
  CHECK(n1.upper <= w1.upper);
  IntervalResult wb = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 199, 9);
  IntervalResult nb = bootstrap_wald(d, log_mean_ratio_stat(), 0.10, 199, 9);
  CHECK(nb.lower >= wb.lower);
  CHECK(nb.upper <= wb.upper);
}

TEST_CASE("test statistic is zero at the point estimate") {
  DrmFit f = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  SmoothMap g = builtin_g(BuiltinG::kLogRatio);
  Eigen::VectorXd at = g.value(psi_hat(f, u));
  TestResult tr = wald_region_test(f, u, g, at, 0.05);
  CHECK(tr.statistic == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(tr.p_value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tr.df == 1);
  CHECK_FALSE(tr.reject_at.at(0.05));
}

TEST_CASE("test/interval duality for scalar maps") {
  BasisFunction basis = BasisFunction::make(BasisKind::kLog);
  UFunctional u = builtin_u(BuiltinU::kMeanPair);
  SmoothMap g = builtin_g(BuiltinG::kRatio);
  ReplicateRng rng(71, 0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    DrmFit f = fit(random_dataset(5150, i), basis);
    if (!f.diagnostics.converged) continue;
    double gamma = 0.02 + 0.2 * rng.uniform();
    double null = 0.3 + 2.0 * rng.uniform();
    IntervalResult iv = wald_interval(f, u, g, gamma, false);
    Eigen::VectorXd null_v(1);
    null_v << null;
    TestResult tr = wald_region_test(f, u, g, null_v, gamma);
    bool outside = null < iv.lower || null > iv.upper;
    CHECK(tr.reject_at.at(gamma) == outside);
    CHECK((tr.p_value < gamma) == outside);
    ++checked;
  }
  CHECK(checked >= 95);
}

TEST_CASE("variance equality is retained on symmetric data") {
  TwoSampleData d = symmetric_data();
  DrmFit f = fit(d, BasisFunction::make(BasisKind::kLog));
  TestResult tr =
      wald_region_test(f, builtin_u(BuiltinU::kMeanAndM2),
                       builtin_g(BuiltinG::kVarianceDiff),
                       Eigen::VectorXd::Zero(1), 0.05);
  CHECK(tr.statistic <= 1e-10);
  CHECK_FALSE(tr.reject_at.at(0.05));
}

TEST_CASE("nonparametric estimates by hand") {
  TwoSampleData d = load_two_sample({0.0, 0.0, 2.0, 4.0}, {0.0, 0.0, 2.0, 4.0}, 0.0);
  NonparamEstimates np = nonparam_estimates(d);
  CHECK(np.mu0 == doctest::Approx(1.5));
  CHECK(np.var0 == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
  CHECK(np.delta == doctest::Approx(1.0));
  CHECK(np.psi0(0) == doctest::Approx(1.5));
}

TEST_CASE("nonparametric estimates match an independent recomputation") {
  for (int i = 0; i < 50; ++i) {
    TwoSampleData d = random_dataset(31337, i);
    NonparamEstimates np = nonparam_estimates(d);
    double s = 0.0;
    for (double x : d.pos1) s += x;
    double mu = s / d.n1();
    double ss = d.n10 * mu * mu;
    for (double x : d.pos1) ss += (x - mu) * (x - mu);
    CHECK(rel_close(np.mu1, mu, 1e-12));
    CHECK(rel_close(np.var1, ss / (d.n1() - 1), 1e-12));
    CHECK(rel_close(np.delta, mu / np.mu0, 1e-12));
  }
}

TEST_CASE("nonparametric variance needs two observations") {
  CHECK_THROWS_AS(nonparam_estimates(load_two_sample({1.0}, {1.0, 2.0}, 0.0)),
                  DomainError);
}

TEST_CASE("nonparametric log-scale interval") {
  TwoSampleData d = six_point_data();
  NonparamEstimates np = nonparam_estimates(d);
  IntervalResult iv = nonparam_log_wald(d, 0.05);
  CHECK(iv.method == CiMethod::kI1);
  CHECK(iv.lower > 0.0);
  CHECK(iv.lower < np.delta);
  CHECK(np.delta < iv.upper);
  double se_expected = std::sqrt(np.var0 / (d.n0() * np.mu0 * np.mu0) +
                                 np.var1 / (d.n1() * np.mu1 * np.mu1));
  CHECK(iv.se == doctest::Approx(se_expected).epsilon(1e-12));
  CHECK(std::log(iv.upper / iv.lower) ==
        doctest::Approx(2 * norm_quantile(0.975) * iv.se).epsilon(1e-10));
}

TEST_CASE("bootstrap is deterministic and preserves sample sizes") {
  TwoSampleData d = random_dataset(11, 4, 40, 50);
  int n0 = d.n0(), n1 = d.n1();
  int calls = 0;
  LogStatFn checking_stat = [&](const TwoSampleData& s) {
    ++calls;
    if (calls > 1) {  // first call sees the original data
      CHECK(s.n0() == n0);
      CHECK(s.n1() == n1);
    }
    return log_mean_ratio_stat()(s);
  };
  IntervalResult a = bootstrap_wald(d, checking_stat, 0.05, 99, 101);
  IntervalResult b = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 99, 101);
  CHECK(a.lower == b.lower);  // bit-identical under the same seed
  CHECK(a.upper == b.upper);
  CHECK(a.bootstrap_reps == 99);
  IntervalResult c = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 99, 102);
  CHECK(c.lower != b.lower);  // and the seed matters
}

TEST_CASE("single bootstrap draw is degenerate but defined") {
  TwoSampleData d = six_point_data();
  IntervalResult iv = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 1, 5);
  CHECK(iv.bootstrap_reps == 1);
  CHECK(iv.lower <= iv.upper);
  CHECK(std::isfinite(iv.lower));
}

TEST_CASE("degenerate resamples are redrawn and counted") {
  // Three of four observations are zero in each sample, so many resamples
  // have no positives at all.
  TwoSampleData d =
      load_two_sample({0.0, 0.0, 0.0, 2.0}, {0.0, 0.0, 0.0, 3.0}, 0.0);
  IntervalResult iv = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 200, 3);
  CHECK(iv.degenerate_redraws > 0);
  CHECK(iv.bootstrap_reps + iv.failed_draws == 200);
}

TEST_CASE("bootstrap construction variants") {
  TwoSampleData d = random_dataset(99, 2);
  BootstrapOptions pct, tails;
  pct.kind = BootstrapKind::kPercentile;
  tails.kind = BootstrapKind::kEqualTailedT;
  IntervalResult sym = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 299, 7);
  IntervalResult et = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 299, 7, tails);
  IntervalResult p = bootstrap_wald(d, log_mean_ratio_stat(), 0.05, 299, 7, pct);
  CHECK(sym.lower != et.lower);
  CHECK(sym.lower != p.lower);
  for (const IntervalResult& iv : {sym, et, p}) {
    CHECK(iv.lower > 0.0);
    CHECK(iv.lower < iv.upper);
  }
  // The symmetric interval is centered on the estimate in the log scale.
  NonparamEstimates np = nonparam_estimates(d);
  CHECK(std::sqrt(sym.lower * sym.upper) ==
        doctest::Approx(np.delta).epsilon(1e-10));
}

TEST_CASE("interval and test preconditions") {
  TwoSampleData d = load_two_sample({1.0, 2.0, 3.0}, {0.0, 1.5, 2.5}, 0.0);
  DrmFit boundary = fit(d, BasisFunction::make(BasisKind::kLog));
  REQUIRE(boundary.diagnostics.boundary_nu);
  CHECK_THROWS_AS(wald_interval(boundary, builtin_u(BuiltinU::kMeanPair),
                                builtin_g(BuiltinG::kRatio), 0.05, false),
                  DomainError);
  DrmFit ok = fit(six_point_data(), BasisFunction::make(BasisKind::kLog));
  CHECK_THROWS_AS(wald_interval(ok, builtin_u(BuiltinU::kMeanPair),
                                builtin_g(BuiltinG::kVariancePair), 0.05, false),
                  DimensionError);
  CHECK_THROWS_AS(wald_interval(ok, builtin_u(BuiltinU::kMeanPair),
                                builtin_g(BuiltinG::kRatio), 1.5, false),
                  DomainError);
  CHECK_THROWS_AS(bootstrap_wald(six_point_data(), log_mean_ratio_stat(), 0.05,
                                 0, 1),
                  DomainError);
}

}  // TEST_SUITE
