#include "zidrm/inference.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "zidrm/errors.hpp"
#include "zidrm/math.hpp"
#include "zidrm/rng.hpp"

namespace zidrm {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw DomainError("significance level gamma must lie strictly inside (0,1)");
  }
}

// Type-7 (linear interpolation) empirical quantile of a sorted vector.
double sorted_quantile(const std::vector<double>& sorted, double p) {
  const auto m = sorted.size();
  if (m == 1) return sorted[0];
  double h = p * static_cast<double>(m - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo >= m - 1) return sorted[m - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

std::string ci_method_name(CiMethod m) {
  switch (m) {
    case CiMethod::kI1: return "I1";
    case CiMethod::kI1B: return "I1B";
    case CiMethod::kI4: return "I4";
    case CiMethod::kI4L: return "I4L";
  }
  return "?";
}

CiMethod ci_method_by_name(const std::string& name) {
  if (name == "I1") return CiMethod::kI1;
  if (name == "I1B") return CiMethod::kI1B;
  if (name == "I4") return CiMethod::kI4;
  if (name == "I4L") return CiMethod::kI4L;
  throw DomainError("unknown CI method '" + name + "'");
}

IntervalResult wald_interval(const DrmFit& fit, const UFunctional& u,
                             const SmoothMap& g, double gamma,
                             bool log_transform) {
  check_gamma(gamma);
  if (g.q != 1) throw DimensionError("wald_interval: map must be scalar (q = 1)");

  Eigen::VectorXd psi = psi_hat(fit, u);
  double phi = g.value(psi)(0);
  double var = gamma_g_hat(fit, u, g)(0, 0);
  if (var < 0.0) {
    throw NegativeVarianceError("wald_interval: plug-in variance is negative");
  }
  double se = std::sqrt(var / fit.data.n());
  double z = norm_quantile(1.0 - gamma / 2.0);

  IntervalResult out;
  out.level = 1.0 - gamma;
  if (!log_transform) {
    out.method = CiMethod::kI4;
    out.se = se;
    out.lower = phi - z * se;
    out.upper = phi + z * se;
    return out;
  }
  if (!(phi > 0.0)) {
    throw NonPositivePhiError("wald_interval: log transform needs phi_hat > 0");
  }
  double se_log = se / phi;
  out.method = CiMethod::kI4L;
  out.se = se_log;
  out.lower = phi * std::exp(-z * se_log);
  out.upper = phi * std::exp(z * se_log);
  return out;
}

TestResult wald_region_test(const DrmFit& fit, const UFunctional& u,
                            const SmoothMap& g, const Eigen::VectorXd& null_value,
                            double gamma) {
  check_gamma(gamma);
  if (null_value.size() != g.q) {
    throw DimensionError("wald_region_test: null value has wrong length");
  }
  Eigen::VectorXd psi = psi_hat(fit, u);
  Eigen::VectorXd r = g.value(psi) - null_value;
  Eigen::MatrixXd cov = gamma_g_hat(fit, u, g);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  double lo = es.eigenvalues().minCoeff();
  double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kSingularConditionNumber) {
    throw SingularMatrixError("wald_region_test: Gamma_g is numerically singular");
  }
  Eigen::VectorXd solved = es.eigenvectors() *
                           es.eigenvalues().cwiseInverse().asDiagonal() *
                           (es.eigenvectors().transpose() * r);

  TestResult out;
  out.statistic = fit.data.n() * r.dot(solved);
  out.df = g.q;
  out.p_value = 1.0 - chi2_cdf(out.statistic, out.df);
  for (double level : {0.01, 0.05, 0.10, gamma}) {
    out.reject_at[level] = out.statistic > chi2_quantile(1.0 - level, out.df);
  }
  return out;
}

NonparamEstimates nonparam_estimates(const TwoSampleData& data,
                                     const std::function<Eigen::VectorXd(double)>& a,
                                     int m) {
  if (data.n0() < 2 || data.n1() < 2) {
    throw DomainError("nonparam_estimates: variance needs n_i >= 2");
  }
  NonparamEstimates out;
  out.psi0 = Eigen::VectorXd::Zero(m);
  out.psi1 = Eigen::VectorXd::Zero(m);

  KahanSum sum0, sum1;
  for (double x : data.pos0) {
    out.psi0.noalias() += a(x);
    sum0.add(x);
  }
  for (double x : data.pos1) {
    out.psi1.noalias() += a(x);
    sum1.add(x);
  }
  out.psi0 /= data.n0();
  out.psi1 /= data.n1();
  out.mu0 = sum0.value() / data.n0();
  out.mu1 = sum1.value() / data.n1();

  KahanSum ss0, ss1;
  for (double x : data.pos0) ss0.add((x - out.mu0) * (x - out.mu0));
  ss0.add(data.n00 * out.mu0 * out.mu0);  // the zero observations
  for (double x : data.pos1) ss1.add((x - out.mu1) * (x - out.mu1));
  ss1.add(data.n10 * out.mu1 * out.mu1);
  out.var0 = ss0.value() / (data.n0() - 1);
  out.var1 = ss1.value() / (data.n1() - 1);
  out.delta = out.mu1 / out.mu0;
  return out;
}

NonparamEstimates nonparam_estimates(const TwoSampleData& data) {
  return nonparam_estimates(
      data,
      [](double x) {
        Eigen::VectorXd v(1);
        v(0) = x;
        return v;
      },
      1);
}

namespace {

LogScaleStat log_ratio_stat_of(const TwoSampleData& data) {
  NonparamEstimates np = nonparam_estimates(data);
  LogScaleStat s;
  s.value = std::log(np.delta);
  s.se = std::sqrt(np.var0 / (data.n0() * np.mu0 * np.mu0) +
                   np.var1 / (data.n1() * np.mu1 * np.mu1));
  return s;
}

}  // namespace

LogStatFn log_mean_ratio_stat() {
  return [](const TwoSampleData& data) { return log_ratio_stat_of(data); };
}

IntervalResult nonparam_log_wald(const TwoSampleData& data, double gamma) {
  check_gamma(gamma);
  LogScaleStat s = log_ratio_stat_of(data);
  double z = norm_quantile(1.0 - gamma / 2.0);
  IntervalResult out;
  out.method = CiMethod::kI1;
  out.level = 1.0 - gamma;
  out.se = s.se;
  out.lower = std::exp(s.value - z * s.se);
  out.upper = std::exp(s.value + z * s.se);
  return out;
}

IntervalResult bootstrap_wald(const TwoSampleData& data, const LogStatFn& stat,
                              double gamma, int B, std::uint64_t seed,
                              const BootstrapOptions& opts) {
  check_gamma(gamma);
  if (B < 1) throw DomainError("bootstrap_wald: B must be >= 1");

  LogScaleStat base = stat(data);

  // Expanded per-sample observation lists: positives first, then zeros.
  std::vector<double> all0(data.pos0), all1(data.pos1);
  all0.resize(data.n0(), 0.0);
  all1.resize(data.n1(), 0.0);
  const auto n0 = static_cast<std::uint32_t>(all0.size());
  const auto n1 = static_cast<std::uint32_t>(all1.size());

  ReplicateRng rng(seed, 0);
  IntervalResult out;
  out.method = CiMethod::kI1B;
  out.level = 1.0 - gamma;
  out.se = base.se;

  std::vector<double> draws;
  draws.reserve(B);
  TwoSampleData resample;
  for (int b = 0; b < B; ++b) {
    bool got = false;
    for (int attempt = 0; attempt < opts.max_redraw; ++attempt) {
      resample.pos0.clear();
      resample.pos1.clear();
      resample.n00 = resample.n10 = 0;
      for (std::uint32_t j = 0; j < n0; ++j) {
        double x = all0[rng.index(n0)];
        if (x > 0.0) resample.pos0.push_back(x);
        else ++resample.n00;
      }
      for (std::uint32_t j = 0; j < n1; ++j) {
        double x = all1[rng.index(n1)];
        if (x > 0.0) resample.pos1.push_back(x);
        else ++resample.n10;
      }
      if (resample.pos0.empty() || resample.pos1.empty()) {
        ++out.degenerate_redraws;
        continue;
      }
      LogScaleStat rs = stat(resample);
      if (!std::isfinite(rs.value) || !(rs.se > 0.0)) {
        // A flat resample (zero spread) cannot be studentized; redraw it.
        ++out.degenerate_redraws;
        continue;
      }
      switch (opts.kind) {
        case BootstrapKind::kSymmetricT:
          draws.push_back(std::fabs((rs.value - base.value) / rs.se));
          break;
        case BootstrapKind::kEqualTailedT:
          draws.push_back((rs.value - base.value) / rs.se);
          break;
        case BootstrapKind::kPercentile:
          draws.push_back(rs.value);
          break;
      }
      got = true;
      break;
    }
    if (!got) ++out.failed_draws;
  }
  if (draws.empty()) {
    throw DomainError("bootstrap_wald: every bootstrap draw was degenerate");
  }
  out.bootstrap_reps = static_cast<int>(draws.size());

  std::sort(draws.begin(), draws.end());
  switch (opts.kind) {
    case BootstrapKind::kSymmetricT: {
      double crit = sorted_quantile(draws, 1.0 - gamma);
      out.lower = std::exp(base.value - crit * base.se);
      out.upper = std::exp(base.value + crit * base.se);
      break;
    }
    case BootstrapKind::kEqualTailedT: {
      double q_lo = sorted_quantile(draws, gamma / 2.0);
      double q_hi = sorted_quantile(draws, 1.0 - gamma / 2.0);
      out.lower = std::exp(base.value - q_hi * base.se);
      out.upper = std::exp(base.value - q_lo * base.se);
      break;
    }
    case BootstrapKind::kPercentile:
      out.lower = std::exp(sorted_quantile(draws, gamma / 2.0));
      out.upper = std::exp(sorted_quantile(draws, 1.0 - gamma / 2.0));
      break;
  }
  return out;
}

}  // namespace zidrm
