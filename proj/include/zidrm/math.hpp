#pragma once

#include <cstddef>

namespace zidrm {

// Quantile of the standard normal distribution (inverse CDF).
// Rational approximation (Wichura's algorithm AS 241, PPND16 variant),
// accurate to well below 1e-9 over (0,1).  Throws DomainError outside (0,1).
double norm_quantile(double p);

// Standard normal CDF.
double norm_cdf(double x);

// Regularized lower incomplete gamma function P(a, x), a > 0, x >= 0.
double gamma_p(double a, double x);

// CDF and quantile of the chi-square distribution with df degrees of freedom.
double chi2_cdf(double x, int df);
double chi2_quantile(double p, int df);

// Kahan compensated accumulator.  Summation order still matters for exact
// reproducibility; callers iterate sample 0 then sample 1 in index order.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace zidrm
