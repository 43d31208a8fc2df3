#include "zidrm/math.hpp"

#include <cmath>
#include <limits>

#include "zidrm/errors.hpp"

namespace zidrm {

namespace {

double poly7(const double* c, double r) {
  // c[0] + c[1] r + ... + c[7] r^7, Horner form
  return c[0] +
         r * (c[1] +
              r * (c[2] +
                   r * (c[3] + r * (c[4] + r * (c[5] + r * (c[6] + r * c[7]))))));
}

}  // namespace

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("norm_quantile: p must lie strictly inside (0,1)");
  }
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e+1, 6.8718700749205790830e+2,
      5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static const double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
      3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * poly7(a, r) / poly7(b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = poly7(c, r) / poly7(d, r);
  } else {
    r -= 5.0;
    val = poly7(e, r) / poly7(f, r);
  }
  return (q < 0.0) ? -val : val;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

// Series expansion of P(a,x), good for x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) = 1 - P(a,x), good for x >= a + 1
// (modified Lentz).
double gamma_q_cf(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: need a > 0 and x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double chi2_cdf(double x, int df) {
  if (df < 1) throw DomainError("chi2_cdf: df must be >= 1");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double p, int df) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("chi2_quantile: p must lie strictly inside (0,1)");
  }
  if (df < 1) throw DomainError("chi2_quantile: df must be >= 1");
  // Wilson-Hilferty start, then Newton on the CDF.
  double z = norm_quantile(p);
  double k = static_cast<double>(df);
  double t = 1.0 - 2.0 / (9.0 * k) + z * std::sqrt(2.0 / (9.0 * k));
  double x = k * t * t * t;
  if (!(x > 0.0)) x = 0.5;
  for (int it = 0; it < 100; ++it) {
    double fx = chi2_cdf(x, df) - p;
    // chi2 density
    double log_pdf = -0.5 * x + (0.5 * k - 1.0) * std::log(x) -
                     0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
    double pdf = std::exp(log_pdf);
    if (pdf <= 0.0) break;
    double step = fx / pdf;
    double next = x - step;
    if (next <= 0.0) next = 0.5 * x;
    if (std::fabs(next - x) < 1e-12 * (1.0 + x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

}  // namespace zidrm
