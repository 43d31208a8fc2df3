#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

#include "zidrm/data.hpp"
#include "zidrm/rng.hpp"
#include "zidrm/simulation.hpp"

namespace zidrm::test {

// A small fixed instance used across suites: 3 positives per sample plus
// one and two zeros, log basis.  Oracle values below were computed with an
// independent grid search over (alpha, beta) in [-5,5]^2 (step 1e-2, local
// refinement 1e-3) followed by Newton polishing of the score equations,
// separate from the library code.
inline TwoSampleData six_point_data() {
  return load_two_sample({0.0, 0.8, 1.5, 2.2}, {0.0, 0.0, 1.1, 2.0, 3.1}, 0.0);
}

inline constexpr double kSixPointAlpha = -0.82694380805920853;
inline constexpr double kSixPointBeta = 1.7034013269262236;
inline constexpr double kSixPointPsi0 = 1.1411013671440859;   // (1-nu0) sum p x
inline constexpr double kSixPointPsi1 = 1.2271189062847314;   // tilted mean
inline constexpr double kSixPointDelta = 1.075381155099242;
inline constexpr double kSixPointE0LogX = 0.32359297238607498; // sum p log x
inline constexpr double kSixPointVar0 = 0.78576506932123436;
inline constexpr double kSixPointVar1 = 1.3338772703030954;

// Identical positive multisets with equal zero counts; the symmetric case
// where theta_hat = 0 exactly.
inline TwoSampleData symmetric_data() {
  std::vector<double> raw = {0.0, 0.0, 0.6, 1.3, 2.7, 4.1, 0.9};
  return load_two_sample(raw, raw, 0.0);
}

// Random zero-inflated log-normal datasets for property tests.
inline TwoSampleData random_dataset(std::uint64_t seed, std::uint64_t stream,
                                 int n0 = 60, int n1 = 80, double v0 = 0.3,
                                 double v1 = 0.4, double a1 = 0.4) {
  MixtureScenario s;
  s.v0 = v0;
  s.v1 = v1;
  s.a0 = 0.0;
  s.a1 = a1;
  s.b0 = s.b1 = 1.0;
  s.n0 = n0;
  s.n1 = n1;
  for (std::uint64_t attempt = 0;; ++attempt) {
    TwoSampleData d = generate(s, seed, stream * 1000 + attempt);
    if (!d.pos0.empty() && !d.pos1.empty() && d.n00 > 0 && d.n10 > 0) return d;
  }
}

// Scaled sup-norm closeness for matrices/vectors: |a-b| <= tol * scale with
// scale = max(1, |a|, |b|).
inline bool rel_close(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                      double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() <= tol * scale;
}

inline bool rel_close(double a, double b, double tol) {
  double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= tol * scale;
}

// Central finite differences of a scalar function of a vector.
inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step_scale = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = std::max(step_scale, step_scale * std::fabs(x(i)));
    Eigen::VectorXd up = x, dn = x;
    up(i) += h;
    dn(i) -= h;
    g(i) = (f(up) - f(dn)) / (2.0 * h);
  }
  return g;
}

// Central finite differences of a vector function (rows = outputs).
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double step_scale = 1e-6) {
  Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd j(f0.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = std::max(step_scale, step_scale * std::fabs(x(i)));
    Eigen::VectorXd up = x, dn = x;
    up(i) += h;
    dn(i) -= h;
    j.col(i) = (f(up) - f(dn)) / (2.0 * h);
  }
  return j;
}

}  // namespace zidrm::test
