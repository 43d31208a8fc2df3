#include "zidrm/solver.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "zidrm/errors.hpp"

namespace zidrm {

namespace {

constexpr double kArmijoSlope = 1e-4;
constexpr double kArmijoShrink = 0.5;
constexpr double kMinStep = 1e-16;

// Newton or shifted-Newton ascent direction for gradient g and Hessian H of
// a function to be maximized.  B = -H should be positive semidefinite.
Eigen::VectorXd ascent_direction(const Eigen::VectorXd& g,
                                 const Eigen::MatrixXd& hess) {
  Eigen::MatrixXd b = -hess;
  double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  double shift = 0.0;
  for (int attempt = 0; attempt < 24; ++attempt) {
    Eigen::MatrixXd bs = b;
    if (shift > 0.0) bs.diagonal().array() += shift;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(bs);
    if (ldlt.info() == Eigen::Success) {
      Eigen::VectorXd d = ldlt.solve(g);
      if (d.allFinite() && g.dot(d) > 0.0) return d;
    }
    shift = (shift == 0.0) ? 1e-8 * scale : shift * 10.0;
  }
  return g;  // steepest ascent
}

}  // namespace

NewtonResult newton_ascend(
    const std::function<LikelihoodEval(const Eigen::VectorXd&)>& objective,
    Eigen::VectorXd x0, const SolverOptions& opts) {
  NewtonResult res;
  Eigen::VectorXd x = std::move(x0);
  LikelihoodEval cur = objective(x);
  if (!std::isfinite(cur.value) || !cur.gradient.allFinite()) {
    throw DomainError("newton_ascend: objective not finite at the start point");
  }

  Eigen::VectorXd best_x = x;
  double best_value = cur.value;
  double best_grad_norm = cur.gradient.lpNorm<Eigen::Infinity>();

  // Rolling window of gradient norms for the separation heuristic.
  std::vector<double> recent_grad;

  int iter = 0;
  for (; iter < opts.max_iter; ++iter) {
    double gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
    if (cur.value > best_value ||
        (cur.value == best_value && gnorm < best_grad_norm)) {
      best_x = x;
      best_value = cur.value;
      best_grad_norm = gnorm;
    }
    if (gnorm <= opts.grad_tol) {
      res.converged = true;
      break;
    }
    if (x.lpNorm<Eigen::Infinity>() > opts.theta_norm_bound) {
      // Norm ran away; declare separation once the gradient stops shrinking.
      recent_grad.push_back(gnorm);
      if (recent_grad.size() >= 10 &&
          gnorm > 0.5 * recent_grad[recent_grad.size() - 10]) {
        res.separation_suspected = true;
        break;
      }
    } else {
      recent_grad.push_back(gnorm);
    }

    Eigen::VectorXd dir = ascent_direction(cur.gradient, cur.hessian);
    double slope = cur.gradient.dot(dir);

    // Near the maximum the objective is flat to double precision and the
    // Armijo test cannot certify ascent; a full Newton step certified by
    // gradient contraction finishes convergence instead.
    double value_noise = 1e-12 * (1.0 + std::fabs(cur.value));
    auto try_gradient_step = [&]() {
      try {
        Eigen::VectorXd trial = x + dir;
        LikelihoodEval trial_eval = objective(trial);
        if (std::isfinite(trial_eval.value) && trial_eval.gradient.allFinite() &&
            trial_eval.gradient.lpNorm<Eigen::Infinity>() < 0.5 * gnorm &&
            trial_eval.value >= cur.value - value_noise) {
          x = std::move(trial);
          cur = std::move(trial_eval);
          return true;
        }
      } catch (const OverflowError&) {
      }
      return false;
    };

    bool moved = gnorm < 1e-6 && try_gradient_step();
    double step = 1.0;
    while (!moved && step >= kMinStep) {
      Eigen::VectorXd trial = x + step * dir;
      double trial_value = -std::numeric_limits<double>::infinity();
      LikelihoodEval trial_eval;
      bool ok = true;
      try {
        trial_eval = objective(trial);
        trial_value = trial_eval.value;
      } catch (const OverflowError&) {
        ok = false;
      }
      if (ok && std::isfinite(trial_value) &&
          trial_value >= cur.value + kArmijoSlope * step * slope) {
        x = std::move(trial);
        cur = std::move(trial_eval);
        moved = true;
        break;
      }
      step *= kArmijoShrink;
    }
    if (!moved) moved = try_gradient_step();
    if (!moved) break;  // no certifiable progress left at this scale
  }

  double final_gnorm = cur.gradient.lpNorm<Eigen::Infinity>();
  if (cur.value > best_value ||
      (cur.value == best_value && final_gnorm < best_grad_norm)) {
    best_x = x;
    best_grad_norm = final_gnorm;
  }
  res.x = std::move(best_x);
  res.iterations = iter;
  res.grad_norm = best_grad_norm;
  if (!res.converged) res.converged = best_grad_norm <= opts.grad_tol;
  return res;
}

DrmFit fit(const TwoSampleData& data, const BasisFunction& basis,
           const SolverOptions& opts) {
  DrmFit out{data, basis};
  out.nu0 = static_cast<double>(data.n00) / data.n0();
  out.nu1 = static_cast<double>(data.n10) / data.n1();
  out.rho = data.rho_hat();
  out.diagnostics.boundary_nu = (data.n00 == 0) || (data.n10 == 0);

  auto objective = [&](const Eigen::VectorXd& theta) {
    return ell1_dual(data, basis, theta);
  };
  NewtonResult nr =
      newton_ascend(objective, Eigen::VectorXd::Zero(basis.dim() + 1), opts);
  out.theta = nr.x;
  out.diagnostics.iterations = nr.iterations;
  out.diagnostics.grad_norm = nr.grad_norm;
  out.diagnostics.converged = nr.converged;
  out.diagnostics.separation_suspected = nr.separation_suspected;

  const double inv_npos = 1.0 / data.n_pos();
  auto weight_of = [&](double x) {
    double t = out.theta.dot(basis.augmented(x));
    return inv_npos / h_of(out.rho, t);
  };
  out.weights0.reserve(data.pos0.size());
  out.weights1.reserve(data.pos1.size());
  for (double x : data.pos0) out.weights0.push_back(weight_of(x));
  for (double x : data.pos1) out.weights1.push_back(weight_of(x));

  // Jump lists of G0_hat and G1_hat: G1 jumps are p_ij * omega(x).
  std::map<double, std::pair<double, double>> jumps;
  auto add_jump = [&](double x, double p) {
    double t = out.theta.dot(basis.augmented(x));
    if (t > kLogOmegaMax) {
      throw OverflowError("fit: exp(theta'Q) exceeded the representable range");
    }
    auto& entry = jumps[x];
    entry.first += p;
    entry.second += p * std::exp(t);
  };
  for (std::size_t j = 0; j < data.pos0.size(); ++j) {
    add_jump(data.pos0[j], out.weights0[j]);
  }
  for (std::size_t j = 0; j < data.pos1.size(); ++j) {
    add_jump(data.pos1[j], out.weights1[j]);
  }
  out.g0_jumps.reserve(jumps.size());
  out.g1_jumps.reserve(jumps.size());
  for (const auto& [x, masses] : jumps) {
    out.g0_jumps.emplace_back(x, masses.first);
    out.g1_jumps.emplace_back(x, masses.second);
  }
  return out;
}

ParamBundle DrmFit::bundle() const {
  if (diagnostics.boundary_nu) {
    return ParamBundle::unchecked(nu0, nu1, rho, theta, basis);
  }
  return ParamBundle(nu0, nu1, rho, theta, basis);
}

namespace {
double cdf_at(const std::vector<std::pair<double, double>>& jumps, double x) {
  double total = 0.0;
  for (const auto& [xi, mass] : jumps) {
    if (xi <= x) total += mass;
    else break;
  }
  return total;
}
}  // namespace

double DrmFit::g0(double x) const { return cdf_at(g0_jumps, x); }
double DrmFit::g1(double x) const { return cdf_at(g1_jumps, x); }

}  // namespace zidrm
