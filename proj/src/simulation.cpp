#include "zidrm/simulation.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "zidrm/errors.hpp"
#include "zidrm/functionals.hpp"
#include "zidrm/math.hpp"
#include "zidrm/rng.hpp"

namespace zidrm {

TrueValues MixtureScenario::true_values() const {
  TrueValues t;
  auto moments = [](double v, double a, double b, double* mu, double* var) {
    double m1 = std::exp(a + b / 2.0);
    double m2 = std::exp(2.0 * a + 2.0 * b);
    *mu = (1.0 - v) * m1;
    *var = (1.0 - v) * m2 - (1.0 - v) * (1.0 - v) * m1 * m1;
  };
  moments(v0, a0, b0, &t.mu0, &t.var0);
  moments(v1, a1, b1, &t.mu1, &t.var1);
  t.delta = t.mu1 / t.mu0;
  return t;
}

MixtureScenario model_preset(int which) {
  struct Row {
    double v0, v1, a0, a1;
  };
  // b0 = b1 = 1 throughout.
  static const Row rows[10] = {
      {0.30, 0.30, 0.00, 0.00}, {0.70, 0.70, 0.00, 0.00},
      {0.30, 0.50, 0.33, 0.66}, {0.50, 0.70, 0.37, 0.89},
      {0.50, 0.30, 0.00, 0.00}, {0.70, 0.50, 0.00, 0.00},
      {0.60, 0.40, 0.00, 0.00}, {0.30, 0.30, 0.00, 0.50},
      {0.70, 0.70, 0.00, 0.75}, {0.40, 0.60, 0.00, 1.00},
  };
  if (which < 1 || which > 10) {
    throw DomainError("model_preset: model index must be in 1..10");
  }
  const Row& r = rows[which - 1];
  MixtureScenario s;
  s.name = "model" + std::to_string(which);
  s.v0 = r.v0;
  s.v1 = r.v1;
  s.a0 = r.a0;
  s.a1 = r.a1;
  s.b0 = s.b1 = 1.0;
  return s;
}

MixtureScenario scenario_by_name(const std::string& name) {
  if (name.rfind("model", 0) == 0) {
    int which = 0;
    try {
      which = std::stoi(name.substr(5));
    } catch (...) {
      throw DomainError("unknown scenario '" + name + "'");
    }
    return model_preset(which);
  }
  throw DomainError("unknown scenario '" + name + "'");
}

TwoSampleData generate(const MixtureScenario& scenario, std::uint64_t seed,
                       std::uint64_t replicate) {
  if (!(scenario.v0 > 0.0 && scenario.v0 < 1.0 && scenario.v1 > 0.0 &&
        scenario.v1 < 1.0)) {
    throw DomainError("generate: zero probabilities must lie inside (0,1)");
  }
  if (!(scenario.b0 > 0.0 && scenario.b1 > 0.0)) {
    throw DomainError("generate: log-scale variances must be positive");
  }
  ReplicateRng rng(seed, 2 * replicate);
  TwoSampleData data;
  auto draw_sample = [&](int n, double v, double a, double b,
                         std::vector<double>* pos, int* zeros) {
    double sd = std::sqrt(b);
    for (int j = 0; j < n; ++j) {
      if (rng.uniform() < v) {
        ++*zeros;
      } else {
        pos->push_back(std::exp(a + sd * rng.normal()));
      }
    }
  };
  draw_sample(scenario.n0, scenario.v0, scenario.a0, scenario.b0, &data.pos0,
              &data.n00);
  draw_sample(scenario.n1, scenario.v1, scenario.a1, scenario.b1, &data.pos1,
              &data.n10);
  if (data.pos0.empty() || data.pos1.empty()) {
    // n_i1 = 0 happens with probability v^n; callers treat it like a
    // boundary fit.  Represent it with an empty positive list.
    return data;
  }
  return data;
}

namespace {

struct RepOutcome {
  bool boundary = false;
  bool nonconverged = false;
  double delta_hat = 0.0, var0_hat = 0.0, var1_hat = 0.0;
  double delta_tilde = 0.0, var0_tilde = 0.0, var1_tilde = 0.0;
  std::vector<IntervalResult> intervals;
};

RepOutcome run_one(const MixtureScenario& scenario, const StudyOptions& opts,
                   std::uint64_t r, const UFunctional& u4, const SmoothMap& vpair) {
  RepOutcome out;
  TwoSampleData data = generate(scenario, opts.seed, r);
  if (data.pos0.empty() || data.pos1.empty() || data.n00 == 0 ||
      data.n10 == 0) {
    out.boundary = true;
    return out;
  }

  NonparamEstimates np = nonparam_estimates(data);
  out.delta_tilde = np.delta;
  out.var0_tilde = np.var0;
  out.var1_tilde = np.var1;

  DrmFit f = fit(data, BasisFunction::make(BasisKind::kLog), opts.solver);
  if (f.diagnostics.boundary_nu) {
    out.boundary = true;
    return out;
  }
  if (!f.diagnostics.converged) {
    out.nonconverged = true;
    return out;
  }

  Eigen::VectorXd psi4 = psi_hat(f, u4);  // (mu0, m2_0, mu1, m2_1)
  out.delta_hat = psi4(2) / psi4(0);
  Eigen::VectorXd vars = vpair.value(psi4);
  out.var0_hat = vars(0);
  out.var1_hat = vars(1);

  for (CiMethod method : opts.ci_set) {
    switch (method) {
      case CiMethod::kI1:
        out.intervals.push_back(nonparam_log_wald(data, opts.gamma));
        break;
      case CiMethod::kI1B:
        out.intervals.push_back(bootstrap_wald(data, log_mean_ratio_stat(),
                                               opts.gamma, opts.bootstrap_b,
                                               mix_seed(opts.seed, 2 * r + 1)));
        break;
      case CiMethod::kI4:
        out.intervals.push_back(wald_interval(
            f, builtin_u(BuiltinU::kMeanPair), builtin_g(BuiltinG::kRatio),
            opts.gamma, false));
        break;
      case CiMethod::kI4L:
        out.intervals.push_back(wald_interval(
            f, builtin_u(BuiltinU::kMeanPair), builtin_g(BuiltinG::kRatio),
            opts.gamma, true));
        break;
    }
  }
  return out;
}

}  // namespace

McReport run_study(const MixtureScenario& scenario, const StudyOptions& opts) {
  if (opts.reps < 1) throw DomainError("run_study: reps must be >= 1");
  auto start = std::chrono::steady_clock::now();

  const UFunctional u4 = builtin_u(BuiltinU::kMeanAndM2);
  const SmoothMap vpair = builtin_g(BuiltinG::kVariancePair);

  std::vector<RepOutcome> outcomes(opts.reps);
  int workers = std::max(1, opts.workers);
  if (workers == 1) {
    for (int r = 0; r < opts.reps; ++r) {
      outcomes[r] = run_one(scenario, opts, r, u4, vpair);
    }
  } else {
    std::atomic<int> next{0};
    auto worker = [&]() {
      for (;;) {
        int r = next.fetch_add(1);
        if (r >= opts.reps) return;
        outcomes[r] = run_one(scenario, opts, r, u4, vpair);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  McReport rep;
  rep.replicates = opts.reps;
  rep.truth = scenario.true_values();

  // Aggregation in replicate order; excluded replicates contribute nothing.
  struct Acc {
    KahanSum err, sq;
  };
  std::map<std::string, Acc> est_acc;
  struct CiAcc {
    long covered = 0;
    KahanSum length;
    long count = 0;
  };
  std::map<std::string, CiAcc> ci_acc;

  for (const RepOutcome& o : outcomes) {
    if (o.boundary) {
      ++rep.excluded_boundary;
      continue;
    }
    if (o.nonconverged) {
      ++rep.excluded_nonconverged;
      continue;
    }
    ++rep.used;
    auto record = [&](const std::string& key, double est, double truth) {
      Acc& a = est_acc[key];
      a.err.add(est - truth);
      a.sq.add((est - truth) * (est - truth));
    };
    record("delta_hat", o.delta_hat, rep.truth.delta);
    record("delta_tilde", o.delta_tilde, rep.truth.delta);
    record("var0_hat", o.var0_hat, rep.truth.var0);
    record("var0_tilde", o.var0_tilde, rep.truth.var0);
    record("var1_hat", o.var1_hat, rep.truth.var1);
    record("var1_tilde", o.var1_tilde, rep.truth.var1);
    for (const IntervalResult& iv : o.intervals) {
      CiAcc& a = ci_acc[ci_method_name(iv.method)];
      ++a.count;
      if (iv.lower < rep.truth.delta && rep.truth.delta < iv.upper) ++a.covered;
      a.length.add(iv.upper - iv.lower);
    }
  }

  for (auto& [key, acc] : est_acc) {
    EstimatorStats s;
    s.bias = acc.err.value() / rep.used;
    s.mse = acc.sq.value() / rep.used;
    rep.estimators[key] = s;
  }
  for (auto& [key, acc] : ci_acc) {
    CiStats s;
    s.cp = 100.0 * static_cast<double>(acc.covered) / acc.count;
    s.al = acc.length.value() / acc.count;
    rep.cis[key] = s;
  }

  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return rep;
}

}  // namespace zidrm
