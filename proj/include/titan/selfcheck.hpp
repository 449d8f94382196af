#pragma once

#include <iostream>

#include "titan/apps/synthetic.hpp"

namespace titan {

/// Fast invariant/oracle suite behind the CLI `check` subcommand:
/// majorization sampling for the five surrogate families, NSDP assertions on
/// a monitored NMF run, the scalar prox against a brute-force grid, gradient
/// checks of the masked least-squares kernels, and the PALM-reduction
/// equivalence of the solver with zero inertia.
class SelfCheck {
 public:
  explicit SelfCheck(std::ostream& os = std::cout) : os_(os) {}

  bool run_all() {
    bool ok = true;
    ok &= report("majorization sampling (5 families)", check_majorization_suite());
    ok &= report("NSDP assertions (monitored NMF run)", check_nsdp());
    ok &= report("scalar prox vs grid oracle", check_prox_grid());
    ok &= report("gradient checks (masked kernels)", check_gradients());
    ok &= report("PALM equivalence (zero-inertia reduction)", check_palm_equivalence());
    return ok;
  }

 private:
  std::ostream& os_;

  bool report(const char* name, bool ok) {
    os_ << (ok ? "[ok]   " : "[FAIL] ") << name << "\n";
    return ok;
  }

  bool check_majorization_suite() {
    const int samples = 200;
    // Lipschitz on both NMF blocks.
    auto planted = apps::synthesize_nmf(12, 9, 3, 2, 0.05, 11);
    auto kernel = std::make_shared<apps::NmfKernel>(planted.instance.M);
    ProblemSpec p = apps::make_nmf_problem(kernel, 2);
    auto cfgs = apps::nmf_surrogates(planted.instance, kernel);
    std::mt19937_64 rng(17);
    BlockVector y({random_uniform(12, 3, rng), random_uniform(3, 9, rng)});
    for (int i = 0; i < 2; ++i) {
      auto rep = check_majorization(cfgs[static_cast<std::size_t>(i)], i, p, y, samples, 1.0, 23 + i);
      if (rep.violations != 0 || rep.max_gap_at_anchor > 1e-10 * (1 + std::abs(p.eval_f(y)))) return false;
    }
    // Proximal on the same problem.
    SurrogateConfig prox_cfg;
    prox_cfg.family = ProximalSurrogate{2.5, {}};
    if (check_majorization(prox_cfg, 0, p, y, samples, 1.0, 29).violations != 0) return false;
    // Quadratic and Bregman on a small quadratic problem.
    if (!check_quad_bregman(samples)) return false;
    // Composite on a small MCP.
    auto inst = apps::synthesize_mcp(14, 10, 3, 0.05, 0.6, 0.7, 31);
    auto mk = std::make_shared<apps::McpKernel>(inst.observed, inst.lambda, inst.theta);
    ProblemSpec mp = apps::make_mcp_problem(mk);
    auto mcfgs = apps::mcp_surrogates(mk);
    std::mt19937_64 rng2(37);
    BlockVector ym({random_gaussian(14, 3, rng2), random_gaussian(3, 10, rng2)});
    for (int i = 0; i < 2; ++i)
      if (check_majorization(mcfgs[static_cast<std::size_t>(i)], i, mp, ym, samples, 0.8, 41 + i)
              .violations != 0)
        return false;
    return true;
  }

  bool check_quad_bregman(int samples) {
    // f(x) = (1/2) vec(x)' Q vec(x) + <b, x> on a single 2x3 block.
    std::mt19937_64 rng(43);
    Mat R = random_gaussian(6, 6, rng);
    Mat Q = R.transpose() * R + 0.5 * Mat::Identity(6, 6);
    Mat b = random_gaussian(2, 3, rng);
    ProblemSpec p;
    p.block_count = 1;
    p.eval_f = [Q, b](const BlockVector& x) {
      Eigen::Map<const Eigen::VectorXd> v(x.block(0).data(), 6);
      return 0.5 * v.dot(Eigen::VectorXd(Q * v)) + frob_dot(b, x.block(0));
    };
    p.eval_block_grad = [Q, b](int, const BlockVector& x) {
      Eigen::Map<const Eigen::VectorXd> v(x.block(0).data(), 6);
      Eigen::VectorXd g = Q * v;
      return Mat(Eigen::Map<const Mat>(g.data(), 2, 3) + b);
    };
    Mat H = Q + Mat::Identity(6, 6);
    SurrogateConfig qcfg;
    qcfg.family = QuadraticSurrogate{2.0, [H](int, const BlockVector&) { return H; }, {}};
    qcfg.g_convex = false;
    SurrogateConfig bcfg;
    BregmanSurrogate breg;
    breg.kappa = 2.0;
    breg.kernel = quadratic_kernel(H);
    breg.relative_lipschitz = [](int, const BlockVector&) { return 1.0; };
    bcfg.family = breg;
    BlockVector y({random_gaussian(2, 3, rng)});
    return check_majorization(qcfg, 0, p, y, samples, 1.5, 47).violations == 0 &&
           check_majorization(bcfg, 0, p, y, samples, 1.5, 53).violations == 0;
  }

  bool check_nsdp() {
    auto planted = apps::synthesize_nmf(30, 24, 4, 0, 0.02, 5);
    SolverOptions opts;
    opts.max_iters = 50;
    opts.monitor = NsdpMonitor::Full;
    opts.stop_tolerance.reset();
    auto res = apps::sparse_nmf_run(planted.instance, opts, 6);
    for (const auto& it : res.log.iterations)
      for (const auto& u : it.updates) {
        if (!u.cond4_ok) return false;
        if (u.nsdp_residual && *u.nsdp_residual < -1e-8 * (1 + std::abs(*u.f_after))) return false;
      }
    return true;
  }

  bool check_prox_grid() {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> uv(-5, 5), ug(0.05, 2), ut(0.1, 10);
    for (int t = 0; t < 50; ++t) {
      double v = uv(rng), gamma = ug(rng), theta = ut(rng);
      double x = prox_exponential(v, gamma, theta);
      auto q = [&](double z) {
        return 0.5 * (z - v) * (z - v) + gamma * (1 - std::exp(-theta * std::abs(z)));
      };
      double lo = -std::abs(v) - 1, hi = std::abs(v) + 1, best = q(0);
      const int grid = 200000;
      for (int i = 0; i <= grid; ++i) best = std::min(best, q(lo + (hi - lo) * i / grid));
      if (q(x) > best + 1e-8) return false;
    }
    return true;
  }

  bool check_gradients() {
    auto inst = apps::synthesize_mcp(16, 12, 3, 0.1, 0.5, 0.7, 67);
    apps::McpKernel k(inst.observed, inst.lambda, inst.theta);
    std::mt19937_64 rng(71);
    BlockVector x({random_gaussian(16, 3, rng), random_gaussian(3, 12, rng)});
    for (int i = 0; i < 2; ++i) {
      auto eval = [&](const Mat& b) { return k.psi(with_block(x, i, b)); };
      if (grad_check(eval, k.psi_grad(i, x), x.block(i)) > 1e-6) return false;
    }
    return true;
  }

  bool check_palm_equivalence() {
    auto inst = apps::synthesize_mcp(20, 15, 3, 0.05, 0.5, 0.7, 73);
    inst.variant = apps::McpVariant::TitanNo;
    apps::McpKernel k(inst.observed, inst.lambda, inst.theta, inst.power_opts);
    auto [U, V] = apps::mcp_initial_point(inst.observed, inst.rank, 99);
    SolverOptions opts;
    opts.max_iters = 20;
    opts.stop_tolerance.reset();
    opts.monitor = NsdpMonitor::Off;
    inst.rmse_every = 1000;
    auto res = apps::mcp_run(inst, opts, 99);
    // Hand-rolled proximal-gradient BCD with the same composite linearization.
    for (int it = 0; it < 20; ++it) {
      BlockVector x({U, V});
      double L1 = k.lipschitz(0, x);
      Mat W = k.phi_grad(0, BlockVector({Mat(U.cwiseAbs()), Mat(V.cwiseAbs())}));
      U = soft_threshold_weighted(Mat(U - k.psi_grad(0, x) / L1), W, 1.0 / L1);
      BlockVector x2({U, V});
      double L2 = k.lipschitz(1, x2);
      Mat W2 = k.phi_grad(1, BlockVector({Mat(U.cwiseAbs()), Mat(V.cwiseAbs())}));
      V = soft_threshold_weighted(Mat(V - k.psi_grad(1, x2) / L2), W2, 1.0 / L2);
    }
    return (res.U - U).cwiseAbs().maxCoeff() <= 1e-12 && (res.V - V).cwiseAbs().maxCoeff() <= 1e-12;
  }
};

}  // namespace titan
