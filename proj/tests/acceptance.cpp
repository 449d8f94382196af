// Acceptance suite: runs each criterion at its stated tolerance and prints
// one pass/fail line. Criteria 10 and 11 need external datasets and are
// skipped (not failed) unless TITAN_ML1M / TITAN_CBCL point at the files.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>

#include "titan/apps/synthetic.hpp"
#include "titan/config.hpp"
#include "titan/io.hpp"
#include "titan/selfcheck.hpp"

using namespace titan;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << name;
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << std::endl;
  if (!ok) ++failures;
}

void skip(int id, const std::string& name, const std::string& why) {
  std::cout << "[SKIP] criterion " << id << ": " << name << "  (" << why << ")" << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --------------------------------------------------------------------------
// 1. Majorization suite: five families, 1000 samples each, zero violations.
// --------------------------------------------------------------------------
void criterion_1() {
  auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;

  // Lipschitz (both NMF blocks, exact spectral constants)
  auto planted = apps::synthesize_nmf(20, 16, 4, 0, 0.02, 101);
  auto kernel = std::make_shared<apps::NmfKernel>(planted.instance.M);
  ProblemSpec p = apps::make_nmf_problem(kernel, planted.instance.effective_sparsity());
  auto cfgs = apps::nmf_surrogates(planted.instance, kernel);
  std::mt19937_64 rng(102);
  BlockVector y({random_uniform(20, 4, rng), random_uniform(4, 16, rng)});
  double fy = p.eval_f(y);
  for (int i = 0; i < 2 && ok; ++i) {
    auto rep = check_majorization(cfgs[static_cast<std::size_t>(i)], i, p, y, 1000, 1.0, 103 + i);
    ok = rep.violations == 0 && rep.max_gap_at_anchor <= 1e-10 * (1 + std::abs(fy));
    if (!ok) detail = "lipschitz block " + std::to_string(i);
  }

  // Proximal
  if (ok) {
    SurrogateConfig prox;
    prox.family = ProximalSurrogate{3.0, {}};
    auto rep = check_majorization(prox, 0, p, y, 1000, 2.0, 105);
    ok = rep.violations == 0 && rep.max_gap_at_anchor <= 1e-10 * (1 + std::abs(fy));
    if (!ok) detail = "proximal";
  }

  // Quadratic: f = 0.5 v'Qv + <b, x>, H = Q + I
  if (ok) {
    std::mt19937_64 r2(107);
    Mat R = random_gaussian(6, 6, r2);
    Mat Q = R.transpose() * R + 0.5 * Mat::Identity(6, 6);
    Mat b = random_gaussian(2, 3, r2);
    ProblemSpec qp;
    qp.block_count = 1;
    qp.eval_f = [Q, b](const BlockVector& x) {
      Eigen::Map<const Eigen::VectorXd> v(x.block(0).data(), 6);
      return 0.5 * v.dot(Eigen::VectorXd(Q * v)) + frob_dot(b, x.block(0));
    };
    qp.eval_block_grad = [Q, b](int, const BlockVector& x) {
      Eigen::Map<const Eigen::VectorXd> v(x.block(0).data(), 6);
      Eigen::VectorXd g = Q * v;
      return Mat(Eigen::Map<const Mat>(g.data(), 2, 3) + b);
    };
    Mat H = Q + Mat::Identity(6, 6);
    SurrogateConfig quad;
    quad.family = QuadraticSurrogate{1.5, [H](int, const BlockVector&) { return H; }, {}};
    BlockVector yq({random_gaussian(2, 3, r2)});
    double fq = qp.eval_f(yq);
    auto rep = check_majorization(quad, 0, qp, yq, 1000, 2.0, 109);
    ok = rep.violations == 0 && rep.max_gap_at_anchor <= 1e-10 * (1 + std::abs(fq));
    if (!ok) detail = "quadratic";

    // Bregman: f = 0.25||x||^4 + 0.5||Bx||^2 relative to 0.25||x||^4 + 0.5||x||^2
    if (ok) {
      Mat B = random_gaussian(4, 4, r2);
      double relL = std::max(
          1.0, Eigen::SelfAdjointEigenSolver<Mat>(Mat(B.transpose() * B)).eigenvalues().maxCoeff());
      ProblemSpec bp;
      bp.block_count = 1;
      bp.eval_f = [B](const BlockVector& x) {
        double n2 = x.block(0).squaredNorm();
        return 0.25 * n2 * n2 + 0.5 * (B * x.block(0)).squaredNorm();
      };
      bp.eval_block_grad = [B](int, const BlockVector& x) {
        const Mat& v = x.block(0);
        return Mat(v.squaredNorm() * v + B.transpose() * (B * v));
      };
      KernelDescriptor quartic;
      quartic.value = [](const Mat& x) {
        double n2 = x.squaredNorm();
        return 0.25 * n2 * n2 + 0.5 * n2;
      };
      quartic.grad = [](const Mat& x) { return Mat((x.squaredNorm() + 1.0) * x); };
      quartic.strong_convexity = 1.0;
      BregmanSurrogate bs;
      bs.kappa = 1.2;
      bs.kernel = quartic;
      bs.relative_lipschitz = [relL](int, const BlockVector&) { return relL; };
      SurrogateConfig breg;
      breg.family = bs;
      BlockVector yb({random_gaussian(4, 1, r2)});
      double fb = bp.eval_f(yb);
      auto rep2 = check_majorization(breg, 0, bp, yb, 1000, 1.5, 111);
      ok = rep2.violations == 0 && rep2.max_gap_at_anchor <= 1e-10 * (1 + std::abs(fb));
      if (!ok) detail = "bregman";
    }
  }

  // Composite (MCP)
  if (ok) {
    auto inst = apps::synthesize_mcp(18, 14, 3, 0.05, 0.5, 0.7, 113);
    auto mk = std::make_shared<apps::McpKernel>(inst.observed, inst.lambda, inst.theta);
    ProblemSpec mp = apps::make_mcp_problem(mk);
    auto mcfgs = apps::mcp_surrogates(mk);
    std::mt19937_64 r3(115);
    BlockVector ym({random_gaussian(18, 3, r3), random_gaussian(3, 14, r3)});
    double fm = mp.eval_f(ym);
    for (int i = 0; i < 2 && ok; ++i) {
      auto rep = check_majorization(mcfgs[static_cast<std::size_t>(i)], i, mp, ym, 1000, 1.0, 117 + i);
      ok = rep.violations == 0 && rep.max_gap_at_anchor <= 1e-10 * (1 + std::abs(fm));
      if (!ok) detail = "composite block " + std::to_string(i);
    }
  }

  double secs = seconds_since(t0);
  report(1, "majorization suite (5 families, 1000 samples)", ok && secs < 10.0,
         detail.empty() ? "t=" + std::to_string(secs) + "s" : detail);
}

// Shared run for criteria 2 and 3.
struct NsdpRun {
  RunLog log;
};

NsdpRun nsdp_run_cache;

// --------------------------------------------------------------------------
// 2. NSDP residuals and exact Condition 4 on a 200-iteration monitored run.
// --------------------------------------------------------------------------
void criterion_2() {
  auto t0 = std::chrono::steady_clock::now();
  auto planted = apps::synthesize_nmf(100, 80, 5, 0, 0.01, 201);
  SolverOptions opts;
  opts.max_iters = 200;
  opts.monitor = NsdpMonitor::Full;
  opts.stop_tolerance.reset();
  auto res = apps::sparse_nmf_run(planted.instance, opts, 202);
  bool ok = res.log.iterations.size() == 200;
  std::string detail;
  for (const auto& it : res.log.iterations) {
    for (const auto& u : it.updates) {
      if (!u.cond4_ok) {
        ok = false;
        detail = "condition 4 violated at iter " + std::to_string(it.iter);
      }
      if (u.nsdp_residual && *u.nsdp_residual < -1e-8 * (1 + std::abs(*u.f_after))) {
        ok = false;
        detail = "NSDP residual " + std::to_string(*u.nsdp_residual) + " at iter " +
                 std::to_string(it.iter);
      }
    }
  }
  nsdp_run_cache.log = res.log;
  double secs = seconds_since(t0);
  report(2, "NSDP residuals and exact Condition 4 (200-iter sparse NMF)", ok && secs < 30.0,
         detail.empty() ? "t=" + std::to_string(secs) + "s" : detail);
}

// --------------------------------------------------------------------------
// 3. Telescoped descent inequality for every K, cyclic and essentially cyclic.
// --------------------------------------------------------------------------
void criterion_3() {
  bool ok = !nsdp_run_cache.log.iterations.empty();
  std::string detail = ok ? "" : "criterion 2 run unavailable";
  for (long K = 1; ok && K <= static_cast<long>(nsdp_run_cache.log.iterations.size()); ++K)
    if (!telescoping_check(nsdp_run_cache.log, nsdp_run_cache.log.C, K)) {
      ok = false;
      detail = "cyclic K=" + std::to_string(K);
    }
  if (ok) {
    auto planted = apps::synthesize_nmf(60, 48, 4, 0, 0.01, 301);
    apps::SparseNmfInstance inst = planted.instance;
    inst.repeat_u = 5;
    inst.repeat_v = 5;  // interval T = 10
    SolverOptions opts;
    opts.max_iters = 200;
    opts.stop_tolerance.reset();
    auto res = apps::sparse_nmf_run(inst, opts, 302);
    for (long K = 1; ok && K <= static_cast<long>(res.log.iterations.size()); ++K)
      if (!telescoping_check(res.log, res.log.C, K)) {
        ok = false;
        detail = "essentially cyclic K=" + std::to_string(K);
      }
  }
  report(3, "telescoped descent inequality (cyclic + essentially cyclic T=10)", ok, detail);
}

// --------------------------------------------------------------------------
// 4. Restart monotonicity under deliberately over-aggressive extrapolation.
// --------------------------------------------------------------------------
void criterion_4() {
  auto planted = apps::synthesize_nmf(50, 40, 4, 0, 0.05, 401);
  auto kernel = std::make_shared<apps::NmfKernel>(planted.instance.M);
  ProblemSpec p = apps::make_nmf_problem(kernel, planted.instance.effective_sparsity());
  auto cfgs = apps::nmf_surrogates(planted.instance, kernel);
  ExtrapolationConfig ex;
  ex.kind = InertiaKind::NesterovTwoPoint;
  ex.beta_scale = 2.0;  // twice the admissible bound
  ex.restart_enabled = true;
  SolverOptions opts;
  opts.max_iters = 500;
  opts.stop_tolerance.reset();
  std::mt19937_64 rng(402);
  int s = planted.instance.effective_sparsity();
  BlockVector x0({hard_threshold_columns(random_uniform(50, 4, rng), s), random_uniform(4, 40, rng)});
  auto res = titan_run(p, cfgs, ex, Schedule::cyclic(2), opts, x0);
  long restarts = 0;
  for (const auto& it : res.log.iterations) restarts += it.restarted ? 1 : 0;
  bool ok = res.log.objective_nonincreasing() && restarts >= 1;
  report(4, "restart keeps F nonincreasing with 2x-overdriven beta", ok,
         std::to_string(restarts) + " restarts over " + std::to_string(res.log.iterations.size()) +
             " iterations");
}

// --------------------------------------------------------------------------
// 5. PALM equivalence: zero-inertia TITAN == independent BCD loop to 1e-12.
// --------------------------------------------------------------------------
void criterion_5() {
  auto inst = apps::synthesize_mcp(50, 40, 4, 0.05, 0.5, 0.7, 501);
  inst.variant = apps::McpVariant::TitanNo;
  inst.rmse_every = 1000;
  SolverOptions opts;
  opts.max_iters = 100;
  opts.stop_tolerance.reset();

  // record the solver trajectory
  std::vector<Mat> U_solver, V_solver;
  opts.progress_metric = [&](long, const BlockVector& x) {
    U_solver.push_back(x.block(0));
    V_solver.push_back(x.block(1));
    return 0.0;
  };
  auto res = apps::mcp_run(inst, opts, 502);

  apps::McpKernel k(inst.observed, inst.lambda, inst.theta, inst.power_opts);
  auto [U, V] = apps::mcp_initial_point(inst.observed, inst.rank, 502);
  bool ok = U_solver.size() == 100;
  double worst = 0;
  for (std::size_t it = 0; it < 100 && ok; ++it) {
    BlockVector x({U, V});
    double L1 = k.lipschitz(0, x);
    Mat W = k.phi_grad(0, BlockVector({Mat(U.cwiseAbs()), Mat(V.cwiseAbs())}));
    U = soft_threshold_weighted(Mat(U - k.psi_grad(0, x) / L1), W, 1.0 / L1);
    BlockVector x2({U, V});
    double L2 = k.lipschitz(1, x2);
    Mat W2 = k.phi_grad(1, BlockVector({Mat(U.cwiseAbs()), Mat(V.cwiseAbs())}));
    V = soft_threshold_weighted(Mat(V - k.psi_grad(1, x2) / L2), W2, 1.0 / L2);
    worst = std::max(worst, (U_solver[it] - U).cwiseAbs().maxCoeff());
    worst = std::max(worst, (V_solver[it] - V).cwiseAbs().maxCoeff());
    ok = worst <= 1e-12;
  }
  report(5, "zero-inertia TITAN matches an independent BCD loop (100 iters)", ok,
         "max deviation " + io::format_double(worst));
}

// --------------------------------------------------------------------------
// 6. Closed-form step optimality against per-entry numerical minimizers.
// --------------------------------------------------------------------------
// coarse grid then golden-section refinement; the subproblem objectives are
// convex (a quadratic plus a weighted absolute value), hence unimodal
double golden_min_piecewise(const std::function<double(double)>& q, double lo, double hi) {
  const int grid = 4000;
  double best_x = lo, best = q(lo);
  for (int i = 1; i <= grid; ++i) {
    double x = lo + (hi - lo) * i / grid;
    double v = q(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - (hi - lo) / grid);
  double b = std::min(hi, best_x + (hi - lo) / grid);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 200; ++it) {
    double c = b - gr * (b - a), d = a + gr * (b - a);
    if (q(c) < q(d))
      b = d;
    else
      a = c;
  }
  // the weighted-l1 objectives favor exact zeros; keep 0 on ties
  double mid = 0.5 * (a + b);
  return (lo <= 0 && hi >= 0 && q(0) <= q(mid)) ? 0.0 : mid;
}

void criterion_6() {
  bool ok = true;
  std::string detail;
  std::mt19937_64 rng(601);

  // U-step subproblem: <Gpsi, U> + (L/2)||U - Ubar||^2 + <W, |U|>
  for (int t = 0; t < 100 && ok; ++t) {
    auto inst = apps::synthesize_mcp(6, 4, 2, 0.1, 0.9, 0.65, 602 + static_cast<std::uint64_t>(t));
    apps::McpKernel k(inst.observed, inst.lambda, inst.theta);
    Mat U = random_gaussian(6, 2, rng), V = random_gaussian(2, 4, rng);
    Mat Ubar = U + 0.3 * random_gaussian(6, 2, rng);
    BlockVector ybar({Ubar, V});
    double L1 = k.lipschitz(0, ybar);
    Mat G = k.psi_grad(0, ybar);
    Mat W = k.phi_grad(0, BlockVector({Mat(U.cwiseAbs()), Mat(V.cwiseAbs())}));
    Mat closed = soft_threshold_weighted(Mat(Ubar - G / L1), W, 1.0 / L1);

    auto subobj = [&](const Mat& X) {
      return frob_dot(G, X - Ubar) + 0.5 * L1 * (X - Ubar).squaredNorm() +
             frob_dot(W, X.cwiseAbs());
    };
    Mat numeric(6, 2);
    for (Index a = 0; a < 6; ++a)
      for (Index b = 0; b < 2; ++b) {
        auto q1 = [&](double x) {
          double d = x - Ubar(a, b);
          return G(a, b) * d + 0.5 * L1 * d * d + W(a, b) * std::abs(x);
        };
        double span = std::abs(Ubar(a, b)) + std::abs(G(a, b)) / L1 + 1.0;
        numeric(a, b) = golden_min_piecewise(q1, -span + Ubar(a, b), span + Ubar(a, b));
      }
    double gap = subobj(closed) - subobj(numeric);
    if (gap > 1e-9) {
      ok = false;
      detail = "U-step gap " + io::format_double(gap);
    }
  }

  // soft threshold against the 1-d oracle, 1000 scalars, argument to 1e-6
  std::uniform_real_distribution<double> up(-3, 3), uw(0, 2), ut(0.05, 1.5);
  for (int t = 0; t < 1000 && ok; ++t) {
    double pv = up(rng), w = uw(rng), tau = ut(rng);
    Mat P(1, 1), W(1, 1);
    P << pv;
    W << w;
    double ours = soft_threshold_weighted(P, W, tau)(0, 0);
    auto q = [&](double x) { return 0.5 * (x - pv) * (x - pv) + tau * w * std::abs(x); };
    double oracle = golden_min_piecewise(q, -std::abs(pv) - 1, std::abs(pv) + 1);
    if (std::abs(ours - oracle) > 1e-6) {
      ok = false;
      detail = "soft threshold arg deviation " + io::format_double(std::abs(ours - oracle));
    }
  }
  report(6, "closed-form steps match per-entry numerical minimizers", ok, detail);
}

// --------------------------------------------------------------------------
// 7. Scalar prox against a 10^6-point grid on 1000 triples.
// --------------------------------------------------------------------------
void criterion_7() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(701);
  std::uniform_real_distribution<double> uv(-5, 5), ug(0.05, 2), ut(0.1, 10);
  bool ok = true;
  std::string detail;
  for (int t = 0; t < 1000 && ok; ++t) {
    double v = uv(rng), gamma = ug(rng), theta = ut(rng);
    double x = prox_exponential(v, gamma, theta);
    double qx = 0.5 * (x - v) * (x - v) + gamma * (1 - std::exp(-theta * std::abs(x)));
    // grid on [-|v|-1, |v|+1]; exp evaluated by recurrence along each half
    const int n = 1000000;
    double lo = -std::abs(v) - 1, hi = std::abs(v) + 1;
    double dx = (hi - lo) / n;
    double best = std::numeric_limits<double>::infinity();
    double mult = std::exp(-theta * dx);
    // negative half: from 0 down to lo; positive half: from 0 up to hi
    double e = 1.0;
    for (double z = 0; z >= lo; z -= dx) {
      double q = 0.5 * (z - v) * (z - v) + gamma * (1 - e);
      if (q < best) best = q;
      e *= mult;
    }
    e = 1.0;
    for (double z = 0; z <= hi; z += dx) {
      double q = 0.5 * (z - v) * (z - v) + gamma * (1 - e);
      if (q < best) best = q;
      e *= mult;
    }
    if (qx > best + 1e-8) {
      ok = false;
      detail = "margin " + io::format_double(qx - best) + " at v=" + io::format_double(v);
    }
  }
  double secs = seconds_since(t0);
  report(7, "scalar prox beats/ties the 1e6-point grid (1000 triples)", ok && secs < 60.0,
         detail.empty() ? "t=" + std::to_string(secs) + "s" : detail);
}

// --------------------------------------------------------------------------
// 8. Numerics: spectral norms vs dense eigendecomposition; gradient checks.
// --------------------------------------------------------------------------
void criterion_8() {
  bool ok = true;
  std::string detail;
  PowerIterOptions popts;
  popts.tol = 1e-12;
  popts.max_iters = 2000;
  std::mt19937_64 rng(801);
  for (int t = 0; t < 50 && ok; ++t) {
    Index rows = 2 + static_cast<Index>(rng() % 49);
    Index cols = 2 + static_cast<Index>(rng() % 49);
    Mat B = random_gaussian(rows, cols, rng);
    Mat gram = (rows <= cols) ? Mat(B * B.transpose()) : Mat(B.transpose() * B);
    double truth = Eigen::SelfAdjointEigenSolver<Mat>(gram).eigenvalues().maxCoeff();
    double est = spectral_norm_gram(B, GramSide::Left, popts);
    if (std::abs(est - truth) > 1e-6 * truth) {
      ok = false;
      detail = "spectral rel err " + io::format_double(std::abs(est - truth) / truth);
    }
  }
  if (ok) {
    auto inst = apps::synthesize_mcp(20, 15, 3, 0.1, 0.5, 0.7, 803);
    apps::McpKernel k(inst.observed, inst.lambda, inst.theta);
    BlockVector x({random_gaussian(20, 3, rng), random_gaussian(3, 15, rng)});
    for (int i = 0; i < 2 && ok; ++i) {
      auto eval = [&](const Mat& b) { return k.psi(with_block(x, i, b)); };
      double err = grad_check(eval, k.psi_grad(i, x), x.block(i));
      if (err > 1e-6) {
        ok = false;
        detail = "grad_check " + io::format_double(err);
      }
    }
  }
  report(8, "spectral norms vs dense eig; psi gradient checks", ok, detail);
}

// --------------------------------------------------------------------------
// 9. Acceleration direction on 10 seeded MCP instances.
// --------------------------------------------------------------------------
void criterion_9() {
  auto t0 = std::chrono::steady_clock::now();
  int wins_objective = 0, wins_speed = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto base = apps::synthesize_mcp(500, 300, 8, 0.01, 0.15, 0.7, 900 + seed);
    SolverOptions opts;
    opts.max_iters = 100;
    opts.stop_tolerance.reset();
    opts.monitor = NsdpMonitor::Off;
    apps::McpInstance ie = base, in = base;
    ie.variant = apps::McpVariant::TitanExtra;
    in.variant = apps::McpVariant::TitanNo;
    ie.rmse_every = 1000;
    in.rmse_every = 1000;
    auto re = apps::mcp_run(ie, opts, seed);
    auto rn = apps::mcp_run(in, opts, seed);
    double f_extra = re.log.iterations.back().objective;
    double f_no = rn.log.iterations.back().objective;
    if (f_extra <= f_no) ++wins_objective;
    long reach = -1;
    for (std::size_t k = 0; k < re.log.iterations.size(); ++k)
      if (re.log.iterations[k].objective <= f_no) {
        reach = static_cast<long>(k) + 1;
        break;
      }
    if (reach > 0 && reach <= 50) ++wins_speed;
  }
  double secs = seconds_since(t0);
  bool ok = wins_objective >= 8 && wins_speed >= 8 && secs < 300.0;
  report(9, "extrapolation wins on objective and reaches the target 2x faster", ok,
         "objective " + std::to_string(wins_objective) + "/10, speed " +
             std::to_string(wins_speed) + "/10, t=" + std::to_string(secs) + "s");
}

// --------------------------------------------------------------------------
// 10/11. Optional dataset reproductions.
// --------------------------------------------------------------------------
void criterion_10() {
  const char* path = std::getenv("TITAN_ML1M");
  if (!path) {
    skip(10, "MovieLens-1M RMSE reproduction", "set TITAN_ML1M=<ratings.dat> to enable");
    return;
  }
  auto data = io::load_ratings(path, io::RatingsFormat::DoubleColon);
  double sum_extra = 0, sum_no = 0;
  const int n_seeds = 20;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    auto [train, test] = io::split_train_test(data.mask, 0.7, seed);
    apps::McpInstance inst;
    inst.observed = train;
    inst.test = test;
    inst.rank = 5;
    SolverOptions opts;
    opts.max_iters = 1000000;
    opts.time_budget_seconds = 20.0;
    opts.stop_tolerance.reset();
    inst.variant = apps::McpVariant::TitanExtra;
    sum_extra += apps::mcp_run(inst, opts, seed).final_rmse;
    inst.variant = apps::McpVariant::TitanNo;
    sum_no += apps::mcp_run(inst, opts, seed).final_rmse;
  }
  double mean_extra = sum_extra / n_seeds, mean_no = sum_no / n_seeds;
  bool ok = std::abs(mean_extra - 0.7509) <= 0.01 && std::abs(mean_no - 0.7514) <= 0.01;
  report(10, "MovieLens-1M mean RMSE near the reported values", ok,
         "extra " + io::format_double(mean_extra) + ", no " + io::format_double(mean_no));
}

void criterion_11() {
  const char* path = std::getenv("TITAN_CBCL");
  if (!path) {
    skip(11, "CBCL sparse-NMF relative error reproduction", "set TITAN_CBCL=<matrix.csv> to enable");
    return;
  }
  Mat M = io::load_dense_csv(path);
  double sum = 0;
  const int n_seeds = 20;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    apps::SparseNmfInstance inst;
    inst.M = M;
    inst.rank = 25;
    inst.sparsity = 7;
    SolverOptions opts;
    opts.max_iters = 1000000000;
    opts.time_budget_seconds = 100.0;
    opts.stop_tolerance.reset();
    sum += apps::sparse_nmf_run(inst, opts, seed).final_rel_error;
  }
  double mean = sum / n_seeds;
  report(11, "CBCL mean relative error near the reported value", std::abs(mean - 0.11939) <= 0.003,
         "mean " + io::format_double(mean));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::cout << (failures == 0 ? "ACCEPTANCE: all criteria passed"
                              : "ACCEPTANCE: " + std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
