#pragma once

#include <chrono>
#include <optional>

#include "titan/extrapolation.hpp"

namespace titan {

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

/// Block visiting order for one outer iteration. The essentially cyclic rule
/// carries its own order whose length is the interval T; every window of T
/// consecutive updates of the repeated order touches each block at least once,
/// which holds exactly when the order itself covers all blocks.
class Schedule {
 public:
  static Schedule cyclic(int blocks) {
    Schedule s;
    s.blocks_ = blocks;
    s.cyclic_ = true;
    s.order_.resize(static_cast<std::size_t>(blocks));
    for (int i = 0; i < blocks; ++i) s.order_[static_cast<std::size_t>(i)] = i;
    return s;
  }

  static Schedule essentially_cyclic(std::vector<int> order, int blocks) {
    if (blocks < 1) throw ConfigError("Schedule: blocks >= 1 required");
    if (static_cast<int>(order.size()) < blocks)
      throw ConfigError("Schedule: interval T must be >= number of blocks");
    std::vector<bool> seen(static_cast<std::size_t>(blocks), false);
    for (int i : order) {
      if (i < 0 || i >= blocks) throw ConfigError("Schedule: block index out of range");
      seen[static_cast<std::size_t>(i)] = true;
    }
    for (bool b : seen)
      if (!b) throw ConfigError("Schedule: order must touch every block within the interval");
    Schedule s;
    s.blocks_ = blocks;
    s.cyclic_ = false;
    s.order_ = std::move(order);
    return s;
  }

  const std::vector<int>& order() const { return order_; }
  int interval() const { return static_cast<int>(order_.size()); }
  int blocks() const { return blocks_; }
  bool is_cyclic() const { return cyclic_; }

 private:
  std::vector<int> order_;
  int blocks_ = 0;
  bool cyclic_ = true;
};

// ---------------------------------------------------------------------------
// Logging
// ---------------------------------------------------------------------------

struct BlockUpdateRecord {
  int block = 0;
  double beta = 0, tau = 0, alpha = 0;
  double beta_admissible = 0;  // the bound actually used for this update
  double A = 0, rho = 0, gamma = 0, eta = 0;
  double step_prev_normsq = 0;  // ||x_i^k - x_i^{prev}||^2
  double step_cur_normsq = 0;   // ||x_i^{k+1} - x_i^k||^2
  double rel_change = 0;        // ||dx|| / (1 + ||x_new||)
  double inertia_bound = 0;     // A * ||x_i^k - x_i^{prev}||  (certified ||G|| bound)
  bool cond4_ok = true;         // gamma <= C * eta_of_previous_update
  std::optional<double> f_before, f_after, nsdp_residual;
  std::optional<double> nsdp_residual_restart_eta;  // residual with eta = rho/2 on restart redo
};

struct IterationRecord {
  long iter = 0;
  double objective = 0;  // F(x^{k+1})
  double metric = std::numeric_limits<double>::quiet_NaN();
  double wall_seconds = 0;
  bool restarted = false;
  double rejected_objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<BlockUpdateRecord> updates;

  double max_gamma() const {
    double v = 0;
    for (const auto& u : updates) v = std::max(v, u.gamma);
    return v;
  }
  double min_eta() const {
    double v = std::numeric_limits<double>::infinity();
    for (const auto& u : updates) v = std::min(v, u.eta);
    return updates.empty() ? 0 : v;
  }
  double max_A() const {
    double v = 0;
    for (const auto& u : updates) v = std::max(v, u.A);
    return v;
  }
  double max_inertia_bound() const {
    double v = 0;
    for (const auto& u : updates) v = std::max(v, u.inertia_bound);
    return v;
  }
};

struct RunLog {
  double f_initial = 0;  // F(x^0)
  double C = 0;          // Condition 4 constant used by the run
  std::vector<IterationRecord> iterations;
  std::string stop_reason;
  long objective_evals = 0;
  double total_seconds = 0;

  bool objective_nonincreasing() const {
    double prev = f_initial;
    for (const auto& r : iterations) {
      if (r.objective > prev) return false;
      prev = r.objective;
    }
    return true;
  }
};

enum class NsdpMonitor { Off, Sampled, Full };

struct SolverOptions {
  long max_iters = 1000;
  std::optional<double> time_budget_seconds;
  std::optional<double> stop_tolerance = 1e-9;  // on max-block relative change
  std::optional<bool> restart_enabled;          // overrides ExtrapolationConfig when set
  NsdpMonitor monitor = NsdpMonitor::Sampled;
  int monitor_every = 10;
  std::uint64_t seed = 0;
  std::function<double(long, const BlockVector&)> progress_metric;

  void validate() const {
    bool any = max_iters >= 0 || time_budget_seconds.has_value() || stop_tolerance.has_value();
    if (!any) throw ConfigError("SolverOptions: at least one stopping criterion required");
    if (monitor == NsdpMonitor::Sampled && monitor_every < 1)
      throw ConfigError("SolverOptions: monitor_every >= 1");
  }
};

// ---------------------------------------------------------------------------
// NSDP and telescoping monitors
// ---------------------------------------------------------------------------

/// Residual of the nearly-sufficiently-decreasing property:
///   (F_before + (gamma/2)||dx_prev||^2) - (F_after + (eta/2)||dx_cur||^2).
/// Nonnegative (up to rounding) for steps produced under Theorem-3 constants.
inline double nsdp_check(double F_before, double F_after, double gamma, double eta,
                         double step_prev_normsq, double step_cur_normsq) {
  return (F_before + 0.5 * gamma * step_prev_normsq) - (F_after + 0.5 * eta * step_cur_normsq);
}

/// Checks the telescoped descent inequality over the first K outer iterations:
///   F(x^K) + (1-C) sum_{k<K} sum_upd (eta/2)||dx||^2
///     <= F(x^0) + sum_i (gamma_i^0/2)||x_i^0 - x_i^{-1}||^2
/// (the right-hand term uses eta_i^{-1} = gamma_i^0 / C). Holds within 1e-8
/// relative slack. The same accumulation covers the essentially cyclic rule,
/// whose partitions coincide with outer iterations.
inline bool telescoping_check(const RunLog& log, double C, long K, double rel_slack = 1e-8) {
  if (K < 1 || K > static_cast<long>(log.iterations.size()))
    throw ConfigError("telescoping_check: K out of range");
  double decrease_sum = 0;
  std::unordered_set<int> first_seen;
  double rhs = log.f_initial;
  for (long k = 0; k < K; ++k) {
    for (const auto& u : log.iterations[static_cast<std::size_t>(k)].updates) {
      decrease_sum += 0.5 * u.eta * u.step_cur_normsq;
      if (first_seen.insert(u.block).second) rhs += 0.5 * u.gamma * u.step_prev_normsq;
    }
  }
  // Blocks first updated after iteration K contribute nothing to either side.
  double lhs = log.iterations[static_cast<std::size_t>(K - 1)].objective + (1.0 - C) * decrease_sum;
  return lhs - rhs <= rel_slack * (1.0 + std::abs(rhs));
}

// ---------------------------------------------------------------------------
// Solver state and the per-block TITAN update
// ---------------------------------------------------------------------------

/// Mutable state owned by one solver run. prev holds, per block, the value the
/// block had before its most recent update (initialized to x^{-1}); this is
/// the x_i^{prev} register of the essentially cyclic bookkeeping and reduces
/// to x_i^{k-1} under the cyclic rule.
struct SolverState {
  BlockVector x;
  BlockVector prev;
  std::vector<double> L_reg;    // block constant at last update (< 0: unset)
  std::vector<double> rho_reg;  // modulus at last update (< 0: unset)
  std::vector<double> eta_reg;  // eta at last update (< 0: unset)
  MuSchedule mu;
  double nesterov_weight = 0;
  long objective_evals = 0;

  static SolverState init(const BlockVector& x0, const std::optional<BlockVector>& x_minus1) {
    SolverState st;
    st.x = x0;
    st.prev = x_minus1 ? *x_minus1 : x0;  // x^{-1} defaults to x^0
    if (!st.prev.same_shape(x0)) throw ShapeError("titan: x^{-1} shape mismatch");
    st.L_reg.assign(static_cast<std::size_t>(x0.block_count()), -1.0);
    st.rho_reg.assign(static_cast<std::size_t>(x0.block_count()), -1.0);
    st.eta_reg.assign(static_cast<std::size_t>(x0.block_count()), -1.0);
    return st;
  }

  struct Snapshot {
    BlockVector x, prev;
    std::vector<double> L_reg, rho_reg, eta_reg;
  };
  Snapshot snapshot() const { return {x, prev, L_reg, rho_reg, eta_reg}; }
  void restore(const Snapshot& s) {
    x = s.x;
    prev = s.prev;
    L_reg = s.L_reg;
    rho_reg = s.rho_reg;
    eta_reg = s.eta_reg;
  }
};

namespace detail {

inline double inertia_a_factor(InertiaKind kind, ConvexityMode mode, double kappa,
                               double tau_ratio, double alpha_ratio) {
  bool block_f_convex = mode != ConvexityMode::General;
  switch (kind) {
    case InertiaKind::NoInertia:
      return 1.0;
    case InertiaKind::HeavyBall:
      return 1.0;
    case InertiaKind::NesterovTwoPoint:
      return (block_f_convex && tau_ratio <= 1.0) ? 1.0 : (tau_ratio + kappa) / kappa;
    case InertiaKind::HessianDamping:
      return (block_f_convex && alpha_ratio <= 1.0) ? 1.0 : 1.0 + alpha_ratio;
    case InertiaKind::BregmanHeavyBallLineSearch:
      return 1.0;
  }
  return 1.0;
}

}  // namespace detail

// Lipschitz-family modulus without re-reading the callback.
inline double g_rho_lipschitz(double kappa, double L, bool g_convex) {
  double rho = g_convex ? kappa * L : (kappa - 1.0) * L;
  if (rho <= 0)
    throw ConfigError("surrogate modulus nonpositive: kappa = 1 with nonconvex g");
  return rho;
}

/// One TITAN block update (Algorithm step 4): solves
///   x_i^{k+1} in argmin_{x_i in X_i} u_i(x_i, x^{k,i-1}) - <G_i^k, x_i> + g_i(x_i),
/// commits the result into state, and returns the step diagnostics.
/// force_no_inertia re-runs the update with G = 0 (the restart regime).
inline BlockUpdateRecord titan_block_step(const ProblemSpec& p, const SurrogateConfig& cfg,
                                          const ExtrapolationConfig& ex, SolverState& state,
                                          int i, bool force_no_inertia = false) {
  const BlockVector& y = state.x;  // x^{k,i-1}
  const Mat& xi = y.block(i);
  const std::size_t iu = static_cast<std::size_t>(i);
  const Mat delta_prev = xi - state.prev.block(i);
  const double dp2 = delta_prev.squaredNorm();
  const double nu = ex.nu_of(i);
  const ConvexityMode mode = cfg.convexity_mode;
  if (mode == ConvexityMode::FullyConvex && !cfg.g_convex)
    throw ConfigError("titan_block_step: FullyConvex mode asserts a convex g_i");
  const InertiaKind kind = force_no_inertia ? InertiaKind::NoInertia : ex.kind;

  BlockUpdateRecord rec;
  rec.block = i;
  rec.step_prev_normsq = dp2;

  Mat x_new;
  double L = 0;       // block constant driving the surrogate curvature
  double kappa = 1.0;
  double A = 0;
  double rho = 0;     // modulus; 0 only on the NoInertia fallback
  bool rho_ok = true;
  StepExtras extras;

  auto pick_beta = [&](double bound) {
    rec.beta_admissible = bound;
    if (kind == InertiaKind::NoInertia) return 0.0;
    return std::min(state.nesterov_weight, bound) * ex.beta_scale;
  };

  if (const auto* fam = std::get_if<LipschitzSurrogate>(&cfg.family)) {
    L = fam->lipschitz_at(i, y);
    kappa = fam->kappa;
    try {
      rho = g_rho_lipschitz(kappa, L, cfg.g_convex);
    } catch (const ConfigError&) {
      if (kind != InertiaKind::NoInertia) throw;
      rho_ok = false;
    }
    double L_prev = state.L_reg[iu] < 0 ? L : state.L_reg[iu];
    double af = detail::inertia_a_factor(kind, mode, kappa, ex.tau_ratio, ex.alpha_over_kappa_beta);
    if (kind == InertiaKind::HessianDamping && mode == ConvexityMode::FullyConvex)
      throw ConfigError(
          "titan_block_step: the FullyConvex constants cover the two-point operator family; "
          "use BlockFConvex with Hessian damping");
    double bound = 0;
    if (kind != InertiaKind::NoInertia) {
      if (mode == ConvexityMode::FullyConvex && kind == InertiaKind::NesterovTwoPoint) {
        if (ex.tau_ratio != 1.0)
          throw ConfigError("titan_block_step: FullyConvex Nesterov requires tau = beta");
        bound = beta_bound(ConvexityMode::FullyConvex, ex.C, nu, kappa, L_prev, L, cfg.g_convex);
      } else if (mode == ConvexityMode::FullyConvex) {
        // heavy ball is the tau = 0 member of the two-point family: eta = (1-nu) L,
        // with the same admissible beta form as the convex-g General case
        bound = beta_bound(ConvexityMode::General, ex.C, nu, kappa, L_prev, L, true) / af;
      } else {
        bound = beta_bound(mode, ex.C, nu, kappa, L_prev, L, cfg.g_convex) / af;
      }
    }
    double beta = pick_beta(bound);
    double tau = ex.tau_ratio * beta;
    double alpha = ex.alpha_over_kappa_beta * kappa * beta;
    Mat c;
    switch (kind) {
      case InertiaKind::NoInertia:
        c = p.eval_block_grad(i, y);
        break;
      case InertiaKind::HeavyBall:
        c = p.eval_block_grad(i, y) - kappa * L * beta * delta_prev;
        break;
      case InertiaKind::NesterovTwoPoint:
        c = p.eval_block_grad(i, with_block(y, i, Mat(xi + tau * delta_prev))) -
            kappa * L * beta * delta_prev;
        break;
      case InertiaKind::HessianDamping: {
        Mat g_anchor = p.eval_block_grad(i, y);
        Mat g_prev = p.eval_block_grad(i, with_block(y, i, state.prev.block(i)));
        c = (1.0 + alpha) * g_anchor - alpha * g_prev - kappa * L * beta * delta_prev;
        break;
      }
      case InertiaKind::BregmanHeavyBallLineSearch:
        throw ConfigError("titan_block_step: line-searched heavy ball needs a Bregman surrogate");
    }
    if (!p.nonsmooth_step) throw ConfigError("titan_block_step: ProblemSpec.nonsmooth_step missing");
    x_new = p.nonsmooth_step(i, c, xi, kappa * L);
    A = inertia_bound_A(kind, mode, kappa, L, beta, tau, alpha);
    rec.beta = beta;
    rec.tau = (kind == InertiaKind::NesterovTwoPoint) ? tau : 0.0;
    rec.alpha = (kind == InertiaKind::HessianDamping) ? alpha : 0.0;
    extras = {L, beta, rec.tau};
  } else if (const auto* fam = std::get_if<ProximalSurrogate>(&cfg.family)) {
    if (kind != InertiaKind::NoInertia && kind != InertiaKind::HeavyBall)
      throw ConfigError("titan_block_step: proximal surrogate supports NoInertia or HeavyBall");
    if (!p.prox_point_step)
      throw ConfigError("titan_block_step: proximal surrogate needs ProblemSpec.prox_point_step");
    double rho_prox = fam->rho_at(i, y);
    L = rho_prox;
    rho = rho_prox;
    double rho_prev = state.L_reg[iu] < 0 ? rho_prox : state.L_reg[iu];
    double bound =
        (kind == InertiaKind::NoInertia)
            ? 0.0
            : beta_bound(ConvexityMode::General, ex.C, nu, 1.0, rho_prev, rho_prox, true);
    double beta = pick_beta(bound);
    // G = rho beta (x^k - x^{prev}); the prox-point target is x^k + beta dx.
    x_new = p.prox_point_step(i, y, Mat(xi + beta * delta_prev), rho_prox);
    A = rho_prox * beta;
    rec.beta = beta;
    extras = {rho_prox, beta, 0.0};
  } else if (const auto* fam = std::get_if<BregmanSurrogate>(&cfg.family)) {
    L = fam->lipschitz_at(i, y);
    kappa = fam->kappa;
    rho = surrogate_modulus(cfg, i, y, cfg.g_convex);
    double rho_prev = state.rho_reg[iu] < 0 ? rho : state.rho_reg[iu];
    Mat G;
    double beta = 0;
    if (kind == InertiaKind::BregmanHeavyBallLineSearch) {
      auto ls = bregman_linesearch_tau(fam->kernel, xi, state.prev.block(i), kappa, L, ex.C, rho_prev,
                                       rho, ex.tau_shrink);
      G = kappa * L * ls.kernel_grad_gap;
      A = ls.A * kappa * L;  // ||G|| = kappa L ||dgrad|| <= A ||dx||
      rec.tau = ls.tau;
      rec.beta_admissible = ls.tau;
    } else if (kind == InertiaKind::HeavyBall) {
      double bound = std::sqrt(ex.C * nu * (1.0 - nu) * rho_prev * rho) / (kappa * L) *
                     (1.0 - 1e-12);
      beta = pick_beta(bound);
      G = kappa * L * beta * delta_prev;
      A = kappa * L * beta;
      rec.beta = beta;
    } else if (kind == InertiaKind::NoInertia) {
      G = Mat::Zero(xi.rows(), xi.cols());
      rec.beta_admissible = 0;
    } else {
      throw ConfigError("titan_block_step: Bregman surrogate supports NoInertia, HeavyBall, or line search");
    }
    Mat c = p.eval_block_grad(i, y) - G;
    if (fam->inner_solver) {
      x_new = fam->inner_solver(i, c, xi, kappa * L);
    } else {
      if (!fam->kernel.grad_inverse)
        throw ConfigError("titan_block_step: Bregman kernel needs grad_inverse or an inner solver");
      x_new = fam->kernel.grad_inverse(Mat(fam->kernel.grad(xi) - c / (kappa * L)));
    }
  } else if (const auto* fam = std::get_if<QuadraticSurrogate>(&cfg.family)) {
    if (kind != InertiaKind::NoInertia && kind != InertiaKind::HeavyBall)
      throw ConfigError("titan_block_step: quadratic surrogate supports NoInertia or HeavyBall");
    kappa = fam->kappa;
    Mat H = fam->hessian_of_block(i, y);
    Eigen::SelfAdjointEigenSolver<Mat> eig(H);
    double lmin = eig.eigenvalues().minCoeff();
    double lmax = eig.eigenvalues().maxCoeff();
    if (lmin <= 0) throw ConfigError("titan_block_step: quadratic surrogate H not positive definite");
    L = lmax;
    rho = cfg.g_convex ? kappa * lmin : (kappa - 1.0) * lmin;
    if (rho <= 0) {
      if (kind != InertiaKind::NoInertia)
        throw ConfigError("titan_block_step: nonpositive modulus (kappa = 1 with nonconvex g)");
      rho_ok = false;
    }
    double rho_prev = state.rho_reg[iu] < 0 ? rho : state.rho_reg[iu];
    double beta = 0;
    Mat G = Mat::Zero(xi.rows(), xi.cols());
    if (kind == InertiaKind::HeavyBall) {
      double bound =
          std::sqrt(ex.C * nu * (1.0 - nu) * rho_prev * rho) / (kappa * lmax) * (1.0 - 1e-12);
      beta = pick_beta(bound);
      // G = kappa tau H (x^k - x^{prev}) with tau = beta; A = kappa tau ||H||.
      Eigen::Map<const Eigen::VectorXd> vd(delta_prev.data(), delta_prev.size());
      Eigen::VectorXd gv = kappa * beta * (H * vd);
      G = Eigen::Map<const Mat>(gv.data(), xi.rows(), xi.cols());
      A = kappa * beta * lmax;
      rec.beta = beta;
    }
    Mat c = p.eval_block_grad(i, y) - G;
    if (fam->inner_solver) {
      x_new = fam->inner_solver(i, c, xi, H, kappa);
    } else {
      Eigen::Map<const Eigen::VectorXd> vc(c.data(), c.size());
      Eigen::VectorXd step = H.ldlt().solve(vc) / kappa;
      x_new = xi - Mat(Eigen::Map<const Mat>(step.data(), xi.rows(), xi.cols()));
    }
  } else {
    const auto& cf = std::get<CompositeSurrogate>(cfg.family);
    const auto* inner = std::get_if<LipschitzSurrogate>(&cf.inner->family);
    if (!inner)
      throw ConfigError("titan_block_step: composite solver path needs a Lipschitz inner surrogate");
    if (!cf.composite_step)
      throw ConfigError("titan_block_step: composite surrogate needs composite_step");
    L = floored(inner->lipschitz_of_block(i, y));
    kappa = inner->kappa;
    try {
      rho = g_rho_lipschitz(kappa, L, cfg.g_convex);
    } catch (const ConfigError&) {
      if (kind != InertiaKind::NoInertia) throw;
      rho_ok = false;
    }
    double L_prev = state.L_reg[iu] < 0 ? L : state.L_reg[iu];
    double af = detail::inertia_a_factor(kind, mode, kappa, ex.tau_ratio, ex.alpha_over_kappa_beta);
    if (kind == InertiaKind::HessianDamping && mode == ConvexityMode::FullyConvex)
      throw ConfigError(
          "titan_block_step: the FullyConvex constants cover the two-point operator family; "
          "use BlockFConvex with Hessian damping");
    double bound = 0;
    if (kind != InertiaKind::NoInertia) {
      if (mode == ConvexityMode::FullyConvex && kind == InertiaKind::NesterovTwoPoint) {
        if (ex.tau_ratio != 1.0)
          throw ConfigError("titan_block_step: FullyConvex Nesterov requires tau = beta");
        bound = beta_bound(ConvexityMode::FullyConvex, ex.C, nu, kappa, L_prev, L, cfg.g_convex);
      } else if (mode == ConvexityMode::FullyConvex) {
        bound = beta_bound(ConvexityMode::General, ex.C, nu, kappa, L_prev, L, true) / af;
      } else {
        bound = beta_bound(mode, ex.C, nu, kappa, L_prev, L, cfg.g_convex) / af;
      }
    }
    double beta = pick_beta(bound);
    double tau = ex.tau_ratio * beta;
    double alpha = ex.alpha_over_kappa_beta * kappa * beta;
    Mat c;
    switch (kind) {
      case InertiaKind::NoInertia:
        c = cf.psi_grad(i, y);
        break;
      case InertiaKind::HeavyBall:
        c = cf.psi_grad(i, y) - kappa * L * beta * delta_prev;
        break;
      case InertiaKind::NesterovTwoPoint:
        c = cf.psi_grad(i, with_block(y, i, Mat(xi + tau * delta_prev))) -
            kappa * L * beta * delta_prev;
        break;
      case InertiaKind::HessianDamping: {
        Mat g_anchor = cf.psi_grad(i, y);
        Mat g_prev = cf.psi_grad(i, with_block(y, i, state.prev.block(i)));
        c = (1.0 + alpha) * g_anchor - alpha * g_prev - kappa * L * beta * delta_prev;
        break;
      }
      case InertiaKind::BregmanHeavyBallLineSearch:
        throw ConfigError("titan_block_step: line-searched heavy ball needs a Bregman surrogate");
    }
    Mat W = cf.phi_grad(i, cf.r_of(y));
    x_new = cf.composite_step(i, c, xi, kappa * L, W);
    A = inertia_bound_A(kind, mode, kappa, L, beta, tau, alpha);
    rec.beta = beta;
    rec.tau = (kind == InertiaKind::NesterovTwoPoint) ? tau : 0.0;
    rec.alpha = (kind == InertiaKind::HessianDamping) ? alpha : 0.0;
    extras = {L, beta, rec.tau};
  }

  if (!x_new.allFinite())
    throw NumericalError("titan_block_step: non-finite block " + std::to_string(i));

  StepConstants sc;
  if (mode == ConvexityMode::FullyConvex) {
    sc = step_constants(mode, A, rho, nu, extras);
  } else if (rho_ok) {
    sc = step_constants(mode, A, rho, nu, extras);
  } else {
    sc.A = A;  // NoInertia fallback when no positive modulus exists (plain MM descent)
    sc.rho = 0;
    sc.gamma = 0;
    sc.eta = 0;
  }

  rec.A = sc.A;
  rec.rho = sc.rho;
  rec.gamma = sc.gamma;
  rec.eta = sc.eta;
  rec.inertia_bound = sc.A * std::sqrt(dp2);
  rec.step_cur_normsq = (x_new - xi).squaredNorm();
  rec.rel_change = std::sqrt(rec.step_cur_normsq) / (1.0 + x_new.norm());
  rec.cond4_ok = state.eta_reg[iu] < 0 || sc.gamma <= ex.C * state.eta_reg[iu];

  // Commit: x_i^{prev} <- x_i^k, x_i <- x_i^{k+1}, registers advance.
  state.prev.set_block(i, xi);
  state.x.set_block(i, std::move(x_new));
  state.L_reg[iu] = L;
  state.rho_reg[iu] = rho;
  state.eta_reg[iu] = sc.eta;
  p.notify_block_updated(i);
  return rec;
}

// ---------------------------------------------------------------------------
// Main loop
// ---------------------------------------------------------------------------

struct RunResult {
  BlockVector x;
  RunLog log;
};

/// TITAN with cyclic or essentially cyclic block updates. With restart
/// enabled, an outer iteration whose objective fails to decrease is redone
/// with zero extrapolation, which restores monotonicity.
inline RunResult titan_run(const ProblemSpec& p, const std::vector<SurrogateConfig>& cfgs,
                           const ExtrapolationConfig& ex, const Schedule& schedule,
                           const SolverOptions& opts, const BlockVector& x0,
                           const std::optional<BlockVector>& x_minus1 = {}) {
  if (static_cast<int>(cfgs.size()) != x0.block_count())
    throw ConfigError("titan_run: one SurrogateConfig per block required");
  if (schedule.blocks() != x0.block_count())
    throw ConfigError("titan_run: schedule block count mismatch");
  ex.validate(x0.block_count());
  opts.validate();
  const bool restart = opts.restart_enabled.value_or(ex.restart_enabled);

  SolverState state = SolverState::init(x0, x_minus1);
  RunLog log;
  log.C = ex.C;
  log.f_initial = objective_value(p, state.x);
  ++state.objective_evals;
  if (!std::isfinite(log.f_initial)) throw NumericalError("titan_run: F(x^0) not finite");

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  double F_prev = log.f_initial;
  for (long k = 0; k < opts.max_iters; ++k) {
    const bool monitored = opts.monitor == NsdpMonitor::Full ||
                           (opts.monitor == NsdpMonitor::Sampled && k % opts.monitor_every == 0);
    state.nesterov_weight = state.mu.advance(ex.nesterov_weight_literal);

    std::optional<SolverState::Snapshot> snap;
    if (restart) snap = state.snapshot();

    auto run_iteration = [&](bool force_no_inertia) {
      IterationRecord it;
      it.iter = k;
      double F_running = F_prev;
      for (int i : schedule.order()) {
        BlockUpdateRecord rec =
            titan_block_step(p, cfgs[static_cast<std::size_t>(i)], ex, state, i, force_no_inertia);
        if (monitored) {
          double F_after = objective_value(p, state.x);
          ++state.objective_evals;
          rec.f_before = F_running;
          rec.f_after = F_after;
          rec.nsdp_residual = nsdp_check(F_running, F_after, rec.gamma, rec.eta,
                                         rec.step_prev_normsq, rec.step_cur_normsq);
          if (force_no_inertia)
            rec.nsdp_residual_restart_eta = nsdp_check(F_running, F_after, 0.0, 0.5 * rec.rho,
                                                       rec.step_prev_normsq, rec.step_cur_normsq);
          F_running = F_after;
        }
        it.updates.push_back(std::move(rec));
      }
      if (monitored) {
        it.objective = F_running;
      } else {
        it.objective = objective_value(p, state.x);
        ++state.objective_evals;
      }
      return it;
    };

    IterationRecord it = run_iteration(false);
    if (restart && it.objective >= F_prev) {
      double rejected = it.objective;
      state.restore(*snap);
      p.notify_all_updated();
      it = run_iteration(true);
      it.restarted = true;
      it.rejected_objective = rejected;
      if (it.objective > F_prev) {
        // The zero-extrapolation redo cannot increase F in exact arithmetic;
        // reaching this branch means the iterate is stationary up to rounding.
        // Hold the previous iterate so the logged sequence stays nonincreasing.
        state.restore(*snap);
        p.notify_all_updated();
        it.updates.clear();
        it.objective = F_prev;
      }
    }

    if (!std::isfinite(it.objective))
      throw NumericalError("titan_run: non-finite objective at iteration " + std::to_string(k));
    if (opts.progress_metric) it.metric = opts.progress_metric(k, state.x);
    it.wall_seconds = elapsed();
    F_prev = it.objective;

    double max_rel_change = 0;
    for (const auto& u : it.updates) max_rel_change = std::max(max_rel_change, u.rel_change);
    log.iterations.push_back(std::move(it));

    if (opts.stop_tolerance && max_rel_change < *opts.stop_tolerance) {
      log.stop_reason = "tolerance";
      break;
    }
    if (k + 1 >= opts.max_iters) {
      log.stop_reason = "max_iters";
      break;
    }
    if (opts.time_budget_seconds && elapsed() >= *opts.time_budget_seconds) {
      log.stop_reason = "time_budget";
      break;
    }
  }
  if (log.stop_reason.empty()) log.stop_reason = "max_iters";
  log.objective_evals = state.objective_evals;
  log.total_seconds = elapsed();
  return {std::move(state.x), std::move(log)};
}

}  // namespace titan
