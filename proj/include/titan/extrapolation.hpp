#pragma once

#include <cmath>
#include <optional>

#include "titan/surrogates.hpp"

namespace titan {

enum class InertiaKind {
  NoInertia,
  HeavyBall,
  NesterovTwoPoint,
  HessianDamping,
  BregmanHeavyBallLineSearch
};

struct ExtrapolationConfig {
  InertiaKind kind = InertiaKind::NoInertia;
  double C = 0.9999 * 0.9999;        // Condition 4 constant, in (0,1)
  double nu = 0.5;                   // Young split, in (0,1)
  std::vector<double> nu_per_block;  // optional per-block override
  bool restart_enabled = false;

  double tau_ratio = 1.0;             // NesterovTwoPoint: tau = tau_ratio * beta, tau_ratio <= 1
  double alpha_over_kappa_beta = 1.0; // HessianDamping: alpha = this * kappa * beta, <= 1
  double tau_shrink = 0.5;            // Bregman line search shrink factor, in (0,1)
  bool nesterov_weight_literal = false;  // use (mu_k - 1)/mu_k instead of (mu_{k-1} - 1)/mu_k
  double beta_scale = 1.0;            // diagnostic knob; values > 1 exceed the admissible bound

  double nu_of(int block) const {
    if (!nu_per_block.empty()) return nu_per_block.at(static_cast<std::size_t>(block));
    return nu;
  }

  void validate(int blocks) const {
    if (C <= 0 || C >= 1) throw ConfigError("ExtrapolationConfig: C must lie in (0,1)");
    if (nu <= 0 || nu >= 1) throw ConfigError("ExtrapolationConfig: nu must lie in (0,1)");
    for (double v : nu_per_block)
      if (v <= 0 || v >= 1) throw ConfigError("ExtrapolationConfig: per-block nu out of (0,1)");
    if (!nu_per_block.empty() && static_cast<int>(nu_per_block.size()) != blocks)
      throw ConfigError("ExtrapolationConfig: nu_per_block size mismatch");
    if (tau_ratio < 0 || tau_ratio > 1)
      throw ConfigError("ExtrapolationConfig: tau_ratio must lie in [0,1]");
    if (alpha_over_kappa_beta < 0 || alpha_over_kappa_beta > 1)
      throw ConfigError("ExtrapolationConfig: alpha_over_kappa_beta must lie in [0,1]");
    if (tau_shrink <= 0 || tau_shrink >= 1)
      throw ConfigError("ExtrapolationConfig: tau_shrink must lie in (0,1)");
  }
};

/// Constants certifying one block update: ||G|| <= A ||x^k - x^{k-1}||,
/// modulus rho, and the NSDP pair (gamma, eta).
struct StepConstants {
  double A = 0;
  double rho = 0;
  double gamma = 0;
  double eta = 0;
};

/// mu_k = (1 + sqrt(1 + 4 mu_{k-1}^2)) / 2
inline double mu_next(double mu_prev) {
  if (mu_prev < 1) throw ConfigError("mu_next: mu_prev >= 1 required");
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * mu_prev * mu_prev));
}

/// Stateful Nesterov mu-sequence. advance() moves to the next k and returns
/// the inertial weight; the first call yields 0 (mu_0 = 1).
class MuSchedule {
 public:
  double advance(bool literal_variant = false) {
    double mu_cur = mu_next(mu_prev_);
    double w = literal_variant ? (mu_cur - 1.0) / mu_cur : (mu_prev_ - 1.0) / mu_cur;
    mu_prev_ = mu_cur;
    return w;
  }
  double mu() const { return mu_prev_; }

 private:
  double mu_prev_ = 1.0;
};

struct StepExtras {
  double L = 0;     // Lipschitz-type constant for the FullyConvex formulas
  double beta = 0;
  double tau = 0;
};

/// The (gamma, eta) of the NSDP inequality.
///  - General / BlockFConvex: gamma = A^2 / (nu rho), eta = (1 - nu) rho.
///  - FullyConvex:            gamma = L (tau^2 + (beta - tau)^2 / nu), eta = (1 - nu) L,
///    and with beta == tau:   gamma = L tau^2, eta = L.
inline StepConstants step_constants(ConvexityMode mode, double A, double rho, double nu,
                                    const StepExtras& extras = {}) {
  if (nu <= 0 || nu >= 1) throw ConfigError("step_constants: nu must lie in (0,1)");
  StepConstants sc;
  sc.A = A;
  sc.rho = rho;
  if (mode == ConvexityMode::FullyConvex) {
    if (extras.L <= 0) throw ConfigError("step_constants: FullyConvex mode needs L > 0");
    if (extras.beta == extras.tau) {
      sc.gamma = extras.L * extras.tau * extras.tau;
      sc.eta = extras.L;
    } else {
      double d = extras.beta - extras.tau;
      sc.gamma = extras.L * (extras.tau * extras.tau + d * d / nu);
      sc.eta = (1.0 - nu) * extras.L;
    }
    return sc;
  }
  if (rho <= 0) throw ConfigError("step_constants: rho must be positive");
  sc.gamma = (A == 0) ? 0.0 : A * A / (nu * rho);
  sc.eta = (1.0 - nu) * rho;
  return sc;
}

namespace detail {
// Shaving the admissible beta by one part in 1e12 keeps gamma^{k+1} <= C eta^k
// an exact floating-point inequality when beta sits on the bound.
inline constexpr double kBetaShave = 1.0 - 1e-12;
}  // namespace detail

/// Largest admissible beta with gamma^{k+1} <= C eta^k for the A = kappa L beta
/// operator forms (L_prev and L_cur are the block constants at the previous and
/// current update):
///  - FullyConvex (beta = tau):          sqrt(C L_prev / L_cur)
///  - General, g nonconvex (rho=(k-1)L): ((kappa-1)/kappa) sqrt(C nu (1-nu) L_prev/L_cur)
///  - General, g convex (rho=kappa L):   sqrt(C nu (1-nu) L_prev / L_cur)
inline double beta_bound(ConvexityMode mode, double C, double nu, double kappa, double L_prev,
                         double L_cur, bool g_convex) {
  if (C <= 0 || C >= 1 || nu <= 0 || nu >= 1) throw ConfigError("beta_bound: C, nu must lie in (0,1)");
  L_prev = floored(L_prev);
  L_cur = floored(L_cur);
  double ratio = L_prev / L_cur;
  if (mode == ConvexityMode::FullyConvex) return std::sqrt(C * ratio) * detail::kBetaShave;
  double base = std::sqrt(C * nu * (1.0 - nu) * ratio);
  if (g_convex) return base * detail::kBetaShave;
  if (kappa <= 1) throw ConfigError("beta_bound: kappa > 1 required with nonconvex g");
  return (kappa - 1.0) / kappa * base * detail::kBetaShave;
}

/// State handed to build_inertia. Gradients are only read by the kinds that
/// need them (grad_at_anchor is grad_i f at x^{k,i-1}; grad_at_extrap at the
/// two-point extrapolation; grad_at_prev at (x_i^{k-1}, x^{k,i-1}_{/=i})).
struct InertiaState {
  Mat x_cur;
  Mat x_prev;
  std::optional<Mat> grad_at_anchor;
  std::optional<Mat> grad_at_extrap;
  std::optional<Mat> grad_at_prev;
  double kappa = 1.0;
  double L = 1.0;      // Lipschitz constant (or rho for the proximal family)
  double beta = 0;
  double tau = 0;
  double alpha = 0;
  ConvexityMode mode = ConvexityMode::General;
  const KernelDescriptor* kernel = nullptr;  // Bregman heavy ball
};

/// The certified Condition-1 factor A for the configured operator: the bound
/// ||G|| <= A ||x^k - x^{k-1}|| used by the (gamma, eta) calculus.
inline double inertia_bound_A(InertiaKind kind, ConvexityMode mode, double kappa, double L,
                              double beta, double tau, double alpha) {
  bool block_f_convex = mode != ConvexityMode::General;
  switch (kind) {
    case InertiaKind::NoInertia:
      return 0;
    case InertiaKind::HeavyBall:
      return kappa * L * beta;
    case InertiaKind::NesterovTwoPoint:
      return (block_f_convex && beta >= tau) ? kappa * L * beta : L * (tau + kappa * beta);
    case InertiaKind::HessianDamping:
      return (block_f_convex && alpha <= kappa * beta) ? kappa * L * beta
                                                       : L * (alpha + kappa * beta);
    case InertiaKind::BregmanHeavyBallLineSearch:
      throw ConfigError("inertia_bound_A: Bregman line search computes A from the accepted step");
  }
  return 0;
}

/// Evaluates the extrapolation operator G_i^k(x_i^k, x_i^{k-1}) and its
/// certified bound A. Displacement zero yields G = 0 for every kind.
inline std::pair<Mat, double> build_inertia(InertiaKind kind, const InertiaState& st) {
  Mat delta = st.x_cur - st.x_prev;
  Mat G = Mat::Zero(st.x_cur.rows(), st.x_cur.cols());
  switch (kind) {
    case InertiaKind::NoInertia:
      return {G, 0.0};
    case InertiaKind::HeavyBall:
      G = st.kappa * st.L * st.beta * delta;
      break;
    case InertiaKind::NesterovTwoPoint:
      if (!st.grad_at_anchor || !st.grad_at_extrap)
        throw ConfigError("build_inertia: NesterovTwoPoint needs anchor and extrapolation gradients");
      G = *st.grad_at_anchor - *st.grad_at_extrap + st.kappa * st.L * st.beta * delta;
      break;
    case InertiaKind::HessianDamping:
      if (!st.grad_at_anchor || !st.grad_at_prev)
        throw ConfigError("build_inertia: HessianDamping needs anchor and previous gradients");
      G = st.alpha * (*st.grad_at_prev - *st.grad_at_anchor) + st.kappa * st.L * st.beta * delta;
      break;
    case InertiaKind::BregmanHeavyBallLineSearch: {
      if (!st.kernel) throw ConfigError("build_inertia: Bregman kind needs a kernel");
      double dn = delta.norm();
      if (dn == 0) return {G, 0.0};
      Mat xbar = st.x_cur + st.tau * delta;
      Mat dg = st.kernel->grad(xbar) - st.kernel->grad(st.x_cur);
      G = st.kappa * st.L * dg;
      return {G, st.kappa * st.L * dg.norm() / dn};
    }
  }
  return {G, inertia_bound_A(kind, st.mode, st.kappa, st.L, st.beta, st.tau, st.alpha)};
}

struct BregmanLinesearchResult {
  double tau = 1.0;
  double A = 0;       // ||grad phi(xbar) - grad phi(x^k)|| / ||delta||
  Mat kernel_grad_gap;  // grad phi(xbar) - grad phi(x^k) at the accepted tau
};

/// Backtracks tau in {1, shrink, shrink^2, ...} until
///   kappa L ||grad phi(xbar) - grad phi(x^k)||^2 <= C ||delta||^2 rho_k rho_k1.
/// Terminates because grad phi is Lipschitz on bounded sets. Zero displacement
/// returns tau = 1 with G = 0.
inline BregmanLinesearchResult bregman_linesearch_tau(const KernelDescriptor& kernel,
                                                      const Mat& x_cur, const Mat& x_prev,
                                                      double kappa, double L, double C,
                                                      double rho_k, double rho_k1,
                                                      double tau_shrink, int max_halvings = 200) {
  if (tau_shrink <= 0 || tau_shrink >= 1)
    throw ConfigError("bregman_linesearch_tau: shrink factor must lie in (0,1)");
  BregmanLinesearchResult res;
  Mat delta = x_cur - x_prev;
  double dn2 = delta.squaredNorm();
  res.kernel_grad_gap = Mat::Zero(x_cur.rows(), x_cur.cols());
  if (dn2 == 0) return res;
  Mat g0 = kernel.grad(x_cur);
  double tau = 1.0;
  double rhs = C * dn2 * rho_k * rho_k1;
  for (int it = 0; it <= max_halvings; ++it) {
    Mat dg = kernel.grad(x_cur + tau * delta) - g0;
    if (kappa * L * dg.squaredNorm() <= rhs) {
      res.tau = tau;
      res.A = dg.norm() / std::sqrt(dn2);
      res.kernel_grad_gap = std::move(dg);
      return res;
    }
    tau *= tau_shrink;
  }
  throw NumericalError("bregman_linesearch_tau: no admissible tau found");
}

}  // namespace titan
