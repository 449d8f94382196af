#pragma once

#include <memory>

#include "titan/solver.hpp"

namespace titan::apps {

/// min (1/2)||M - UV||^2  s.t.  U >= 0 with at most s nonzeros per column,
/// V >= 0. Block U carries the nonconvex sparsity indicator, block V the
/// convex nonnegativity indicator.
struct SparseNmfInstance {
  Mat M;
  int rank = 5;
  int sparsity = 0;  // 0 selects the default ceil(0.25 * rank)
  double kappa1 = 1.0001;
  double C = 0.9999 * 0.9999;
  double nu1 = 0.5;
  int repeat_u = 1;  // essentially cyclic repetition counts (> 1 caches Grams)
  int repeat_v = 1;
  bool palm_baseline = false;  // no inertia, kappa forced to 1 on both blocks
  PowerIterOptions power_opts{1e-12, 300, 12345};

  int effective_sparsity() const { return sparsity > 0 ? sparsity : (rank + 3) / 4; }

  void validate() const {
    if (M.rows() < 1 || M.cols() < 1) throw ConfigError("SparseNmfInstance: empty data matrix");
    if ((M.array() < 0).any()) throw ConfigError("SparseNmfInstance: M must be nonnegative");
    if (rank < 1) throw ConfigError("SparseNmfInstance: rank >= 1 required");
    int s = effective_sparsity();
    if (s < 1 || s > M.rows()) throw ConfigError("SparseNmfInstance: sparsity out of range");
    if (repeat_u < 1 || repeat_v < 1) throw ConfigError("SparseNmfInstance: repeat counts >= 1");
  }
};

/// Evaluators for f(U,V) = (1/2)||M - UV||^2. Gram products (VV^T, MV^T,
/// U^TU, U^TM) are cached against block content tags, so repeated updates of
/// one block reuse the other block's products; a gradient then costs
/// O(m r^2) or O(n r^2) instead of O(m n r).
class NmfKernel {
 public:
  explicit NmfKernel(Mat M, PowerIterOptions popts = {})
      : M_(std::move(M)), M_norm_(M_.norm()), popts_(popts) {}

  double f(const BlockVector& x) const {
    return 0.5 * (M_ - x.block(0) * x.block(1)).squaredNorm();
  }

  Mat grad_u(const BlockVector& y) {
    refresh_v(y);
    return y.block(0) * VVt_ - MVt_;
  }

  Mat grad_v(const BlockVector& y) {
    refresh_u(y);
    return UtU_ * y.block(1) - UtM_;
  }

  double lipschitz_u(const BlockVector& y) {  // L_1 = ||V V^T||
    refresh_v(y);
    return floored(spectral_norm_sym(VVt_, popts_));
  }

  double lipschitz_v(const BlockVector& y) {  // L_2 = ||U^T U||
    refresh_u(y);
    return floored(spectral_norm_sym(UtU_, popts_));
  }

  double rel_error_from_objective(double F) const {
    return M_norm_ > 0 ? std::sqrt(2.0 * F) / M_norm_ : std::sqrt(2.0 * F);
  }

  const Mat& data() const { return M_; }
  double data_norm() const { return M_norm_; }

 private:
  void refresh_v(const BlockVector& y) {
    if (y.tag(1) != v_tag_) {
      const Mat& V = y.block(1);
      VVt_ = V * V.transpose();
      MVt_ = M_ * V.transpose();
      v_tag_ = y.tag(1);
    }
  }
  void refresh_u(const BlockVector& y) {
    if (y.tag(0) != u_tag_) {
      const Mat& U = y.block(0);
      UtU_ = U.transpose() * U;
      UtM_ = U.transpose() * M_;
      u_tag_ = y.tag(0);
    }
  }

  Mat M_;
  double M_norm_ = 0;
  PowerIterOptions popts_;
  std::uint64_t v_tag_ = 0, u_tag_ = 0;
  Mat VVt_, MVt_, UtU_, UtM_;
};

inline ProblemSpec make_nmf_problem(const std::shared_ptr<NmfKernel>& kernel, int sparsity) {
  ProblemSpec p;
  p.block_count = 2;
  p.eval_f = [kernel](const BlockVector& x) { return kernel->f(x); };
  p.eval_block_grad = [kernel](int i, const BlockVector& y) {
    return i == 0 ? kernel->grad_u(y) : kernel->grad_v(y);
  };
  p.eval_g = [sparsity](int i, const Mat& xi) {
    const double inf = std::numeric_limits<double>::infinity();
    if ((xi.array() < 0).any()) return inf;
    if (i == 0) {
      for (Index j = 0; j < xi.cols(); ++j)
        if ((xi.col(j).array() != 0).count() > sparsity) return inf;
    }
    return 0.0;
  };
  p.nonsmooth_step = [sparsity](int i, const Mat& c, const Mat& z, double lambda) {
    Mat P = (z - c / lambda).cwiseMax(0.0);
    return i == 0 ? hard_threshold_columns(P, sparsity) : P;
  };
  return p;
}

inline std::vector<SurrogateConfig> nmf_surrogates(const SparseNmfInstance& inst,
                                                   const std::shared_ptr<NmfKernel>& kernel) {
  LipschitzSurrogate su;
  su.kappa = inst.palm_baseline ? 1.0 : inst.kappa1;
  su.lipschitz_of_block = [kernel](int, const BlockVector& y) { return kernel->lipschitz_u(y); };
  SurrogateConfig cfg_u;
  cfg_u.family = su;
  cfg_u.convexity_mode = ConvexityMode::BlockFConvex;  // f(.,V) convex, g_1 nonconvex
  cfg_u.g_convex = false;

  LipschitzSurrogate sv;
  sv.kappa = 1.0;
  sv.lipschitz_of_block = [kernel](int, const BlockVector& y) { return kernel->lipschitz_v(y); };
  SurrogateConfig cfg_v;
  cfg_v.family = sv;
  cfg_v.convexity_mode = ConvexityMode::FullyConvex;  // f(U,.) and g_2 convex
  cfg_v.g_convex = true;

  return {cfg_u, cfg_v};
}

inline Schedule nmf_schedule(const SparseNmfInstance& inst) {
  if (inst.repeat_u == 1 && inst.repeat_v == 1) return Schedule::cyclic(2);
  std::vector<int> order;
  order.insert(order.end(), static_cast<std::size_t>(inst.repeat_u), 0);
  order.insert(order.end(), static_cast<std::size_t>(inst.repeat_v), 1);
  return Schedule::essentially_cyclic(std::move(order), 2);
}

struct NmfResult {
  Mat U, V;
  RunLog log;
  double final_rel_error = 0;
};

/// TITAN sparse NMF with the Nesterov two-point recipe:
///   beta_1^k = min{(mu_{k-1}-1)/mu_k, ((kappa_1-1)/kappa_1) sqrt(C nu_1 (1-nu_1) L_1^{k-1}/L_1^k)}
///   beta_2^k = min{(mu_{k-1}-1)/mu_k, sqrt(C L_2^{k-1}/L_2^k)}
/// U-step: T_s([Ubar - grad/(kappa_1 L_1)]_+), V-step: [Vbar - grad/L_2]_+.
inline NmfResult sparse_nmf_run(const SparseNmfInstance& inst, const SolverOptions& opts,
                                std::uint64_t seed) {
  inst.validate();
  auto kernel = std::make_shared<NmfKernel>(inst.M, inst.power_opts);
  const int s = inst.effective_sparsity();
  ProblemSpec p = make_nmf_problem(kernel, s);
  std::vector<SurrogateConfig> cfgs = nmf_surrogates(inst, kernel);

  ExtrapolationConfig ex;
  ex.kind = inst.palm_baseline ? InertiaKind::NoInertia : InertiaKind::NesterovTwoPoint;
  ex.C = inst.C;
  ex.nu = inst.nu1;

  std::mt19937_64 rng(seed);
  Mat U0 = random_uniform(inst.M.rows(), inst.rank, rng);
  Mat V0 = random_uniform(inst.rank, inst.M.cols(), rng);
  // Start feasible: the sparsity indicator must hold at x^0.
  U0 = hard_threshold_columns(U0, s);
  BlockVector x0({U0, V0});

  RunResult run = titan_run(p, cfgs, ex, nmf_schedule(inst), opts, x0);
  for (auto& it : run.log.iterations) it.metric = kernel->rel_error_from_objective(it.objective);

  NmfResult res;
  res.U = run.x.block(0);
  res.V = run.x.block(1);
  res.final_rel_error = run.log.iterations.empty()
                            ? kernel->rel_error_from_objective(run.log.f_initial)
                            : run.log.iterations.back().metric;
  res.log = std::move(run.log);
  return res;
}

}  // namespace titan::apps
