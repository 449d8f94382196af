#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <memory>

#include "titan/solver.hpp"

namespace titan::apps {

enum class McpVariant { TitanExtra, TitanNo, Palm };

inline const char* to_string(McpVariant v) {
  switch (v) {
    case McpVariant::TitanExtra: return "titan-extra";
    case McpVariant::TitanNo: return "titan-no";
    case McpVariant::Palm: return "palm";
  }
  return "?";
}

/// min (1/2)||P(A - UV)||^2 + lambda sum_ij (1 - exp(-theta |u_ij|))
///                          + lambda sum_ij (1 - exp(-theta |v_ij|))
/// over the observed mask, with RMSE tracked on a disjoint test mask.
struct McpInstance {
  ObservationMask observed;  // training entries
  ObservationMask test;
  int rank = 5;
  double lambda = 0.1;
  double theta = 5.0;
  McpVariant variant = McpVariant::TitanExtra;
  double C = 0.9999 * 0.9999;
  double nu = 0.5;
  int rmse_every = 10;
  bool nesterov_weight_literal = false;  // the (mu_k - 1)/mu_k reading of the beta schedule
  PowerIterOptions power_opts{1e-12, 300, 12345};

  void validate() const {
    if (observed.empty()) throw ConfigError("McpInstance: empty training mask");
    if (rank < 1) throw ConfigError("McpInstance: rank >= 1 required");
    // lambda = 0 is allowed and reduces the model to masked least squares
    if (lambda < 0 || theta <= 0) throw ConfigError("McpInstance: lambda >= 0, theta > 0 required");
    if (observed.rows() != test.rows() || observed.cols() != test.cols())
      throw ShapeError("McpInstance: train/test mask dimensions differ");
    if (!observed.disjoint_from(test)) throw ConfigError("McpInstance: train/test masks overlap");
    if (rmse_every < 1) throw ConfigError("McpInstance: rmse_every >= 1");
  }
};

/// Masked residual evaluators for psi(U,V) = (1/2)||P(A - UV)||^2 and the
/// exponential regularizer phi. The residual is accumulated entry-wise over
/// the mask; the dense product UV is never materialized. Gram caches follow
/// block content tags as in the NMF kernel.
class McpKernel {
 public:
  McpKernel(const ObservationMask& train, double lambda, double theta,
            PowerIterOptions popts = {})
      : rows_(train.rows()), cols_(train.cols()), lambda_(lambda), theta_(theta), popts_(popts) {
    r_.reserve(train.size());
    c_.reserve(train.size());
    v_.reserve(train.size());
    for (const auto& e : train.entries()) {
      r_.push_back(e.row);
      c_.push_back(e.col);
      v_.push_back(e.value);
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t observed_count() const { return r_.size(); }

  double psi(const BlockVector& x) const {
    const Mat& U = x.block(0);
    const Mat& V = x.block(1);
    double s = 0;
    for (std::size_t t = 0; t < r_.size(); ++t) {
      double res = v_[t] - U.row(r_[t]).dot(V.col(c_[t]));
      s += res * res;
    }
    return 0.5 * s;
  }

  Mat psi_grad(int i, const BlockVector& y) const {
    const Mat& U = y.block(0);
    const Mat& V = y.block(1);
    if (i == 0) {
      Mat G = Mat::Zero(U.rows(), U.cols());
      for (std::size_t t = 0; t < r_.size(); ++t) {
        double res = v_[t] - U.row(r_[t]).dot(V.col(c_[t]));
        G.row(r_[t]) -= res * V.col(c_[t]).transpose();
      }
      return G;
    }
    Mat G = Mat::Zero(V.rows(), V.cols());
    for (std::size_t t = 0; t < r_.size(); ++t) {
      double res = v_[t] - U.row(r_[t]).dot(V.col(c_[t]));
      G.col(c_[t]) -= res * U.row(r_[t]).transpose();
    }
    return G;
  }

  // phi at r-values (entrywise nonnegative matrices |U|, |V|)
  double phi_at_r(const BlockVector& rv) const {
    double s = 0;
    for (int i = 0; i < 2; ++i) s += (1.0 - (-theta_ * rv.block(i).array()).exp()).sum();
    return lambda_ * s;
  }

  Mat phi_grad(int i, const BlockVector& rv) const {
    return lambda_ * theta_ * (-theta_ * rv.block(i).array()).exp().matrix();
  }

  double regularizer(const Mat& xi) const {
    return lambda_ * (1.0 - (-theta_ * xi.array().abs()).exp()).sum();
  }

  double f(const BlockVector& x) const {
    return psi(x) + regularizer(x.block(0)) + regularizer(x.block(1));
  }

  double lipschitz(int i, const BlockVector& y) {  // L_1 = ||VV^T||, L_2 = ||U^TU||
    if (i == 0) {
      if (y.tag(1) != v_tag_) {
        VVt_ = y.block(1) * y.block(1).transpose();
        v_tag_ = y.tag(1);
      }
      return floored(spectral_norm_sym(VVt_, popts_));
    }
    if (y.tag(0) != u_tag_) {
      UtU_ = y.block(0).transpose() * y.block(0);
      u_tag_ = y.tag(0);
    }
    return floored(spectral_norm_sym(UtU_, popts_));
  }

  double rmse(const ObservationMask& test, const Mat& U, const Mat& V) const {
    if (test.empty()) throw ConfigError("rmse: empty test set");
    double s = 0;
    for (const auto& e : test.entries()) {
      double res = e.value - U.row(e.row).dot(V.col(e.col));
      s += res * res;
    }
    return std::sqrt(s / static_cast<double>(test.size()));
  }

  double lambda() const { return lambda_; }
  double theta() const { return theta_; }

 private:
  int rows_, cols_;
  double lambda_, theta_;
  PowerIterOptions popts_;
  std::vector<int> r_, c_;
  std::vector<double> v_;
  std::uint64_t v_tag_ = 0, u_tag_ = 0;
  Mat VVt_, UtU_;
};

/// Power-method initialization: U^0 is an orthonormal basis approximating the
/// range of P(A) (subspace iteration, at most `rank` sweeps, tolerance 1e-6);
/// the small SVD of (U^0)^T P(A) = Us S Vt (one-sided Jacobi) rotates U^0 by
/// Us and sets V^0 = S Vt.
inline std::pair<Mat, Mat> mcp_initial_point(const ObservationMask& train, int rank,
                                             std::uint64_t seed) {
  const int m = train.rows(), n = train.cols();
  auto apply = [&](const Mat& X) {  // P(A) * X, X is n x r
    Mat Y = Mat::Zero(m, X.cols());
    for (const auto& e : train.entries()) Y.row(e.row) += e.value * X.row(e.col);
    return Y;
  };
  auto apply_t = [&](const Mat& X) {  // P(A)^T * X, X is m x r
    Mat Y = Mat::Zero(n, X.cols());
    for (const auto& e : train.entries()) Y.row(e.col) += e.value * X.row(e.row);
    return Y;
  };
  auto orth = [](const Mat& X) {
    Eigen::HouseholderQR<Mat> qr(X);
    return Mat(qr.householderQ() * Mat::Identity(X.rows(), X.cols()));
  };

  std::mt19937_64 rng(seed);
  Mat Q = orth(apply(random_gaussian(n, rank, rng)));
  for (int it = 0; it < rank; ++it) {
    Mat Qn = orth(apply(orth(apply_t(Q))));
    double change = (Qn - Q * (Q.transpose() * Qn)).norm();  // residual outside span(Q)
    Q = std::move(Qn);
    if (change < 1e-6) break;
  }

  Mat B = apply_t(Q).transpose();  // (U^0)^T P(A), r x n
  Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Mat U0 = Q * svd.matrixU();
  Mat V0 = svd.singularValues().asDiagonal() * Mat(svd.matrixV().transpose());
  return {U0, V0};
}

inline ProblemSpec make_mcp_problem(const std::shared_ptr<McpKernel>& k) {
  ProblemSpec p;
  p.block_count = 2;
  p.eval_f = [k](const BlockVector& x) { return k->f(x); };
  p.eval_g = [](int, const Mat&) { return 0.0; };
  return p;
}

inline std::vector<SurrogateConfig> mcp_surrogates(const std::shared_ptr<McpKernel>& k) {
  auto inner = std::make_shared<SurrogateConfig>();
  LipschitzSurrogate lip;
  lip.kappa = 1.0;
  lip.lipschitz_of_block = [k](int i, const BlockVector& y) { return k->lipschitz(i, y); };
  inner->family = lip;
  inner->convexity_mode = ConvexityMode::FullyConvex;
  inner->g_convex = true;

  CompositeSurrogate comp;
  comp.inner = inner;
  comp.psi_value = [k](const BlockVector& x) { return k->psi(x); };
  comp.psi_grad = [k](int i, const BlockVector& y) { return k->psi_grad(i, y); };
  comp.phi_value = [k](const BlockVector& rv) { return k->phi_at_r(rv); };
  comp.phi_grad = [k](int i, const BlockVector& rv) { return k->phi_grad(i, rv); };
  comp.r_map = [](int, const Mat& x) { return Mat(x.cwiseAbs()); };
  comp.r_lipschitz = {1.0, 1.0};  // |.| is 1-Lipschitz
  double lt2 = k->lambda() * k->theta() * k->theta();
  comp.phi_lipschitz = {lt2, lt2};  // |phi''| = lambda theta^2 e^{-theta r} <= lambda theta^2
  comp.composite_step = [](int, const Mat& c, const Mat& z, double lambda, const Mat& W) {
    return soft_threshold_weighted(Mat(z - c / lambda), W, 1.0 / lambda);
  };

  SurrogateConfig cfg;
  cfg.family = comp;
  cfg.convexity_mode = ConvexityMode::FullyConvex;  // psi block-convex, g = 0
  cfg.g_convex = true;
  return {cfg, cfg};
}

/// PALM baseline: linearize psi only and keep the exact exponential prox,
/// solved per entry with prox_exponential.
inline ProblemSpec make_palm_problem(const std::shared_ptr<McpKernel>& k) {
  ProblemSpec p;
  p.block_count = 2;
  p.eval_f = [k](const BlockVector& x) { return k->psi(x); };
  p.eval_block_grad = [k](int i, const BlockVector& y) { return k->psi_grad(i, y); };
  p.eval_g = [k](int, const Mat& xi) { return k->regularizer(xi); };
  p.nonsmooth_step = [k](int, const Mat& c, const Mat& z, double lambda) {
    Mat P = z - c / lambda;
    double gamma = k->lambda() / lambda;
    if (gamma == 0) return P;
    Mat out(P.rows(), P.cols());
    for (Index a = 0; a < P.rows(); ++a)
      for (Index b = 0; b < P.cols(); ++b) out(a, b) = prox_exponential(P(a, b), gamma, k->theta());
    return out;
  };
  return p;
}

struct McpResult {
  Mat U, V;
  RunLog log;
  std::vector<std::pair<long, double>> rmse_trace;
  double final_rmse = 0;
};

/// Closed-form soft-threshold updates for the TITAN variants
/// (U^{k+1} = S_{1/L_1}(P^k, grad_U phi(r(U^k, V^k)))), PALM with the exact
/// scalar prox as the baseline. beta follows
/// min{(mu_{k-1}-1)/mu_k, sqrt(C L^{k-1}/L^k)} for TitanExtra and 0 for TitanNo.
inline McpResult mcp_run(const McpInstance& inst, const SolverOptions& opts, std::uint64_t seed) {
  inst.validate();
  auto kernel = std::make_shared<McpKernel>(inst.observed, inst.lambda, inst.theta, inst.power_opts);

  ProblemSpec p;
  std::vector<SurrogateConfig> cfgs;
  ExtrapolationConfig ex;
  ex.C = inst.C;
  ex.nu = inst.nu;
  ex.nesterov_weight_literal = inst.nesterov_weight_literal;
  switch (inst.variant) {
    case McpVariant::TitanExtra:
      p = make_mcp_problem(kernel);
      cfgs = mcp_surrogates(kernel);
      ex.kind = InertiaKind::NesterovTwoPoint;
      break;
    case McpVariant::TitanNo:
      p = make_mcp_problem(kernel);
      cfgs = mcp_surrogates(kernel);
      ex.kind = InertiaKind::NoInertia;
      break;
    case McpVariant::Palm: {
      p = make_palm_problem(kernel);
      LipschitzSurrogate lip;
      lip.kappa = 1.0;
      lip.lipschitz_of_block = [kernel](int i, const BlockVector& y) {
        return kernel->lipschitz(i, y);
      };
      SurrogateConfig cfg;
      cfg.family = lip;
      cfg.convexity_mode = ConvexityMode::General;  // g nonconvex: descent only, gamma = eta = 0
      cfg.g_convex = false;
      cfgs = {cfg, cfg};
      ex.kind = InertiaKind::NoInertia;
      break;
    }
  }

  auto [U0, V0] = mcp_initial_point(inst.observed, inst.rank, seed);
  BlockVector x0({U0, V0});

  McpResult res;
  SolverOptions run_opts = opts;
  double last_rmse = kernel->rmse(inst.test, U0, V0);
  auto* trace = &res.rmse_trace;
  auto user_metric = opts.progress_metric;  // still invoked; RMSE wins the metric column
  run_opts.progress_metric = [&, kernel, user_metric](long iter, const BlockVector& x) {
    if (user_metric) user_metric(iter, x);
    if (iter % inst.rmse_every == 0) {
      last_rmse = kernel->rmse(inst.test, x.block(0), x.block(1));
      trace->emplace_back(iter, last_rmse);
    }
    return last_rmse;
  };

  RunResult run = titan_run(p, cfgs, ex, Schedule::cyclic(2), run_opts, x0);
  res.U = run.x.block(0);
  res.V = run.x.block(1);
  res.final_rmse = kernel->rmse(inst.test, res.U, res.V);
  long last_iter = run.log.iterations.empty() ? 0 : run.log.iterations.back().iter;
  if (res.rmse_trace.empty() || res.rmse_trace.back().first != last_iter)
    res.rmse_trace.emplace_back(last_iter, res.final_rmse);
  res.log = std::move(run.log);
  return res;
}

}  // namespace titan::apps
