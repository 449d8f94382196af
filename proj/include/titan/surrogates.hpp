#pragma once

#include <Eigen/Eigenvalues>

#include <memory>
#include <random>
#include <variant>

#include "titan/core.hpp"
#include "titan/numerics.hpp"

namespace titan {

/// Selects the (gamma, eta) formula family for the NSDP constants.
/// BlockFConvex additionally unlocks the tight inertia bound A = kappa*L*beta.
enum class ConvexityMode { General, BlockFConvex, FullyConvex };

inline BlockVector with_block(const BlockVector& y, int i, const Mat& x_i) {
  BlockVector out = y;
  out.set_block(i, x_i);
  return out;
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// u_i(x_i, y) = f(x_i, y_{/=i}) + (rho/2) ||x_i - y_i||^2
struct ProximalSurrogate {
  double rho = 1.0;
  std::function<double(int, const BlockVector&)> rho_of_block;  // optional, overrides rho

  double rho_at(int i, const BlockVector& y) const {
    return floored(rho_of_block ? rho_of_block(i, y) : rho);
  }
};

/// u_i(x_i, y) = f(y) + <grad_i f(y), x_i - y_i> + (kappa L(y) / 2) ||x_i - y_i||^2
struct LipschitzSurrogate {
  double kappa = 1.0;
  std::function<double(int, const BlockVector&)> lipschitz_of_block;

  double lipschitz_at(int i, const BlockVector& y) const {
    return floored(lipschitz_of_block(i, y));
  }
};

/// Convex kernel descriptor for Bregman surrogates. grad_inverse is optional
/// and enables the default unconstrained mirror step in the solver.
struct KernelDescriptor {
  std::function<double(const Mat&)> value;
  std::function<Mat(const Mat&)> grad;
  double strong_convexity = 1.0;  // rho_phi
  std::function<Mat(const Mat&)> grad_inverse;
};

inline double bregman_divergence(const KernelDescriptor& k, const Mat& x, const Mat& v) {
  return k.value(x) - k.value(v) - frob_dot(k.grad(v), x - v);
}

/// phi(x) = (1/2)||x||^2; D_phi is half the squared Euclidean distance.
inline KernelDescriptor squared_norm_kernel() {
  KernelDescriptor k;
  k.value = [](const Mat& x) { return 0.5 * x.squaredNorm(); };
  k.grad = [](const Mat& x) { return x; };
  k.strong_convexity = 1.0;
  k.grad_inverse = [](const Mat& g) { return g; };
  return k;
}

/// phi(x) = (1/2) vec(x)^T H vec(x) for SPD H on the row-major vectorization.
inline KernelDescriptor quadratic_kernel(const Mat& H) {
  if (H.rows() != H.cols()) throw ShapeError("quadratic_kernel: H must be square");
  Eigen::SelfAdjointEigenSolver<Mat> eig(H);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0)
    throw ConfigError("quadratic_kernel: H must be symmetric positive definite");
  auto Hinv = std::make_shared<Mat>(H.inverse());
  auto Hcopy = std::make_shared<Mat>(H);
  KernelDescriptor k;
  k.value = [Hcopy](const Mat& x) {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), x.size());
    return 0.5 * v.dot(Eigen::VectorXd(*Hcopy * v));
  };
  k.grad = [Hcopy](const Mat& x) {
    Eigen::Map<const Eigen::VectorXd> v(x.data(), x.size());
    Eigen::VectorXd g = *Hcopy * v;
    return Mat(Eigen::Map<const Mat>(g.data(), x.rows(), x.cols()));
  };
  k.strong_convexity = eig.eigenvalues().minCoeff();
  k.grad_inverse = [Hinv](const Mat& g) {
    Eigen::Map<const Eigen::VectorXd> v(g.data(), g.size());
    Eigen::VectorXd x = *Hinv * v;
    return Mat(Eigen::Map<const Mat>(x.data(), g.rows(), g.cols()));
  };
  return k;
}

/// u_i(x_i, y) = f(y) + <grad_i f(y), x_i - y_i> + kappa L(y) D_phi(x_i, y_i)
///
/// inner_solver(i, c, anchor, coeff) solves
///   argmin_{x in X_i} <c, x> + coeff * D_phi(x, anchor) + g_i(x).
/// Without it the solver takes the unconstrained mirror step through
/// kernel.grad_inverse, which is only valid for g_i = 0 and X_i = E_i.
struct BregmanSurrogate {
  double kappa = 1.0;
  KernelDescriptor kernel;
  std::function<double(int, const BlockVector&)> relative_lipschitz;
  std::function<Mat(int, const Mat&, const Mat&, double)> inner_solver;

  double lipschitz_at(int i, const BlockVector& y) const {
    return floored(relative_lipschitz(i, y));
  }
};

/// u_i(x_i, y) = f(y) + <grad_i f(y), x_i - y_i> + (kappa/2) vec(d)^T H(y) vec(d)
///
/// inner_solver(i, c, anchor, H, kappa) solves
///   argmin_{x in X_i} <c, x> + (kappa/2)(x-anchor)^T H (x-anchor) + g_i(x);
/// the default solves the unconstrained normal equations (g_i = 0, X_i = E_i).
struct QuadraticSurrogate {
  double kappa = 1.0;
  std::function<Mat(int, const BlockVector&)> hessian_of_block;  // d x d SPD on vec(block i)
  std::function<Mat(int, const Mat&, const Mat&, const Mat&, double)> inner_solver;
};

struct SurrogateConfig;

/// For f = psi + phi(r(.)) with phi block-wise concave:
/// u_i(x_i, y) = u_i^psi(x_i, y) + phi(r(y)) + <grad_i phi(r(y)), r_i(x_i) - r_i(y_i)>.
/// composite_step solves argmin <c,x> + (lambda/2)||x-z||^2 + <W, r_i(x)> + g_i(x).
struct CompositeSurrogate {
  std::shared_ptr<SurrogateConfig> inner;  // block surrogate for psi
  std::function<double(const BlockVector&)> psi_value;
  std::function<Mat(int, const BlockVector&)> psi_grad;
  std::function<double(const BlockVector&)> phi_value;      // at r-values
  std::function<Mat(int, const BlockVector&)> phi_grad;     // grad_i phi at r-values
  std::function<Mat(int, const Mat&)> r_map;                // r_i
  std::vector<double> r_lipschitz;                          // L_{r_i}
  std::vector<double> phi_lipschitz;                        // L_i^phi
  std::function<Mat(int, const Mat&, const Mat&, double, const Mat&)> composite_step;

  BlockVector r_of(const BlockVector& y) const {
    std::vector<Mat> blocks;
    blocks.reserve(static_cast<std::size_t>(y.block_count()));
    for (int j = 0; j < y.block_count(); ++j) blocks.push_back(r_map(j, y.block(j)));
    return BlockVector(std::move(blocks));
  }

  ProblemSpec psi_spec() const {
    ProblemSpec p;
    p.eval_f = psi_value;
    p.eval_block_grad = psi_grad;
    return p;
  }
};

struct SurrogateConfig {
  std::variant<ProximalSurrogate, LipschitzSurrogate, BregmanSurrogate, QuadraticSurrogate,
               CompositeSurrogate>
      family;
  ConvexityMode convexity_mode = ConvexityMode::General;
  bool g_convex = false;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// u_i(x_i, y) for the configured family. p supplies f and grad_i f; the
/// composite family evaluates through its own psi/phi callbacks instead.
inline double surrogate_value(const SurrogateConfig& cfg, int i, const Mat& x_i,
                              const BlockVector& y, const ProblemSpec& p) {
  const Mat d = x_i - y.block(i);
  if (const auto* s = std::get_if<ProximalSurrogate>(&cfg.family)) {
    return p.eval_f(with_block(y, i, x_i)) + 0.5 * s->rho_at(i, y) * d.squaredNorm();
  }
  if (const auto* s = std::get_if<LipschitzSurrogate>(&cfg.family)) {
    double L = s->lipschitz_at(i, y);
    return p.eval_f(y) + frob_dot(p.eval_block_grad(i, y), d) + 0.5 * s->kappa * L * d.squaredNorm();
  }
  if (const auto* s = std::get_if<BregmanSurrogate>(&cfg.family)) {
    double L = s->lipschitz_at(i, y);
    return p.eval_f(y) + frob_dot(p.eval_block_grad(i, y), d) +
           s->kappa * L * bregman_divergence(s->kernel, x_i, y.block(i));
  }
  if (const auto* s = std::get_if<QuadraticSurrogate>(&cfg.family)) {
    Mat H = s->hessian_of_block(i, y);
    Eigen::Map<const Eigen::VectorXd> vd(d.data(), d.size());
    if (H.rows() != vd.size()) throw ShapeError("quadratic surrogate: H size mismatch");
    return p.eval_f(y) + frob_dot(p.eval_block_grad(i, y), d) +
           0.5 * s->kappa * vd.dot(Eigen::VectorXd(H * vd));
  }
  const auto& s = std::get<CompositeSurrogate>(cfg.family);
  BlockVector ry = s.r_of(y);
  double lin = frob_dot(s.phi_grad(i, ry), s.r_map(i, x_i) - ry.block(i));
  return surrogate_value(*s.inner, i, x_i, y, s.psi_spec()) + s.phi_value(ry) + lin;
}

/// phi(r(y)) + <grad_i phi(r(y)), r_i(x_i) - r_i(y_i)>: the concavity upper
/// bound on (phi o r)(x_i, y_{/=i}).
inline double composite_linearization(const CompositeSurrogate& s, const BlockVector& y, int i,
                                      const Mat& x_i) {
  BlockVector ry = s.r_of(y);
  return s.phi_value(ry) + frob_dot(s.phi_grad(i, ry), s.r_map(i, x_i) - ry.block(i));
}

/// Strong-convexity modulus rho_i^(y) of the block approximation error
/// (Condition 2) or of u_i + g_i (Condition 3). Throws if the configuration
/// cannot produce a positive modulus (kappa = 1 with nonconvex g).
inline double surrogate_modulus(const SurrogateConfig& cfg, int i, const BlockVector& y,
                                bool g_convex) {
  double rho = 0;
  if (const auto* s = std::get_if<ProximalSurrogate>(&cfg.family)) {
    rho = s->rho_at(i, y);
  } else if (const auto* s = std::get_if<LipschitzSurrogate>(&cfg.family)) {
    double L = s->lipschitz_at(i, y);
    rho = g_convex ? s->kappa * L : (s->kappa - 1.0) * L;
  } else if (const auto* s = std::get_if<BregmanSurrogate>(&cfg.family)) {
    double L = s->lipschitz_at(i, y);
    rho = (g_convex ? s->kappa * L : (s->kappa - 1.0) * L) * s->kernel.strong_convexity;
  } else if (const auto* s = std::get_if<QuadraticSurrogate>(&cfg.family)) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(s->hessian_of_block(i, y));
    double lmin = eig.eigenvalues().minCoeff();
    rho = g_convex ? s->kappa * lmin : (s->kappa - 1.0) * lmin;
  } else {
    const auto& cs = std::get<CompositeSurrogate>(cfg.family);
    return surrogate_modulus(*cs.inner, i, y, g_convex);
  }
  if (rho <= 0)
    throw ConfigError("surrogate_modulus: nonpositive modulus for block " + std::to_string(i) +
                      " (kappa = 1 with nonconvex g?)");
  return rho;
}

struct MajorizationReport {
  long violations = 0;
  double worst_gap = 0;           // most negative u - f seen (0 if none)
  double max_gap_at_anchor = 0;   // |u(y_i, y) - f(y)|
};

/// Samples x_i at the given radius around y_i and counts violations of
/// u_i(x_i, y) >= f(x_i, y_{/=i}) below -1e-10 (Definition 1 (b)); also
/// reports the anchor gap of condition (a).
inline MajorizationReport check_majorization(const SurrogateConfig& cfg, int i,
                                             const ProblemSpec& p, const BlockVector& y,
                                             int samples, double radius, std::uint64_t seed,
                                             double tolerance = 1e-10) {
  if (samples < 1) throw ConfigError("check_majorization: samples >= 1 required");
  MajorizationReport rep;
  rep.max_gap_at_anchor = std::abs(surrogate_value(cfg, i, y.block(i), y, p) - p.eval_f(y));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Mat& yi = y.block(i);
  for (int t = 0; t < samples; ++t) {
    Mat x = yi;
    for (Index a = 0; a < x.rows(); ++a)
      for (Index b = 0; b < x.cols(); ++b) x(a, b) += radius * uni(rng);
    double gap = surrogate_value(cfg, i, x, y, p) - p.eval_f(with_block(y, i, x));
    if (gap < -tolerance) {
      ++rep.violations;
      rep.worst_gap = std::min(rep.worst_gap, gap);
    }
  }
  return rep;
}

}  // namespace titan
