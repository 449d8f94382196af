#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "titan/core.hpp"

namespace titan {

struct PowerIterOptions {
  double tol = 1e-8;      // relative change of the Rayleigh quotient
  int max_iters = 100;
  std::uint64_t seed = 12345;
};

namespace detail {

inline Eigen::VectorXd random_unit_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  double nrm = v.norm();
  if (nrm == 0) {
    v.setZero();
    v[0] = 1;
    return v;
  }
  return v / nrm;
}

// Power iteration for the largest eigenvalue of a symmetric PSD operator,
// stopping on the relative change of the Rayleigh quotient.
template <class ApplyOp>
double power_iterate(Index n, ApplyOp&& apply, const PowerIterOptions& opts) {
  if (opts.tol <= 0 || opts.max_iters < 1) throw ConfigError("PowerIterOptions out of range");
  Eigen::VectorXd v = random_unit_vector(n, opts.seed);
  double lambda = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    Eigen::VectorXd w = apply(v);
    double wn = w.norm();
    if (wn <= kModulusFloor) return kModulusFloor;  // started (numerically) in the null space
    double next = v.dot(w);
    v = w / wn;
    if (it > 0 && std::abs(next - lambda) <= opts.tol * std::abs(next)) return floored(next);
    lambda = next;
  }
  return floored(lambda);
}

}  // namespace detail

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
inline double spectral_norm_sym(const Mat& S, const PowerIterOptions& opts = {}) {
  if (S.rows() == 0 || S.rows() != S.cols()) throw ShapeError("spectral_norm_sym: square matrix required");
  return detail::power_iterate(S.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(S * v); },
                               opts);
}

enum class GramSide { Left, Right };  // Left: ||B B^T||, Right: ||B^T B||

/// ||B B^T|| or ||B^T B|| (both equal sigma_max(B)^2) by power iteration.
/// The iteration runs on the smaller Gram side; the Gram matrix of the long
/// side is never materialized. An all-zero B returns the 1e-12 floor.
inline double spectral_norm_gram(const Mat& B, GramSide /*side*/ = GramSide::Left,
                                 const PowerIterOptions& opts = {}) {
  if (B.rows() == 0 || B.cols() == 0) throw ShapeError("spectral_norm_gram: empty matrix");
  const Index small = std::min(B.rows(), B.cols());
  if (small <= 64) {
    Mat gram = (B.rows() <= B.cols()) ? Mat(B * B.transpose()) : Mat(B.transpose() * B);
    return spectral_norm_sym(gram, opts);
  }
  if (B.rows() <= B.cols())
    return detail::power_iterate(
        B.rows(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(B * (B.transpose() * v)); }, opts);
  return detail::power_iterate(
      B.cols(), [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(B.transpose() * (B * v)); }, opts);
}

/// Keeps the s largest-magnitude entries of every column, zeroing the rest.
/// Ties keep the smaller row index.
inline Mat hard_threshold_columns(const Mat& X, int s) {
  if (s < 1 || s > X.rows())
    throw ConfigError("hard_threshold_columns: s=" + std::to_string(s) + " out of range for " +
                      std::to_string(X.rows()) + " rows");
  if (s == X.rows()) return X;
  Mat out = Mat::Zero(X.rows(), X.cols());
  std::vector<int> idx(static_cast<std::size_t>(X.rows()));
  for (Index j = 0; j < X.cols(); ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + s, idx.end(), [&](int a, int b) {
      double fa = std::abs(X(a, j)), fb = std::abs(X(b, j));
      return fa > fb || (fa == fb && a < b);
    });
    for (int t = 0; t < s; ++t) out(idx[static_cast<std::size_t>(t)], j) = X(idx[static_cast<std::size_t>(t)], j);
  }
  return out;
}

inline double soft_threshold_scalar(double p, double w, double tau) {
  double m = std::abs(p) - tau * w;
  return m > 0 ? (p > 0 ? m : -m) : 0.0;
}

/// Entry-wise weighted soft threshold S_tau(P, W)_ij = [|p_ij| - tau w_ij]_+ sign(p_ij),
/// the minimizer of (1/2)||X - P||^2 + tau <W, |X|>.
inline Mat soft_threshold_weighted(const Mat& P, const Mat& W, double tau) {
  if (P.rows() != W.rows() || P.cols() != W.cols())
    throw ShapeError("soft_threshold_weighted: shape mismatch");
  if (tau <= 0) throw ConfigError("soft_threshold_weighted: tau must be positive");
  if ((W.array() < 0).any()) throw ConfigError("soft_threshold_weighted: negative weight");
  Mat out(P.rows(), P.cols());
  for (Index i = 0; i < P.rows(); ++i)
    for (Index j = 0; j < P.cols(); ++j) out(i, j) = soft_threshold_scalar(P(i, j), W(i, j), tau);
  return out;
}

/// Global minimizer of q(x) = (1/2)(x - v)^2 + gamma * (1 - exp(-theta |x|)).
///
/// By symmetry the search runs on sign(v) * x >= 0. Candidates are x = 0 and
/// the stationary point of the smooth branch, x = v - sign(v) gamma theta
/// exp(-theta |x|), located by bisection + Newton on [0, |v|]. Exact objective
/// ties break toward 0.
inline double prox_exponential(double v, double gamma, double theta) {
  if (gamma <= 0 || theta <= 0) throw ConfigError("prox_exponential: gamma, theta must be positive");
  if (v == 0) return 0;
  const double a = std::abs(v);
  // g(x) = x - a + gamma*theta*exp(-theta x) on [0, a]; roots are stationary points.
  auto g = [&](double x) { return x - a + gamma * theta * std::exp(-theta * x); };
  // g'(x) = 1 - gamma*theta^2 exp(-theta x) >= 0 once x passes x_flat.
  double x_flat = 0;
  if (gamma * theta * theta > 1) x_flat = std::log(gamma * theta * theta) / theta;

  double best = 0;  // candidate x = 0, q(0) = a^2/2 relative to the branch values below
  double q0 = 0.5 * a * a;
  double qbest = q0;

  if (x_flat < a) {
    double lo = x_flat, hi = a;
    if (g(lo) <= 0) {  // rightmost root sits in [lo, hi]: g(hi) > 0 always
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double gm = g(mid);
        if (gm == 0) {
          lo = hi = mid;
          break;
        }
        (gm < 0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * (1 + a)) break;
      }
      double x = 0.5 * (lo + hi);
      for (int it = 0; it < 8; ++it) {  // Newton polish inside the bracket
        double e = gamma * theta * std::exp(-theta * x);
        double deriv = 1 - theta * e;
        if (deriv <= 0) break;
        double step = (x - a + e) / deriv;
        double xn = x - step;
        if (xn < lo || xn > hi) break;
        x = xn;
        if (std::abs(step) <= 1e-16 * (1 + a)) break;
      }
      double qx = 0.5 * (x - a) * (x - a) + gamma * (1 - std::exp(-theta * x));
      if (qx < qbest) {
        qbest = qx;
        best = x;
      }
    }
  }
  return v > 0 ? best : -best;
}

/// Max relative entry error between the analytic gradient and a central
/// finite difference of eval at x. h <= 0 selects 1e-6*(1 + max|x|).
inline double grad_check(const std::function<double(const Mat&)>& eval, const Mat& analytic_grad,
                         const Mat& x, double h = -1) {
  if (h <= 0) h = 1e-6 * (1.0 + x.cwiseAbs().maxCoeff());
  Mat xp = x;
  double worst = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      double orig = x(i, j);
      xp(i, j) = orig + h;
      double fp = eval(xp);
      xp(i, j) = orig - h;
      double fm = eval(xp);
      xp(i, j) = orig;
      double fd = (fp - fm) / (2 * h);
      double err = std::abs(fd - analytic_grad(i, j)) / (1.0 + std::abs(analytic_grad(i, j)));
      worst = std::max(worst, err);
    }
  }
  return worst;
}

/// Deterministic matrix generators used by tests and instance synthesis.
inline Mat random_gaussian(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * gauss(rng);
  return m;
}

inline Mat random_uniform(Index rows, Index cols, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Mat m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = uni(rng);
  return m;
}

}  // namespace titan
