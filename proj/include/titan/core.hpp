#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace titan {

/// Dense block storage. Blocks are row-major 64-bit float matrices.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

inline constexpr double kModulusFloor = 1e-12;

/// Floors Lipschitz/modulus values before they reach a division.
inline double floored(double v) { return v > kModulusFloor ? v : kModulusFloor; }

/// Frobenius inner product <A, B>.
template <class A, class B>
double frob_dot(const A& a, const B& b) {
  return a.cwiseProduct(b).sum();
}

namespace detail {
inline std::uint64_t next_block_tag() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

/// The iterate x = (x_1,...,x_m): an ordered list of dense blocks whose
/// count and shapes are fixed for the life of a run. Mutation goes through
/// set_block so each block carries a unique content tag; evaluators can key
/// caches on tags to recognise unchanged blocks.
class BlockVector {
 public:
  BlockVector() = default;

  explicit BlockVector(std::vector<Mat> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw ShapeError("BlockVector needs at least one block");
    tags_.resize(blocks_.size());
    for (auto& t : tags_) t = detail::next_block_tag();
  }

  int block_count() const { return static_cast<int>(blocks_.size()); }

  const Mat& block(int i) const { return blocks_.at(static_cast<std::size_t>(i)); }
  std::uint64_t tag(int i) const { return tags_.at(static_cast<std::size_t>(i)); }

  void set_block(int i, Mat value) {
    Mat& dst = blocks_.at(static_cast<std::size_t>(i));
    if (value.rows() != dst.rows() || value.cols() != dst.cols())
      throw ShapeError("set_block: block " + std::to_string(i) + " shape change " +
                       shape_string(dst) + " -> " + shape_string(value));
    dst = std::move(value);
    tags_[static_cast<std::size_t>(i)] = detail::next_block_tag();
  }

  bool same_shape(const BlockVector& other) const {
    if (block_count() != other.block_count()) return false;
    for (int i = 0; i < block_count(); ++i)
      if (block(i).rows() != other.block(i).rows() || block(i).cols() != other.block(i).cols())
        return false;
    return true;
  }

  double squared_norm() const {
    double s = 0;
    for (const auto& b : blocks_) s += b.squaredNorm();
    return s;
  }

  bool all_finite() const {
    for (const auto& b : blocks_)
      if (!b.allFinite()) return false;
    return true;
  }

  static std::string shape_string(const Mat& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
  }

 private:
  std::vector<Mat> blocks_;
  std::vector<std::uint64_t> tags_;
};

/// a*x + y blockwise.
inline BlockVector block_axpy(double a, const BlockVector& x, const BlockVector& y) {
  if (!x.same_shape(y)) throw ShapeError("block_axpy: shape mismatch");
  BlockVector out = y;
  for (int i = 0; i < y.block_count(); ++i) out.set_block(i, Mat(a * x.block(i) + y.block(i)));
  return out;
}

/// The objective F = f + sum_i g_i together with the oracles the solver needs.
///
/// nonsmooth_step(i, c, z, lambda) solves
///     argmin_{x_i in X_i}  <c, x_i> + (lambda/2)||x_i - z||^2 + g_i(x_i)
/// and must return a point that is feasible for X_i and dom g_i.
/// eval_block_grad is only required on the smooth-surrogate paths;
/// prox_point_step (full proximal-point oracle including f) only for the
/// proximal surrogate family. on_block_updated is an optional cache
/// invalidation hook the solver fires after each accepted block update.
struct ProblemSpec {
  int block_count = 0;
  std::function<double(const BlockVector&)> eval_f;
  std::function<Mat(int, const BlockVector&)> eval_block_grad;
  std::function<double(int, const Mat&)> eval_g;
  std::function<Mat(int, const Mat& c, const Mat& z, double lambda)> nonsmooth_step;
  std::function<Mat(int, const BlockVector& y, const Mat& z, double rho)> prox_point_step;
  std::function<void(int)> on_block_updated;

  void notify_block_updated(int i) const {
    if (on_block_updated) on_block_updated(i);
  }
  void notify_all_updated() const {
    if (on_block_updated)
      for (int i = 0; i < block_count; ++i) on_block_updated(i);
  }
};

/// F(x) = f(x) + sum_i g_i(x_i). Infeasible indicator blocks yield +inf.
inline double objective_value(const ProblemSpec& p, const BlockVector& x) {
  double f = p.eval_f(x);
  if (std::isnan(f)) throw NumericalError("objective_value: f evaluated to NaN");
  double g = 0;
  if (p.eval_g) {
    for (int i = 0; i < x.block_count(); ++i) {
      double gi = p.eval_g(i, x.block(i));
      if (std::isnan(gi)) throw NumericalError("objective_value: g_" + std::to_string(i) + " is NaN");
      g += gi;
    }
  }
  return f + g;
}

struct MaskEntry {
  int row = 0;
  int col = 0;
  double value = 0;
};

/// Sparse set of observed entries of a nominal rows x cols matrix.
/// Duplicate (row, col) pairs are rejected at construction.
class ObservationMask {
 public:
  ObservationMask() = default;

  ObservationMask(int rows, int cols, std::vector<MaskEntry> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ <= 0 || cols_ <= 0) throw ShapeError("ObservationMask: nonpositive dimensions");
    std::unordered_set<std::int64_t> seen;
    seen.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_)
        throw ShapeError("ObservationMask: index out of range at (" + std::to_string(e.row) +
                         "," + std::to_string(e.col) + ")");
      if (!std::isfinite(e.value)) throw NumericalError("ObservationMask: non-finite value");
      if (!seen.insert(static_cast<std::int64_t>(e.row) * cols_ + e.col).second)
        throw IoError("ObservationMask: duplicate entry (" + std::to_string(e.row) + "," +
                      std::to_string(e.col) + ")");
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<MaskEntry>& entries() const { return entries_; }

  bool disjoint_from(const ObservationMask& other) const {
    std::unordered_set<std::int64_t> seen;
    seen.reserve(entries_.size());
    for (const auto& e : entries_) seen.insert(static_cast<std::int64_t>(e.row) * cols_ + e.col);
    for (const auto& e : other.entries())
      if (seen.count(static_cast<std::int64_t>(e.row) * cols_ + e.col)) return false;
    return true;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<MaskEntry> entries_;
};

}  // namespace titan
