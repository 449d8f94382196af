#pragma once

#include "titan/apps/matrix_completion.hpp"
#include "titan/apps/sparse_nmf.hpp"
#include "titan/io.hpp"

namespace titan::apps {

/// Planted sparse-NMF instance: M = U* V* + noise, clamped to stay
/// nonnegative, with U* >= 0 s-sparse per column and V* >= 0.
struct PlantedNmf {
  SparseNmfInstance instance;
  Mat U_true, V_true;
};

inline PlantedNmf synthesize_nmf(int rows, int cols, int rank, int sparsity, double noise,
                                 std::uint64_t seed) {
  if (rows < 1 || cols < 1 || rank < 1) throw ConfigError("synthesize_nmf: positive dims required");
  PlantedNmf out;
  out.instance.rank = rank;
  out.instance.sparsity = sparsity;
  const int s = out.instance.effective_sparsity();
  std::mt19937_64 rng(seed);
  Mat U = random_gaussian(rows, rank, rng).cwiseMax(0.0);
  // Guarantee a workable support before thresholding: a zero column would
  // leave an empty factor.
  for (Index j = 0; j < U.cols(); ++j)
    if (U.col(j).maxCoeff() <= 0) U(static_cast<Index>(j) % rows, j) = 1.0;
  out.U_true = hard_threshold_columns(U, s);
  out.V_true = random_gaussian(rank, cols, rng).cwiseMax(0.0);
  Mat M = out.U_true * out.V_true;
  if (noise > 0) M += noise * random_gaussian(rows, cols, rng);
  out.instance.M = M.cwiseMax(0.0);
  return out;
}

/// Low-rank MCP instance: A = U* V* / sqrt(rank) + noise, observed at the
/// given density (exact count, sampled without replacement), split
/// train_fraction / (1 - train_fraction) by the same seed.
inline McpInstance synthesize_mcp(int rows, int cols, int rank, double noise, double density,
                                  double train_fraction, std::uint64_t seed,
                                  McpVariant variant = McpVariant::TitanExtra) {
  if (rows < 1 || cols < 1 || rank < 1) throw ConfigError("synthesize_mcp: positive dims required");
  if (density <= 0 || density > 1) throw ConfigError("synthesize_mcp: density in (0,1] required");
  std::mt19937_64 rng(seed);
  Mat U = random_gaussian(rows, rank, rng, 1.0 / std::sqrt(static_cast<double>(rank)));
  Mat V = random_gaussian(rank, cols, rng);
  Mat A = U * V;
  if (noise > 0) A += noise * random_gaussian(rows, cols, rng);

  const std::size_t total = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  std::vector<std::size_t> cells(total);
  std::iota(cells.begin(), cells.end(), 0);
  std::shuffle(cells.begin(), cells.end(), rng);
  auto n_obs = static_cast<std::size_t>(std::floor(density * static_cast<double>(total) + 0.5));
  n_obs = std::max<std::size_t>(1, std::min(n_obs, total));
  std::vector<MaskEntry> entries;
  entries.reserve(n_obs);
  for (std::size_t t = 0; t < n_obs; ++t) {
    int r = static_cast<int>(cells[t] / static_cast<std::size_t>(cols));
    int c = static_cast<int>(cells[t] % static_cast<std::size_t>(cols));
    entries.push_back({r, c, A(r, c)});
  }
  ObservationMask mask(rows, cols, std::move(entries));

  McpInstance inst;
  inst.rank = rank;
  inst.variant = variant;
  auto [train, test] = io::split_train_test(mask, train_fraction, seed ^ 0x9e3779b97f4a7c15ull);
  inst.observed = std::move(train);
  inst.test = std::move(test);
  return inst;
}

}  // namespace titan::apps
