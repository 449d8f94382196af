#pragma once

#include <cstdlib>
#include <mutex>
#include <thread>

#include "titan/config.hpp"

namespace titan::io {

struct SeedOutcome {
  std::uint64_t seed = 0;
  double final_objective = 0;
  double final_metric = 0;  // relative error (nmf) or test RMSE (mcp)
  long iterations = 0;
  double seconds = 0;
};

struct BenchSummary {
  std::vector<SeedOutcome> per_seed;  // in config seed order
  double metric_mean = 0, metric_std = 0;
  double objective_mean = 0, objective_std = 0;
};

inline std::pair<double, double> mean_and_sample_std(const std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline SeedOutcome run_single(const ExperimentConfig& cfg, std::uint64_t seed,
                              const std::string& metrics_path = {}) {
  SolverOptions opts = cfg.solver_options();
  SeedOutcome out;
  out.seed = seed;
  RunLog log;
  if (cfg.app == "nmf") {
    apps::NmfResult r = apps::sparse_nmf_run(build_nmf_instance(cfg, seed), opts, seed);
    out.final_metric = r.final_rel_error;
    log = std::move(r.log);
  } else {
    apps::McpResult r = apps::mcp_run(build_mcp_instance(cfg, seed), opts, seed);
    out.final_metric = r.final_rmse;
    log = std::move(r.log);
  }
  out.final_objective = log.iterations.empty() ? log.f_initial : log.iterations.back().objective;
  out.iterations = static_cast<long>(log.iterations.size());
  out.seconds = log.total_seconds;
  if (!metrics_path.empty()) write_metrics(log, metrics_path);
  return out;
}

inline int bench_pool_size(std::size_t jobs) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TITAN_THREADS")) {
    long v = std::strtol(env, nullptr, 10);
    if (v >= 1) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(std::min<std::size_t>(hw, jobs));
}

/// Runs the config once per seed on a bounded worker pool (TITAN_THREADS caps
/// the pool). Each run owns its solver; per-seed metrics CSVs are written by
/// the workers, the summary by the coordinator in seed order.
inline BenchSummary bench(const ExperimentConfig& cfg) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  persist_ratings_maps(cfg);
  BenchSummary summary;
  summary.per_seed.resize(cfg.seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      std::size_t t = next.fetch_add(1);
      if (t >= cfg.seeds.size()) return;
      try {
        std::uint64_t seed = cfg.seeds[t];
        std::string path = cfg.output_dir + "/metrics_seed" + std::to_string(seed) + ".csv";
        summary.per_seed[t] = run_single(cfg, seed, path);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int pool = bench_pool_size(cfg.seeds.size());
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);

  std::vector<double> metrics, objectives;
  for (const auto& s : summary.per_seed) {
    metrics.push_back(s.final_metric);
    objectives.push_back(s.final_objective);
  }
  std::tie(summary.metric_mean, summary.metric_std) = mean_and_sample_std(metrics);
  std::tie(summary.objective_mean, summary.objective_std) = mean_and_sample_std(objectives);

  std::ofstream out(cfg.output_dir + "/summary.csv", std::ios::binary);
  if (!out) throw IoError("cannot write bench summary");
  out << "app,variant,n_seeds,metric_mean,metric_std,objective_mean,objective_std\n";
  out << cfg.app << "," << cfg.variant << "," << cfg.seeds.size() << ","
      << format_double(summary.metric_mean) << "," << format_double(summary.metric_std) << ","
      << format_double(summary.objective_mean) << "," << format_double(summary.objective_std)
      << "\n";
  return summary;
}

}  // namespace titan::io
