#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>

#include "titan/apps/synthetic.hpp"
#include "titan/io.hpp"

namespace titan::io {

/// One experiment: app + dataset (file or synthesized), algorithm variant,
/// the surrogate/extrapolation constants, seeds, and budgets. JSON layout is
/// canonical (sorted keys, two-space indent) so parse/serialize round-trips.
struct ExperimentConfig {
  std::string app = "nmf";              // "nmf" | "mcp"
  std::string variant = "titan";        // nmf: titan|palm; mcp: titan-extra|titan-no|palm
  std::string dataset_path;             // empty: synthesize
  std::string dataset_format = "dense_csv";  // nmf: dense_csv; mcp: double_colon|tsv|matrix_market

  struct Synthesize {
    int rows = 100, cols = 80, rank = 5;
    double noise = 0.01;
    double density = 0.3;  // mcp only
    int sparsity = 0;      // nmf only; 0 = default ceil(0.25 rank)
  } synth;

  int rank = 5;
  int sparsity = 0;
  double kappa1 = 1.0001;
  double C = 0.9999 * 0.9999;
  double nu = 0.5;
  double lambda = 0.1;
  double theta = 5.0;
  int repeat_u = 1, repeat_v = 1;
  double train_fraction = 0.7;
  int rmse_every = 10;

  std::vector<std::uint64_t> seeds{1};
  long max_iters = 1000;
  double time_seconds = 0;  // 0: no time budget
  std::string output_dir = "out";
  std::string monitor_mode = "sampled";
  int monitor_every = 10;
  bool restart = false;

  void validate() const {
    if (app != "nmf" && app != "mcp") throw ConfigError("config: app must be nmf or mcp");
    if (app == "nmf" && variant != "titan" && variant != "palm")
      throw ConfigError("config: nmf variant must be titan or palm");
    if (app == "mcp" && variant != "titan-extra" && variant != "titan-no" && variant != "palm")
      throw ConfigError("config: mcp variant must be titan-extra, titan-no or palm");
    if (seeds.empty()) throw ConfigError("config: seeds must be nonempty");
    if (rank < 1) throw ConfigError("config: rank >= 1");
    if (C <= 0 || C >= 1) throw ConfigError("config: C in (0,1)");
    if (nu <= 0 || nu >= 1) throw ConfigError("config: nu in (0,1)");
    if (kappa1 < 1) throw ConfigError("config: kappa1 >= 1");
    if (lambda <= 0 || theta <= 0) throw ConfigError("config: lambda, theta > 0");
    if (train_fraction <= 0 || train_fraction >= 1) throw ConfigError("config: train_fraction in (0,1)");
    if (max_iters < 0) throw ConfigError("config: max_iters >= 0");
    if (time_seconds < 0) throw ConfigError("config: time_seconds >= 0");
    if (monitor_mode != "off" && monitor_mode != "sampled" && monitor_mode != "full")
      throw ConfigError("config: monitor mode off|sampled|full");
    if (monitor_every < 1) throw ConfigError("config: monitor_every >= 1");
    if (repeat_u < 1 || repeat_v < 1) throw ConfigError("config: repeat counts >= 1");
    if (rmse_every < 1) throw ConfigError("config: rmse_every >= 1");
  }

  SolverOptions solver_options() const {
    SolverOptions opts;
    opts.max_iters = max_iters;
    if (time_seconds > 0) opts.time_budget_seconds = time_seconds;
    opts.restart_enabled = restart;
    if (monitor_mode == "off") opts.monitor = NsdpMonitor::Off;
    if (monitor_mode == "sampled") opts.monitor = NsdpMonitor::Sampled;
    if (monitor_mode == "full") opts.monitor = NsdpMonitor::Full;
    opts.monitor_every = monitor_every;
    return opts;
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["app"] = c.app;
  j["variant"] = c.variant;
  j["dataset"]["path"] = c.dataset_path;
  j["dataset"]["format"] = c.dataset_format;
  j["dataset"]["synthesize"] = {{"rows", c.synth.rows},      {"cols", c.synth.cols},
                                {"rank", c.synth.rank},      {"noise", c.synth.noise},
                                {"density", c.synth.density}, {"sparsity", c.synth.sparsity}};
  j["params"] = {{"rank", c.rank},
                 {"sparsity", c.sparsity},
                 {"kappa1", c.kappa1},
                 {"C", c.C},
                 {"nu", c.nu},
                 {"lambda", c.lambda},
                 {"theta", c.theta},
                 {"repeat_u", c.repeat_u},
                 {"repeat_v", c.repeat_v},
                 {"train_fraction", c.train_fraction},
                 {"rmse_every", c.rmse_every}};
  j["seeds"] = c.seeds;
  j["budget"] = {{"max_iters", c.max_iters}, {"time_seconds", c.time_seconds}};
  j["output_dir"] = c.output_dir;
  j["monitor"] = {{"mode", c.monitor_mode}, {"every", c.monitor_every}};
  j["restart"] = c.restart;
  return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  try {
    c.app = j.at("app").get<std::string>();
    c.variant = j.at("variant").get<std::string>();
    const auto& d = j.at("dataset");
    c.dataset_path = d.at("path").get<std::string>();
    c.dataset_format = d.at("format").get<std::string>();
    const auto& s = d.at("synthesize");
    c.synth.rows = s.at("rows").get<int>();
    c.synth.cols = s.at("cols").get<int>();
    c.synth.rank = s.at("rank").get<int>();
    c.synth.noise = s.at("noise").get<double>();
    c.synth.density = s.at("density").get<double>();
    c.synth.sparsity = s.at("sparsity").get<int>();
    const auto& p = j.at("params");
    c.rank = p.at("rank").get<int>();
    c.sparsity = p.at("sparsity").get<int>();
    c.kappa1 = p.at("kappa1").get<double>();
    c.C = p.at("C").get<double>();
    c.nu = p.at("nu").get<double>();
    c.lambda = p.at("lambda").get<double>();
    c.theta = p.at("theta").get<double>();
    c.repeat_u = p.at("repeat_u").get<int>();
    c.repeat_v = p.at("repeat_v").get<int>();
    c.train_fraction = p.at("train_fraction").get<double>();
    c.rmse_every = p.at("rmse_every").get<int>();
    c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    c.max_iters = j.at("budget").at("max_iters").get<long>();
    c.time_seconds = j.at("budget").at("time_seconds").get<double>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.monitor_mode = j.at("monitor").at("mode").get<std::string>();
    c.monitor_every = j.at("monitor").at("every").get<int>();
    c.restart = j.at("restart").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline std::string serialize_config(const ExperimentConfig& c) { return to_json(c).dump(2) + "\n"; }

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const ExperimentConfig& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config: " + path);
  out << serialize_config(c);
}

// ---------------------------------------------------------------------------
// Dataset materialization
// ---------------------------------------------------------------------------

inline apps::SparseNmfInstance build_nmf_instance(const ExperimentConfig& c, std::uint64_t seed) {
  apps::SparseNmfInstance inst;
  if (c.dataset_path.empty()) {
    inst = apps::synthesize_nmf(c.synth.rows, c.synth.cols, c.synth.rank, c.synth.sparsity,
                                c.synth.noise, seed ^ 0xA5A5A5A5ull)
               .instance;
    inst.rank = c.rank;
  } else {
    inst.M = load_dense_csv(c.dataset_path);
    inst.rank = c.rank;
  }
  inst.sparsity = c.sparsity;
  inst.kappa1 = c.variant == "palm" ? 1.0 : c.kappa1;
  inst.palm_baseline = c.variant == "palm";
  inst.C = c.C;
  inst.nu1 = c.nu;
  inst.repeat_u = c.repeat_u;
  inst.repeat_v = c.repeat_v;
  return inst;
}

/// Saves the external-to-dense id maps of a file-backed ratings dataset next
/// to the run outputs. No-op for synthesized instances.
inline void persist_ratings_maps(const ExperimentConfig& c) {
  if (c.app != "mcp" || c.dataset_path.empty()) return;
  RatingsData data = load_ratings(c.dataset_path, ratings_format_from_string(c.dataset_format));
  std::filesystem::create_directories(c.output_dir);
  save_id_map(data.row_ids, c.output_dir + "/row_ids.csv");
  save_id_map(data.col_ids, c.output_dir + "/col_ids.csv");
}

inline apps::McpInstance build_mcp_instance(const ExperimentConfig& c, std::uint64_t seed) {
  apps::McpInstance inst;
  if (c.dataset_path.empty()) {
    inst = apps::synthesize_mcp(c.synth.rows, c.synth.cols, c.synth.rank, c.synth.noise,
                                c.synth.density, c.train_fraction, seed ^ 0x5A5A5A5Aull);
  } else {
    RatingsData data = load_ratings(c.dataset_path, ratings_format_from_string(c.dataset_format));
    auto [train, test] = split_train_test(data.mask, c.train_fraction, seed);
    inst.observed = std::move(train);
    inst.test = std::move(test);
  }
  inst.rank = c.rank;
  inst.lambda = c.lambda;
  inst.theta = c.theta;
  inst.C = c.C;
  inst.nu = c.nu;
  inst.rmse_every = c.rmse_every;
  if (c.variant == "titan-extra") inst.variant = apps::McpVariant::TitanExtra;
  if (c.variant == "titan-no") inst.variant = apps::McpVariant::TitanNo;
  if (c.variant == "palm") inst.variant = apps::McpVariant::Palm;
  return inst;
}

}  // namespace titan::io
