// Command-line driver: single runs, multi-seed benchmarks, and the built-in
// invariant check suite. Exit codes: 0 success, 1 configuration error,
// 2 numerical failure, 3 failed check.

#include <CLI11.hpp>

#include <iostream>

#include "titan/bench.hpp"
#include "titan/selfcheck.hpp"

namespace {

int run_app(const std::string& config_path, const std::string& app) {
  titan::io::ExperimentConfig cfg = titan::io::load_config(config_path);
  if (cfg.app != app)
    throw titan::ConfigError("config is for app '" + cfg.app + "', expected '" + app + "'");
  std::filesystem::create_directories(cfg.output_dir);
  titan::io::persist_ratings_maps(cfg);
  std::uint64_t seed = cfg.seeds.front();
  std::string metrics = cfg.output_dir + "/metrics_" + cfg.app + "_seed" + std::to_string(seed) + ".csv";
  titan::io::SeedOutcome out = titan::io::run_single(cfg, seed, metrics);
  std::cout << "app=" << cfg.app << " variant=" << cfg.variant << " seed=" << seed
            << " iters=" << out.iterations << " objective=" << titan::io::format_double(out.final_objective)
            << " metric=" << titan::io::format_double(out.final_metric) << "\n"
            << "metrics written to " << metrics << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TITAN block majorization-minimization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  long seeds_override = 0;

  auto* run_nmf = app.add_subcommand("run-nmf", "run sparse NMF with the configured preset");
  run_nmf->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto* run_mcp = app.add_subcommand("run-mcp", "run matrix completion with the configured preset");
  run_mcp->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto* bench_cmd = app.add_subcommand("bench", "multi-seed benchmark with mean/std summary");
  bench_cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
  bench_cmd->add_option("--seeds", seeds_override, "override: use seeds 1..N");

  auto* check_cmd = app.add_subcommand("check", "run the invariant/oracle suite");
  (void)check_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand("run-nmf")) return run_app(config_path, "nmf");
    if (app.got_subcommand("run-mcp")) return run_app(config_path, "mcp");
    if (app.got_subcommand("bench")) {
      titan::io::ExperimentConfig cfg = titan::io::load_config(config_path);
      if (seeds_override > 0) {
        cfg.seeds.clear();
        for (long s = 1; s <= seeds_override; ++s) cfg.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      titan::io::BenchSummary s = titan::io::bench(cfg);
      std::cout << "seeds=" << s.per_seed.size() << " metric=" << titan::io::format_double(s.metric_mean)
                << " +- " << titan::io::format_double(s.metric_std)
                << " objective=" << titan::io::format_double(s.objective_mean) << " +- "
                << titan::io::format_double(s.objective_std) << "\n"
                << "summary written to " << cfg.output_dir << "/summary.csv\n";
      return 0;
    }
    if (app.got_subcommand("check")) {
      titan::SelfCheck check;
      return check.run_all() ? 0 : 3;
    }
  } catch (const titan::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const titan::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
