#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <unistd.h>

#include "titan/apps/synthetic.hpp"
#include "titan/bench.hpp"
#include "titan/config.hpp"
#include "titan/io.hpp"

using namespace titan;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("titan_test_" + std::to_string(::getpid()))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

}  // namespace

TEST_CASE("load_ratings: double-colon format with first-seen remapping") {
  TempDir tmp;
  write_file(tmp.file("r.dat"),
             "1::1193::5::978300760\n"
             "1::661::3::978302109\n"
             "2::1193::4::978301968\n");
  auto data = io::load_ratings(tmp.file("r.dat"), io::RatingsFormat::DoubleColon);
  REQUIRE(data.mask.size() == 3);
  REQUIRE(data.mask.rows() == 2);
  REQUIRE(data.mask.cols() == 2);
  REQUIRE(data.mask.entries()[0].row == 0);
  REQUIRE(data.mask.entries()[0].col == 0);
  REQUIRE(data.mask.entries()[0].value == 5.0);
  REQUIRE(data.mask.entries()[1].col == 1);   // 661 is the second item seen
  REQUIRE(data.mask.entries()[2].row == 1);   // user 2 is the second user seen
  REQUIRE(data.mask.entries()[2].col == 0);   // item 1193 maps back to 0
  REQUIRE(data.row_ids == std::vector<long>({1, 2}));
  REQUIRE(data.col_ids == std::vector<long>({1193, 661}));
}

TEST_CASE("load_ratings: error paths") {
  TempDir tmp;
  write_file(tmp.file("empty.dat"), "");
  REQUIRE_THROWS_WITH(io::load_ratings(tmp.file("empty.dat"), io::RatingsFormat::DoubleColon),
                      Catch::Matchers::ContainsSubstring("no entries"));

  write_file(tmp.file("dup.tsv"), "1\t1\t5\n1\t1\t3\n");
  REQUIRE_THROWS_AS(io::load_ratings(tmp.file("dup.tsv"), io::RatingsFormat::Tsv), IoError);

  write_file(tmp.file("bad.tsv"), "1\t1\t5\n1\tx\t3\n");
  REQUIRE_THROWS_WITH(io::load_ratings(tmp.file("bad.tsv"), io::RatingsFormat::Tsv),
                      Catch::Matchers::ContainsSubstring("line 2"));

  REQUIRE_THROWS_AS(io::load_ratings(tmp.file("missing.dat"), io::RatingsFormat::Tsv), IoError);
}

TEST_CASE("load_ratings: matrix market coordinate format") {
  TempDir tmp;
  write_file(tmp.file("m.mtx"),
             "%%MatrixMarket matrix coordinate real general\n"
             "% comment\n"
             "3 4 3\n"
             "1 1 0.5\n"
             "3 4 -2\n"
             "2 2 1.25\n");
  auto data = io::load_ratings(tmp.file("m.mtx"), io::RatingsFormat::MatrixMarket);
  REQUIRE(data.mask.size() == 3);
  REQUIRE(data.mask.entries()[1].value == -2.0);
}

TEST_CASE("mask serialization round trip") {
  auto inst = apps::synthesize_mcp(12, 9, 2, 0.1, 0.5, 0.7, 9);
  TempDir tmp;
  io::save_mask(inst.observed, tmp.file("mask.mtx"));
  ObservationMask again = io::load_mask(tmp.file("mask.mtx"));
  io::save_mask(again, tmp.file("mask2.mtx"));
  ObservationMask twice = io::load_mask(tmp.file("mask2.mtx"));
  REQUIRE(again.size() == inst.observed.size());
  REQUIRE(twice.size() == inst.observed.size());
  for (std::size_t t = 0; t < again.size(); ++t) {
    REQUIRE(twice.entries()[t].row == inst.observed.entries()[t].row);
    REQUIRE(twice.entries()[t].col == inst.observed.entries()[t].col);
    REQUIRE(twice.entries()[t].value == inst.observed.entries()[t].value);  // bit exact
  }
}

TEST_CASE("split_train_test behavior") {
  std::vector<MaskEntry> entries;
  for (int i = 0; i < 10; ++i) entries.push_back({i, i, static_cast<double>(i)});
  ObservationMask mask(10, 10, entries);

  auto [tr, te] = io::split_train_test(mask, 0.95, 3);
  REQUIRE(tr.size() + te.size() == 10);
  REQUIRE(tr.size() == 10);  // round(9.5) rounds half up to 10

  auto [tr7, te7] = io::split_train_test(mask, 0.7, 3);
  REQUIRE(tr7.size() == 7);

  // union equals input entry set
  std::set<std::pair<int, int>> seen;
  for (const auto& e : tr7.entries()) seen.insert({e.row, e.col});
  for (const auto& e : te7.entries()) seen.insert({e.row, e.col});
  REQUIRE(seen.size() == 10);

  // determinism per seed
  auto [tr2, te2] = io::split_train_test(mask, 0.7, 3);
  for (std::size_t i = 0; i < tr7.size(); ++i) {
    REQUIRE(tr2.entries()[i].row == tr7.entries()[i].row);
    REQUIRE(tr2.entries()[i].col == tr7.entries()[i].col);
  }
  REQUIRE_THROWS_AS(io::split_train_test(mask, 1.5, 3), ConfigError);
}

TEST_CASE("write_metrics round trip is bit exact") {
  RunLog log;
  log.f_initial = 10.0;
  for (int k = 0; k < 3; ++k) {
    IterationRecord it;
    it.iter = k;
    it.objective = 1.0 / (3.0 + k);   // non-terminating binary fractions
    it.metric = std::sqrt(2.0 + k);
    it.wall_seconds = 0.1 * (k + 1) / 3.0;
    it.restarted = k == 1;
    BlockUpdateRecord u;
    u.gamma = std::exp(-static_cast<double>(k));
    u.eta = M_PI * (k + 1);
    u.A = 1e-17 + k;
    it.updates.push_back(u);
    log.iterations.push_back(it);
  }
  TempDir tmp;
  io::write_metrics(log, tmp.file("m.csv"));

  std::ifstream in(tmp.file("m.csv"));
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "iter,time_s,objective,rel_error_or_rmse,restart,max_gamma,min_eta,max_A");
  long lines = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++lines;
  REQUIRE(lines == 3);  // 3 records -> 4 lines with the header

  auto rows = io::read_metrics(tmp.file("m.csv"));
  REQUIRE(rows.size() == 3);
  for (int k = 0; k < 3; ++k) {
    REQUIRE(rows[static_cast<std::size_t>(k)].objective == log.iterations[static_cast<std::size_t>(k)].objective);
    REQUIRE(rows[static_cast<std::size_t>(k)].metric == log.iterations[static_cast<std::size_t>(k)].metric);
    REQUIRE(rows[static_cast<std::size_t>(k)].max_gamma == log.iterations[static_cast<std::size_t>(k)].max_gamma());
    REQUIRE(rows[static_cast<std::size_t>(k)].restart == (k == 1 ? 1 : 0));
  }

  // empty log -> header only
  RunLog empty_log;
  io::write_metrics(empty_log, tmp.file("e.csv"));
  std::ifstream ein(tmp.file("e.csv"));
  std::getline(ein, header);
  REQUIRE_FALSE(std::getline(ein, line));
}

TEST_CASE("experiment config round trip") {
  io::ExperimentConfig c;
  c.app = "mcp";
  c.variant = "titan-extra";
  c.seeds = {1, 2, 3};
  c.C = 0.99980001;
  std::string s1 = io::serialize_config(c);
  io::ExperimentConfig parsed = io::config_from_json(nlohmann::json::parse(s1));
  REQUIRE(io::serialize_config(parsed) == s1);

  // shipped presets round-trip byte for byte
  for (const char* preset : {"nmf-desk.json", "mcp-desk.json", "movielens1m.json"}) {
    std::string path = std::string(TITAN_SOURCE_DIR) + "/presets/" + preset;
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    io::ExperimentConfig pc = io::load_config(path);
    REQUIRE(io::serialize_config(pc) == buf.str());
  }
}

TEST_CASE("config validation errors") {
  io::ExperimentConfig c;
  c.app = "mcp";
  c.variant = "nope";
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  c.variant = "palm";
  c.seeds.clear();
  REQUIRE_THROWS_AS(c.validate(), ConfigError);
  REQUIRE_THROWS_AS(io::load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("bench writes per-seed metrics and a consistent summary") {
  TempDir tmp;
  io::ExperimentConfig c;
  c.app = "nmf";
  c.variant = "titan";
  c.synth = {24, 18, 3, 0.02, 0.3, 0};
  c.rank = 3;
  c.max_iters = 25;
  c.seeds = {1, 2, 3};
  c.output_dir = tmp.file("out");
  io::BenchSummary s = io::bench(c);
  REQUIRE(s.per_seed.size() == 3);

  // external recomputation of mean/std from the per-seed outcomes
  double mean = 0;
  for (const auto& o : s.per_seed) mean += o.final_metric;
  mean /= 3.0;
  double ss = 0;
  for (const auto& o : s.per_seed) ss += (o.final_metric - mean) * (o.final_metric - mean);
  double stdev = std::sqrt(ss / 2.0);
  REQUIRE(std::abs(s.metric_mean - mean) <= 1e-12);
  REQUIRE(std::abs(s.metric_std - stdev) <= 1e-12);

  // per-seed CSVs exist and parse; final objective matches the summary inputs
  for (const auto& o : s.per_seed) {
    auto rows = io::read_metrics(tmp.file("out/metrics_seed" + std::to_string(o.seed) + ".csv"));
    REQUIRE(rows.size() == static_cast<std::size_t>(o.iterations));
    REQUIRE(rows.back().objective == o.final_objective);
  }
}
