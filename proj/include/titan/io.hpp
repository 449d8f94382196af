#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "titan/solver.hpp"

namespace titan::io {

enum class RatingsFormat { DoubleColon, Tsv, MatrixMarket };

inline RatingsFormat ratings_format_from_string(const std::string& s) {
  if (s == "double_colon") return RatingsFormat::DoubleColon;
  if (s == "tsv") return RatingsFormat::Tsv;
  if (s == "matrix_market") return RatingsFormat::MatrixMarket;
  throw ConfigError("unknown ratings format: " + s);
}

/// %.17g rendering: enough digits to round-trip a double exactly.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RatingsData {
  ObservationMask mask;
  std::vector<long> row_ids;  // external id of each dense row index
  std::vector<long> col_ids;
};

namespace detail {

struct Remap {
  std::map<long, int> to_dense;
  std::vector<long> ids;
  int get(long external) {
    auto it = to_dense.find(external);
    if (it != to_dense.end()) return it->second;
    int dense = static_cast<int>(ids.size());
    to_dense.emplace(external, dense);
    ids.push_back(external);
    return dense;
  }
};

inline std::vector<std::string> split(const std::string& line, const std::string& sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return out;
}

inline double parse_double(const std::string& s, long line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed number '" + s + "' at line " + std::to_string(line_no));
  }
}

inline long parse_long(const std::string& s, long line_no) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed integer '" + s + "' at line " + std::to_string(line_no));
  }
}

}  // namespace detail

/// Parses a ratings file into an ObservationMask. External (typically
/// 1-based, sparse) ids are mapped to dense 0-based indices in first-seen
/// order; the mapping is returned so it can be persisted alongside.
/// Supported formats: MovieLens `User::Item::Rating::Timestamp`, tab-separated
/// `user<TAB>item<TAB>rating`, and MatrixMarket coordinate.
inline RatingsData load_ratings(const std::string& path, RatingsFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open ratings file: " + path);
  detail::Remap rows, cols;
  std::vector<MaskEntry> entries;
  std::string line;
  long line_no = 0;
  bool mm_header_done = false;
  long mm_declared = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (format == RatingsFormat::MatrixMarket && line[0] == '%') continue;
    if (format == RatingsFormat::MatrixMarket && !mm_header_done) {
      std::istringstream hs(line);  // rows cols nnz
      long r, c, nnz;
      if (!(hs >> r >> c >> nnz)) throw IoError("malformed MatrixMarket size line " + std::to_string(line_no));
      mm_declared = nnz;
      mm_header_done = true;
      continue;
    }
    long user, item;
    double rating;
    switch (format) {
      case RatingsFormat::DoubleColon: {
        auto parts = detail::split(line, "::");
        if (parts.size() < 3) throw IoError("malformed line " + std::to_string(line_no) + ": " + line);
        user = detail::parse_long(parts[0], line_no);
        item = detail::parse_long(parts[1], line_no);
        rating = detail::parse_double(parts[2], line_no);
        break;
      }
      case RatingsFormat::Tsv: {
        auto parts = detail::split(line, "\t");
        if (parts.size() < 3) throw IoError("malformed line " + std::to_string(line_no) + ": " + line);
        user = detail::parse_long(parts[0], line_no);
        item = detail::parse_long(parts[1], line_no);
        rating = detail::parse_double(parts[2], line_no);
        break;
      }
      case RatingsFormat::MatrixMarket: {
        std::istringstream ls(line);
        if (!(ls >> user >> item >> rating))
          throw IoError("malformed line " + std::to_string(line_no) + ": " + line);
        break;
      }
    }
    MaskEntry e;
    e.row = rows.get(user);
    e.col = cols.get(item);
    e.value = rating;
    entries.push_back(e);
  }
  if (entries.empty()) throw IoError("no entries in ratings file: " + path);
  if (mm_declared >= 0 && mm_declared != static_cast<long>(entries.size()))
    throw IoError("MatrixMarket entry count mismatch in " + path);
  RatingsData data{ObservationMask(static_cast<int>(rows.ids.size()), static_cast<int>(cols.ids.size()),
                                   std::move(entries)),
                   std::move(rows.ids), std::move(cols.ids)};
  return data;  // ObservationMask construction rejects duplicate (user,item) pairs
}

inline void save_id_map(const std::vector<long>& ids, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write id map: " + path);
  out << "dense,external\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << i << "," << ids[i] << "\n";
}

/// Direct (no remapping) mask persistence in MatrixMarket coordinate format.
inline void save_mask(const ObservationMask& mask, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mask: " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << mask.rows() << " " << mask.cols() << " " << mask.size() << "\n";
  for (const auto& e : mask.entries())
    out << e.row + 1 << " " << e.col + 1 << " " << format_double(e.value) << "\n";
}

inline ObservationMask load_mask(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mask: " + path);
  std::string line;
  long line_no = 0;
  bool header_done = false;
  long rows = 0, cols = 0, declared = 0;
  std::vector<MaskEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ls(line);
    if (!header_done) {
      if (!(ls >> rows >> cols >> declared))
        throw IoError("malformed mask size line " + std::to_string(line_no));
      header_done = true;
      continue;
    }
    long r, c;
    double v;
    if (!(ls >> r >> c >> v)) throw IoError("malformed mask line " + std::to_string(line_no));
    entries.push_back({static_cast<int>(r - 1), static_cast<int>(c - 1), v});
  }
  if (!header_done) throw IoError("mask file has no size line: " + path);
  if (declared != static_cast<long>(entries.size()))
    throw IoError("mask entry count mismatch in " + path);
  return ObservationMask(static_cast<int>(rows), static_cast<int>(cols), std::move(entries));
}

/// Dense matrix from comma- or whitespace-separated rows.
inline Mat load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open matrix file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && rows.front().size() != row.size())
      throw IoError("ragged row at line " + std::to_string(line_no) + " in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no rows in matrix file: " + path);
  Mat M(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j) M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return M;
}

/// Disjoint (train, test) partition with |train| = round(fraction * N),
/// round half up, deterministic per seed.
inline std::pair<ObservationMask, ObservationMask> split_train_test(const ObservationMask& mask,
                                                                    double fraction,
                                                                    std::uint64_t seed) {
  if (fraction <= 0 || fraction >= 1) throw ConfigError("split_train_test: fraction in (0,1) required");
  const auto n = mask.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  auto n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  std::vector<MaskEntry> train, test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& e = mask.entries()[idx[t]];
    (t < n_train ? train : test).push_back(e);
  }
  return {ObservationMask(mask.rows(), mask.cols(), std::move(train)),
          ObservationMask(mask.rows(), mask.cols(), std::move(test))};
}

/// Per-iteration metrics as CSV, one row per outer iteration:
/// iter,time_s,objective,rel_error_or_rmse,restart,max_gamma,min_eta,max_A
/// with floats rendered at 17 significant digits.
inline void write_metrics(const RunLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF endings everywhere
  if (!out) throw IoError("cannot write metrics: " + path);
  out << "iter,time_s,objective,rel_error_or_rmse,restart,max_gamma,min_eta,max_A\n";
  for (const auto& it : log.iterations) {
    out << it.iter << "," << format_double(it.wall_seconds) << "," << format_double(it.objective)
        << "," << format_double(it.metric) << "," << (it.restarted ? 1 : 0) << ","
        << format_double(it.max_gamma()) << "," << format_double(it.min_eta()) << ","
        << format_double(it.max_A()) << "\n";
  }
  if (!out) throw IoError("failed writing metrics: " + path);
}

struct MetricsRow {
  long iter;
  double time_s, objective, metric;
  int restart;
  double max_gamma, min_eta, max_A;
};

inline std::vector<MetricsRow> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open metrics: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty metrics file: " + path);
  std::vector<MetricsRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto parts = detail::split(line, ",");
    if (parts.size() != 8) throw IoError("malformed metrics line " + std::to_string(line_no));
    MetricsRow r;
    r.iter = detail::parse_long(parts[0], line_no);
    r.time_s = detail::parse_double(parts[1], line_no);
    r.objective = detail::parse_double(parts[2], line_no);
    r.metric = parts[3] == "nan" || parts[3] == "-nan" ? std::numeric_limits<double>::quiet_NaN()
                                                       : detail::parse_double(parts[3], line_no);
    r.restart = static_cast<int>(detail::parse_long(parts[4], line_no));
    r.max_gamma = detail::parse_double(parts[5], line_no);
    r.min_eta = detail::parse_double(parts[6], line_no);
    r.max_A = detail::parse_double(parts[7], line_no);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace titan::io
