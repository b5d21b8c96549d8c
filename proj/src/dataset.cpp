#include "pursuit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

namespace pursuit {

const MinMax& NormStats::range(const std::string& name) const {
  const auto it = ranges.find(name);
  if (it == ranges.end()) throw ValidationError("normalization stats lack range '" + name + "'");
  return it->second;
}

Dataset generate_dataset(const GameConfig& cfg, std::size_t n, std::uint64_t master_seed,
                         unsigned threads) {
  cfg.validate();
  if (n == 0) throw ValidationError("generate_dataset: n must be >= 1");
  Dataset ds;
  ds.rows.resize(n);
  const std::uint64_t episode_seed = derive_seed(master_seed, Stream::episodes);
  parallel_for(n, threads, [&](std::size_t i) {
    Rng rng(derive_seed(episode_seed, i));
    ds.rows[i] = simulate_episode(cfg, rng);
    ds.rows[i].episode_id = static_cast<std::int64_t>(i);
  });
  ds.provenance = {config_digest(cfg), master_seed, kGeneratorVersion};
  return ds;
}

MinMax fit_minmax(std::span<const double> values) {
  if (values.empty()) throw ValidationError("fit_minmax: empty value list");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return {*lo, *hi};
}

double eta(const MinMax& stats, double v) {
  if (stats.max == stats.min) return 0.0;
  return std::clamp((v - stats.min) / (stats.max - stats.min), 0.0, 1.0);
}

std::vector<double> column_d_rb(const Dataset& ds) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& row : ds.rows) out.push_back(row.d_rb);
  return out;
}

std::vector<double> column_d_single(const Dataset& ds, const GameConfig& cfg) {
  std::vector<double> out;
  out.reserve(ds.size());
  for (const auto& row : ds.rows)
    out.push_back(single_line_distance(cfg, row.r1, scripted_blue_stage1(cfg, row.r1)));
  return out;
}

Dataset attach_s2(const Dataset& ds, const MinMax& d_rb_range) {
  Dataset out = ds;
  std::vector<double> s2;
  s2.reserve(ds.size());
  for (const auto& row : ds.rows) s2.push_back(1.0 - eta(d_rb_range, row.d_rb));
  out.s2 = std::move(s2);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0))
    throw ValidationError("split: train_frac must lie in (0, 1)");
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ds.size()) * train_frac));

  auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(order.begin() + begin, order.begin() + end);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return ds.rows[a].episode_id < ds.rows[b].episode_id; });
    Dataset part;
    part.provenance = ds.provenance;
    part.rows.reserve(idx.size());
    if (ds.s2) part.s2.emplace();
    if (ds.s1) part.s1.emplace();
    for (std::size_t i : idx) {
      part.rows.push_back(ds.rows[i]);
      if (ds.s2) part.s2->push_back((*ds.s2)[i]);
      if (ds.s1) part.s1->push_back((*ds.s1)[i]);
    }
    return part;
  };
  return {take(0, n_train), take(n_train, order.size())};
}

namespace {

struct Column {
  const char* name;
  double (*get)(const EpisodeRecord&);
};

constexpr Column kFeatureColumns[] = {
    {"v1_r", [](const EpisodeRecord& r) { return r.r1.speed; }},
    {"theta1_r", [](const EpisodeRecord& r) { return r.r1.heading; }},
    {"v1_b", [](const EpisodeRecord& r) { return r.b1.speed; }},
    {"theta1_b", [](const EpisodeRecord& r) { return r.b1.heading; }},
    {"v2_r", [](const EpisodeRecord& r) { return r.r2.speed; }},
    {"theta2_r", [](const EpisodeRecord& r) { return r.r2.heading; }},
    {"v2_b", [](const EpisodeRecord& r) { return r.b2.speed; }},
    {"v_cap_rem", [](const EpisodeRecord& r) { return r.v_cap_rem; }},
    {"theta2_b", [](const EpisodeRecord& r) { return r.b2.heading; }},
    {"d_rb", [](const EpisodeRecord& r) { return r.d_rb; }},
};

FeatureMoments moments_of(std::span<const double> values) {
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace

NormStats fit_norm_stats(const Dataset& train, const GameConfig& cfg) {
  if (train.size() == 0) throw ValidationError("fit_norm_stats: empty training set");
  NormStats stats;
  stats.provenance = train.provenance;
  const auto d_rb = column_d_rb(train);
  const auto d_single = column_d_single(train, cfg);
  stats.ranges["d_rb"] = fit_minmax(d_rb);
  stats.ranges["d_single"] = fit_minmax(d_single);
  std::vector<double> values(train.size());
  for (const auto& column : kFeatureColumns) {
    std::transform(train.rows.begin(), train.rows.end(), values.begin(), column.get);
    stats.moments[column.name] = moments_of(values);
  }
  stats.moments["d_single"] = moments_of(d_single);
  return stats;
}

std::string provenance_comment(const Provenance& p) {
  return fmt::format("# config_digest={} master_seed={} generator={}", p.config_digest, p.master_seed,
                     p.generator_version);
}

namespace {

Provenance parse_provenance(const std::string& line) {
  Provenance p;
  std::istringstream in(line.substr(1));
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    if (key == "config_digest") p.config_digest = value;
    else if (key == "master_seed") p.master_seed = std::stoull(value);
    else if (key == "generator") p.generator_version = value;
  }
  return p;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (!cells.empty() && !cells.back().empty() && cells.back().back() == '\r') cells.back().pop_back();
  return cells;
}

}  // namespace

void write_episodes_csv(std::ostream& out, const Dataset& ds) {
  out << provenance_comment(ds.provenance) << '\n' << kEpisodesHeader << '\n';
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.rows[i];
    out << r.episode_id;
    for (double v : {r.r1.speed, r.r1.heading, r.b1.speed, r.b1.heading, r.r2.speed, r.r2.heading,
                     r.b2.speed, r.v_cap_rem, r.b2.heading, r.d_rb})
      out << ',' << format_double(v);
    out << ',';
    if (ds.s2) out << format_double((*ds.s2)[i]);
    out << ',';
    if (ds.s1) out << format_double((*ds.s1)[i]);
    out << '\n';
  }
}

void save_episodes_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_episodes_csv(out, ds);
  if (!out) throw IoError("write failed for " + path.string());
}

Dataset read_episodes_csv(std::istream& in, const GameConfig& cfg) {
  Dataset ds;
  std::string line;
  bool header_seen = false;
  bool any_s2 = false, any_s1 = false, missing_s2 = false, missing_s1 = false;
  std::vector<double> s2, s1;
  std::set<std::int64_t> ids;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (!header_seen) ds.provenance = parse_provenance(line);
      continue;
    }
    if (!header_seen) {
      if (line != kEpisodesHeader) throw IoError("episodes.csv: unexpected header '" + line + "'");
      header_seen = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (cells.size() != 13)
      throw IoError(fmt::format("episodes.csv line {}: expected 13 cells, got {}", line_no, cells.size()));
    try {
      EpisodeRecord r;
      r.episode_id = parse_int(cells[0]);
      double v[10];
      for (int k = 0; k < 10; ++k) v[k] = parse_double(cells[k + 1]);
      r.r1 = {v[0], v[1]};
      r.b1 = {v[2], v[3]};
      r.r2 = {v[4], v[5]};
      r.b2 = {v[6], v[8]};
      r.v_cap_rem = v[7];
      r.d_rb = v[9];
      r.red_end = endpoint(cfg.red_start, r.r1, r.r2, cfg.half());
      r.blue_end = endpoint(cfg.blue_start, r.b1, r.b2, cfg.half());
      r.violated = speed_cap_violated(r.b1.speed, r.b2.speed, cfg.v_cap);
      if (!ids.insert(r.episode_id).second)
        throw IoError(fmt::format("episodes.csv line {}: duplicate episode_id {}", line_no, r.episode_id));
      ds.rows.push_back(r);
      if (cells[11].empty()) missing_s2 = true; else { any_s2 = true; s2.push_back(parse_double(cells[11])); }
      if (cells[12].empty()) missing_s1 = true; else { any_s1 = true; s1.push_back(parse_double(cells[12])); }
    } catch (const std::invalid_argument& e) {
      throw IoError(fmt::format("episodes.csv line {}: {}", line_no, e.what()));
    }
  }
  if (!header_seen) throw IoError("episodes.csv: missing header");
  if ((any_s2 && missing_s2) || (any_s1 && missing_s1))
    throw IoError("episodes.csv: score columns must be filled for all rows or none");
  if (any_s2) ds.s2 = std::move(s2);
  if (any_s1) ds.s1 = std::move(s1);
  return ds;
}

Dataset load_episodes_csv(const std::filesystem::path& path, const GameConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_episodes_csv(in, cfg);
}

void write_norm_stats(std::ostream& out, const NormStats& stats) {
  nlohmann::ordered_json j;
  j["minima"] = nlohmann::ordered_json::object();
  j["maxima"] = nlohmann::ordered_json::object();
  j["means"] = nlohmann::ordered_json::object();
  j["stds"] = nlohmann::ordered_json::object();
  for (const auto& [name, r] : stats.ranges) {
    j["minima"][name] = r.min;
    j["maxima"][name] = r.max;
  }
  for (const auto& [name, m] : stats.moments) {
    j["means"][name] = m.mean;
    j["stds"][name] = m.std;
  }
  out << provenance_comment(stats.provenance) << '\n' << j.dump(2) << '\n';
}

void save_norm_stats(const std::filesystem::path& path, const NormStats& stats) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_norm_stats(out, stats);
}

NormStats read_norm_stats(std::istream& in) {
  NormStats stats;
  std::string line, body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') {
      stats.provenance = parse_provenance(line);
      continue;
    }
    body += line;
    body += '\n';
  }
  try {
    const auto j = nlohmann::json::parse(body);
    for (const auto& [name, v] : j.at("minima").items()) stats.ranges[name].min = v.get<double>();
    for (const auto& [name, v] : j.at("maxima").items()) stats.ranges[name].max = v.get<double>();
    for (const auto& [name, v] : j.at("means").items()) stats.moments[name].mean = v.get<double>();
    for (const auto& [name, v] : j.at("stds").items()) stats.moments[name].std = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("normstats.json: ") + e.what());
  }
  for (const auto& [name, r] : stats.ranges)
    if (r.max < r.min) throw ValidationError("normstats.json: max < min for " + name);
  return stats;
}

NormStats load_norm_stats(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return read_norm_stats(in);
}

}  // namespace pursuit
