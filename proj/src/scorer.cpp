#include "pursuit/scorer.hpp"

#include <algorithm>
#include <fstream>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

namespace pursuit {

double replay_stage2(const GameConfig& cfg, const EpisodeRecord& row, const PolarAction& b2) {
  const PolarAction played(std::max(0.0, b2.speed), b2.heading);
  const Point2 blue_end = endpoint(cfg.blue_start, row.b1, played, cfg.half());
  return endpoint_distance(row.red_end, blue_end);
}

ScoreTable build_s1_scores(const ActionSampler& g2, const Dataset& ds, const GameConfig& cfg, int n_mc,
                           std::uint64_t seed, double query_score, unsigned threads) {
  if (n_mc < 1) throw ValidationError("build_s1_scores: n_mc must be >= 1");
  if (ds.size() == 0) throw ValidationError("build_s1_scores: empty dataset");
  ScoreTable table;
  table.n_mc = n_mc;
  table.episode_ids.resize(ds.size());
  table.alpha.resize(ds.size());
  parallel_for(ds.size(), threads, [&](std::size_t i) {
    const auto& row = ds.rows[i];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(row.episode_id)));
    Eigen::VectorXd condition(5);
    condition << row.r1.speed, row.r1.heading, row.r2.speed, row.r2.heading, row.v_cap_rem;
    double total = 0.0;
    for (int j = 0; j < n_mc; ++j) total += replay_stage2(cfg, row, g2(condition, query_score, rng));
    table.episode_ids[i] = row.episode_id;
    table.alpha[i] = total / n_mc;
  });
  table.alpha_range = fit_minmax(table.alpha);
  table.s1.reserve(ds.size());
  for (double a : table.alpha) table.s1.push_back(1.0 - eta(table.alpha_range, a));
  return table;
}

Dataset attach_s1(const Dataset& ds, const ScoreTable& table) {
  if (table.episode_ids.size() != ds.size()) throw ValidationError("attach_s1: table and dataset differ in size");
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (table.episode_ids[i] != ds.rows[i].episode_id) throw ValidationError("attach_s1: episode ids do not match");
  Dataset out = ds;
  out.s1 = table.s1;
  return out;
}

double realized_score(const MinMax& train_distance_range, double d) { return 1.0 - eta(train_distance_range, d); }

void write_score_table_csv(std::ostream& out, const ScoreTable& table) {
  out << "episode_id,alpha,s1\n";
  for (std::size_t i = 0; i < table.alpha.size(); ++i)
    out << table.episode_ids[i] << ',' << format_double(table.alpha[i]) << ',' << format_double(table.s1[i]) << '\n';
}

void save_score_table_csv(const std::filesystem::path& path, const ScoreTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_score_table_csv(out, table);
}

}  // namespace pursuit
