#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pursuit/cgan.hpp"
#include "pursuit/dataset.hpp"
#include "pursuit/game.hpp"

namespace pursuit {

/// Query score used wherever a score "close to 1" is requested.
inline constexpr double kHighQueryScore = 0.98;

/// Monte-Carlo stage-1 quality scores, one entry per dataset row.
struct ScoreTable {
  std::vector<std::int64_t> episode_ids;
  std::vector<double> alpha;  // mean replayed end-point distance
  std::vector<double> s1;     // 1 - eta(alpha)
  MinMax alpha_range;
  int n_mc = 0;
};

/// For every row, queries the stage-2 policy n_mc times with the row's
/// condition (v1_r, theta1_r, v2_r, theta2_r, v_cap_rem) and `query_score`,
/// replays each sampled b2 against the row's recorded stage-1 geometry and
/// Red's recorded end point, and averages the distances into alpha. eta is
/// fitted over all alpha in the table. Row i draws from a source derived
/// from (seed, episode_id), so the result does not depend on `threads`.
ScoreTable build_s1_scores(const ActionSampler& g2, const Dataset& ds, const GameConfig& cfg, int n_mc,
                           std::uint64_t seed, double query_score = kHighQueryScore, unsigned threads = 1);

/// End-point distance when the recorded episode is replayed with a
/// different stage-2 Blue action (negative speeds clamp to 0).
double replay_stage2(const GameConfig& cfg, const EpisodeRecord& row, const PolarAction& b2);

/// Dataset copy with the table's s1 column attached (rows must match).
Dataset attach_s1(const Dataset& ds, const ScoreTable& table);

/// 1 - eta(stats, d).
double realized_score(const MinMax& train_distance_range, double d);

/// scores_alpha.csv: `episode_id,alpha,s1`.
void write_score_table_csv(std::ostream& out, const ScoreTable& table);
void save_score_table_csv(const std::filesystem::path& path, const ScoreTable& table);

}  // namespace pursuit
