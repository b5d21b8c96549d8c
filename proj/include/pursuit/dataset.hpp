#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pursuit/game.hpp"

namespace pursuit {

inline constexpr const char* kGeneratorVersion = "pursuit-lab/1.0";

/// Exact header of episodes.csv.
inline constexpr const char* kEpisodesHeader =
    "episode_id,v1_r,theta1_r,v1_b,theta1_b,v2_r,theta2_r,v2_b,v_cap_rem,theta2_b,d_rb,s2,s1";

struct Provenance {
  std::string config_digest;
  std::uint64_t master_seed = 0;
  std::string generator_version = kGeneratorVersion;
};

struct Dataset {
  std::vector<EpisodeRecord> rows;
  std::optional<std::vector<double>> s2;
  std::optional<std::vector<double>> s1;
  Provenance provenance;

  std::size_t size() const { return rows.size(); }
};

/// Min-max range used by the score normalization eta.
struct MinMax {
  double min = 0.0;
  double max = 0.0;
};

struct FeatureMoments {
  double mean = 0.0;
  double std = 0.0;
};

/// Normalization statistics, always fitted on training rows.
/// `ranges` holds "d_rb" (stage-2 scores) and "d_single" (single-line
/// benchmark scores); `moments` holds every numeric episode column.
struct NormStats {
  std::map<std::string, MinMax> ranges;
  std::map<std::string, FeatureMoments> moments;
  Provenance provenance;

  const MinMax& range(const std::string& name) const;
};

Dataset generate_dataset(const GameConfig& cfg, std::size_t n, std::uint64_t master_seed,
                         unsigned threads = 0);

/// Throws ValidationError on an empty list.
MinMax fit_minmax(std::span<const double> values);

/// (v - min) / (max - min) clamped to [0, 1]; 0 when max == min.
double eta(const MinMax& stats, double v);

Dataset attach_s2(const Dataset& ds, const MinMax& d_rb_range);

/// Seeded shuffle, then the first floor(n * train_frac) rows form the
/// training part. Both parts are returned in episode-id order.
std::pair<Dataset, Dataset> split(const Dataset& ds, double train_frac, std::uint64_t seed);

std::vector<double> column_d_rb(const Dataset& ds);
/// Single-line benchmark distance of every row (scripted stage-1 action held
/// for both stages against Red's response).
std::vector<double> column_d_single(const Dataset& ds, const GameConfig& cfg);

NormStats fit_norm_stats(const Dataset& train, const GameConfig& cfg);

/// episodes.csv: provenance comment line, exact header, one row per episode,
/// doubles with 17 significant digits, empty score cells when absent.
void write_episodes_csv(std::ostream& out, const Dataset& ds);
void save_episodes_csv(const std::filesystem::path& path, const Dataset& ds);
/// Endpoints and the violation flag are recomputed from the stored actions.
Dataset read_episodes_csv(std::istream& in, const GameConfig& cfg);
Dataset load_episodes_csv(const std::filesystem::path& path, const GameConfig& cfg);

/// normstats.json: provenance comment line, then a JSON object with
/// "minima", "maxima", "means", "stds" keyed by feature name.
void write_norm_stats(std::ostream& out, const NormStats& stats);
void save_norm_stats(const std::filesystem::path& path, const NormStats& stats);
NormStats read_norm_stats(std::istream& in);
NormStats load_norm_stats(const std::filesystem::path& path);

std::string provenance_comment(const Provenance& p);

}  // namespace pursuit
