#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pursuit/dataset.hpp"
#include "pursuit/policy.hpp"

namespace pursuit {

inline constexpr int kHistogramBins = 20;

struct ScoreSetting {
  double s1 = kHighQueryScore;
  double s2 = kHighQueryScore;
};

/// (0.95, 0.98), (0.55, 0.6), (0.15, 0.2): high, mid and low query scores.
std::vector<ScoreSetting> default_sweep_settings();

/// End-point distances of one test episode under the three models.
struct EpisodeDistances {
  std::int64_t episode_id = 0;
  double d_star = 0.0;  // two-step
  double d_s = 0.0;     // single-step
  double d_r = 0.0;     // randomized

  double delta_star_single() const { return d_star - d_s; }
  double delta_star_random() const { return d_star - d_r; }
  double delta_single_random() const { return d_s - d_r; }
};

struct DeltaMeans {
  double star_single = 0.0;
  double star_random = 0.0;
  double single_random = 0.0;
};

struct ViolationCounts {
  std::size_t two_step = 0;
  std::size_t single_step = 0;
  std::size_t randomized = 0;
};

struct SensitivityHistogram {
  ScoreSetting setting;
  std::vector<std::size_t> counts;  // kHistogramBins equal bins on [0, 1]
  double mean_realized = 0.0;
};

struct EvalReport {
  std::vector<EpisodeDistances> episodes;
  DeltaMeans means;
  ViolationCounts violations;
  std::vector<SensitivityHistogram> sensitivity;
  std::uint64_t seed = 0;
  std::string dataset_digest;

  std::size_t test_size() const { return episodes.size(); }
};

/// One model's rollout from Red's stage-1 action.
using Rollout = std::function<RolloutOutcome(const PolarAction& r1, Rng& rng)>;

/// Paired evaluation over arbitrary rollouts. Episode i gives every rollout a
/// source seeded from (seed, episode_id); aggregation is in row order.
EvalReport evaluate_rollouts(const Rollout& two_step, const Rollout& single, const Rollout& randomized,
                             const Dataset& test, std::uint64_t seed, unsigned threads = 1);

/// Rolls the three models out on every test row's r1. Episode i gives all
/// three models a source seeded from (seed, episode_id), so differences are
/// paired by episode and by random stream. Aggregation is in row order.
EvalReport evaluate(const TwoStepModel& two_step, const SingleStepModel& single, const RandomizedModel& randomized,
                    const GameConfig& cfg, const Dataset& test, std::uint64_t seed, unsigned threads = 1);

std::size_t count_violations(std::span<const RolloutOutcome> outcomes);

/// Bin index of a realized score in [0, 1]; 1.0 falls in the last bin.
int histogram_bin(double score);

/// For each setting: override the two-step query scores, roll out the test
/// set, map every d_rb through realized_score with the training distance
/// range, and histogram the result.
std::vector<SensitivityHistogram> sensitivity_sweep(const TwoStepModel& m, const GameConfig& cfg,
                                                    const Dataset& test, std::span<const ScoreSetting> settings,
                                                    const MinMax& train_distance_range, std::uint64_t seed,
                                                    unsigned threads = 1);

/// Mean test d_rb of best_of_k at the given k (k = 1 is a plain rollout).
double mean_best_of_k(const TwoStepModel& m, const GameConfig& cfg, const Dataset& test, int k,
                      std::uint64_t seed, unsigned threads = 1);

/// min, first quartile, median, third quartile, max. Quartiles interpolate
/// linearly between order statistics.
struct BoxSummary {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};
BoxSummary box_summary(std::vector<double> values);

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

/// deltas.csv: `episode_id,d_star,d_s,d_r,delta_ss,delta_sr_star,delta_sr`.
void write_deltas_csv(std::ostream& out, const EvalReport& report);
/// sensitivity.csv: `setting_s1,setting_s2,bin_lo,bin_hi,count`.
void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityHistogram> histograms);

}  // namespace pursuit
