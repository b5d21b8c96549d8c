#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pursuit/cgan.hpp"
#include "pursuit/dataset.hpp"
#include "pursuit/eval.hpp"
#include "pursuit/policy.hpp"
#include "pursuit/scorer.hpp"

namespace pursuit {

using StageLog = std::function<void(std::string_view)>;

struct TwoStepTraining {
  std::shared_ptr<const Generator> g1;
  std::shared_ptr<const Generator> g2;
  ScoreTable s1_table;
  MinMax d_rb_range;
  Dataset scored_train;  // training rows with s2 and s1 attached
};

/// Trains the sequential model in dependency order: attach s2, train the
/// stage-2 generator, build s1 by Monte-Carlo replay through it, then train
/// the stage-1 generator. `gan.seed` is ignored; each stage derives its own
/// seed from `seed`.
TwoStepTraining train_two_step(const Dataset& train, const GameConfig& cfg, const TrainConfig& gan, int n_mc,
                               double query_score, std::uint64_t seed, unsigned threads = 1,
                               const StageLog& log = {});

struct SingleStepTraining {
  std::shared_ptr<const Generator> generator;
  MinMax d_single_range;
};

SingleStepTraining train_single_step(const Dataset& train, const GameConfig& cfg, const TrainConfig& gan,
                                     std::uint64_t seed, const StageLog& log = {});

struct PipelineOptions {
  GameConfig game;
  TrainConfig gan;
  double train_frac = 0.8;
  int n_mc = 30;
  double query_score = kHighQueryScore;
  int best_k = 30;
  std::vector<ScoreSetting> sweep_settings = default_sweep_settings();
  unsigned threads = 1;
};

struct RunResult {
  int run_id = 0;
  std::uint64_t seed = 0;
  EvalReport report;
  double mean_d_best_of_1 = 0.0;
  double mean_d_best_of_k = 0.0;
};

/// split -> train two-step and single-step -> fit randomized -> evaluate,
/// sweep the query scores, and compare best-of-1 with best-of-k.
RunResult run_pipeline(const Dataset& full, const PipelineOptions& options, int run_id, std::uint64_t run_seed,
                       const StageLog& log = {});

struct MultirunSummary {
  std::vector<RunResult> runs;
  BoxSummary star_single;
  BoxSummary star_random;
  BoxSummary single_random;
};

/// n_runs pipelines over the same dataset; run i uses the seed derived from
/// (base_seed, i). Runs are independent, so they may execute concurrently.
MultirunSummary multirun(const Dataset& full, const PipelineOptions& options, int n_runs, std::uint64_t base_seed,
                         const StageLog& log = {});

/// multirun.csv: `run_id,mean_delta_ss,mean_delta_sr_star,mean_delta_sr,
/// violations_two_step,violations_single,violations_rand`.
void write_multirun_csv(std::ostream& out, const MultirunSummary& summary);
std::string multirun_to_json(const MultirunSummary& summary);

}  // namespace pursuit
