#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "pursuit/cgan.hpp"
#include "pursuit/dataset.hpp"
#include "pursuit/game.hpp"
#include "pursuit/scorer.hpp"

namespace pursuit {

/// Sequential decision model: stage 1 is conditioned on h1 = {r1}, stage 2
/// on h2 = {r1, r2} plus the remaining speed budget.
struct TwoStepModel {
  ActionSampler stage1;
  ActionSampler stage2;
  double s1_query = kHighQueryScore;
  double s2_query = kHighQueryScore;
};

/// One action, chosen after observing r1, governs both stages.
struct SingleStepModel {
  ActionSampler policy;
  double query_score = kHighQueryScore;
};

/// 2-D Gaussian over (speed, heading).
struct GaussianAction {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();

  /// mean + L z with L L^T = covariance (symmetric square root, so a
  /// singular covariance is fine) and z standard Normal.
  PolarAction sample(Rng& rng) const;
};

struct RandomizedModel {
  GaussianAction stage1;
  GaussianAction stage2;
};

struct RolloutOutcome {
  PolarAction r1, b1, r2, b2;
  Point2 red_end = Point2::Zero();
  Point2 blue_end = Point2::Zero();
  double d_rb = 0.0;
  double v_cap_rem = 0.0;
  bool violated = false;
};

/// Builds a two-step model from trained generators; checks that the stage-1
/// generator takes 2 condition features and the stage-2 generator 5.
TwoStepModel make_two_step_model(std::shared_ptr<const Generator> g1, std::shared_ptr<const Generator> g2,
                                 double s1_query = kHighQueryScore, double s2_query = kHighQueryScore);
SingleStepModel make_single_step_model(std::shared_ptr<const Generator> g, double query_score = kHighQueryScore);

/// Queries stage 1, lets Red respond to Blue's midpoint, queries stage 2 with
/// v_cap - b1.speed. Negative sampled speeds clamp to 0; the speed cap is
/// not enforced, only flagged.
RolloutOutcome rollout_two_step(const TwoStepModel& m, const GameConfig& cfg, const PolarAction& r1, Rng& rng);

/// Stage 2 repeats the heading at speed min(V, v_cap - V), floored at 0.
RolloutOutcome rollout_single_step(const SingleStepModel& m, const GameConfig& cfg, const PolarAction& r1,
                                   Rng& rng);

/// Stage-wise independent Gaussian draws; speeds clamp at 0.
RolloutOutcome rollout_randomized(const RandomizedModel& m, const GameConfig& cfg, const PolarAction& r1,
                                  Rng& rng);

/// Sample means and covariances of the training (v_b, theta_b) per stage.
/// Requires at least 2 rows.
RandomizedModel fit_randomized(const Dataset& train);

/// k sequential two-step rollouts from `rng`; returns the lowest d_rb among
/// those that respect the speed cap (first index wins ties). If every
/// candidate violates the cap, the lowest d_rb overall.
RolloutOutcome best_of_k(const TwoStepModel& m, const GameConfig& cfg, const PolarAction& r1, int k, Rng& rng);

/// Index selected by best_of_k among already-computed candidates.
std::size_t select_best(std::span<const RolloutOutcome> candidates);

}  // namespace pursuit
