#include "pursuit/policy.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/Eigenvalues>

#include "pursuit/errors.hpp"

namespace pursuit {

namespace {

PolarAction floor_speed(const PolarAction& a) { return {std::max(0.0, a.speed), a.heading}; }

RolloutOutcome outcome_of(const EpisodeRecord& rec) {
  RolloutOutcome out;
  out.r1 = rec.r1;
  out.b1 = rec.b1;
  out.r2 = rec.r2;
  out.b2 = rec.b2;
  out.red_end = rec.red_end;
  out.blue_end = rec.blue_end;
  out.d_rb = rec.d_rb;
  out.v_cap_rem = rec.v_cap_rem;
  out.violated = rec.violated;
  return out;
}

Eigen::VectorXd stage1_condition(const PolarAction& r1) {
  Eigen::VectorXd c(2);
  c << r1.speed, r1.heading;
  return c;
}

}  // namespace

PolarAction GaussianAction::sample(Rng& rng) const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(covariance);
  const Eigen::Vector2d root_values = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix2d root = eig.eigenvectors() * root_values.asDiagonal() * eig.eigenvectors().transpose();
  Eigen::Vector2d z;
  z(0) = standard_normal(rng);
  z(1) = standard_normal(rng);
  const Eigen::Vector2d x = mean + root * z;
  return {std::max(0.0, x(0)), x(1)};
}

TwoStepModel make_two_step_model(std::shared_ptr<const Generator> g1, std::shared_ptr<const Generator> g2,
                                 double s1_query, double s2_query) {
  if (g1->spec.condition_dim != 2) throw ValidationError("two-step model: stage-1 generator needs condition width 2");
  if (g2->spec.condition_dim != 5) throw ValidationError("two-step model: stage-2 generator needs condition width 5");
  return {as_sampler(std::move(g1)), as_sampler(std::move(g2)), s1_query, s2_query};
}

SingleStepModel make_single_step_model(std::shared_ptr<const Generator> g, double query_score) {
  if (g->spec.condition_dim != 2) throw ValidationError("single-step model: generator needs condition width 2");
  return {as_sampler(std::move(g)), query_score};
}

RolloutOutcome rollout_two_step(const TwoStepModel& m, const GameConfig& cfg, const PolarAction& r1, Rng& rng) {
  const PolarAction b1 = floor_speed(m.stage1(stage1_condition(r1), m.s1_query, rng));
  const Point2 blue_mid = position_after(cfg.blue_start, b1, cfg.half());
  const PolarAction r2 = red_stage2(cfg, r1, blue_mid).r2;
  Eigen::VectorXd condition(5);
  condition << r1.speed, r1.heading, r2.speed, r2.heading, cfg.v_cap - b1.speed;
  const PolarAction b2 = floor_speed(m.stage2(condition, m.s2_query, rng));
  return outcome_of(play(cfg, r1, b1, b2));
}

RolloutOutcome rollout_single_step(const SingleStepModel& m, const GameConfig& cfg, const PolarAction& r1,
                                   Rng& rng) {
  const PolarAction action = floor_speed(m.policy(stage1_condition(r1), m.query_score, rng));
  const double second = std::clamp(cfg.v_cap - action.speed, 0.0, action.speed);
  auto out = outcome_of(play(cfg, r1, action, PolarAction(second, action.heading)));
  out.violated = speed_cap_violated(action.speed, action.speed, cfg.v_cap);
  return out;
}

RolloutOutcome rollout_randomized(const RandomizedModel& m, const GameConfig& cfg, const PolarAction& r1,
                                  Rng& rng) {
  const PolarAction b1 = m.stage1.sample(rng);
  const PolarAction b2 = m.stage2.sample(rng);
  return outcome_of(play(cfg, r1, b1, b2));
}

RandomizedModel fit_randomized(const Dataset& train) {
  if (train.size() < 2) throw ValidationError("fit_randomized: need at least 2 training rows");
  const auto n = static_cast<Eigen::Index>(train.size());
  Eigen::MatrixXd stage1(2, n), stage2(2, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = train.rows[static_cast<std::size_t>(i)];
    stage1.col(i) << r.b1.speed, r.b1.heading;
    stage2.col(i) << r.b2.speed, r.b2.heading;
  }
  auto fit = [n](const Eigen::MatrixXd& x) {
    GaussianAction g;
    g.mean = x.rowwise().mean();
    const Eigen::MatrixXd centered = x.colwise() - g.mean;
    g.covariance = centered * centered.transpose() / static_cast<double>(n - 1);
    return g;
  };
  return {fit(stage1), fit(stage2)};
}

std::size_t select_best(std::span<const RolloutOutcome> candidates) {
  std::size_t best = candidates.size();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].violated && candidates[i].d_rb < best_d) {
      best = i;
      best_d = candidates[i].d_rb;
    }
  }
  if (best != candidates.size()) return best;
  best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i)
    if (candidates[i].d_rb < candidates[best].d_rb) best = i;
  return best;
}

RolloutOutcome best_of_k(const TwoStepModel& m, const GameConfig& cfg, const PolarAction& r1, int k, Rng& rng) {
  if (k < 1) throw ValidationError("best_of_k: k must be >= 1");
  std::vector<RolloutOutcome> candidates;
  candidates.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) candidates.push_back(rollout_two_step(m, cfg, r1, rng));
  return candidates[select_best(candidates)];
}

}  // namespace pursuit
