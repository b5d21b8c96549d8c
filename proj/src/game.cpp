#include "pursuit/game.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "pursuit/errors.hpp"

namespace pursuit {

void GameConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid game config: " + what); };
  if (t_total < 2 || t_total % 2 != 0) fail(fmt::format("t_total must be even and >= 2 (got {})", t_total));
  if (!(v_std_red >= 0.0) || !(theta_std_red >= 0.0)) fail("standard deviations must be >= 0");
  if (!std::isfinite(v_mean_red) || !std::isfinite(theta_mean_red)) fail("means must be finite");
  if (!std::isfinite(v_std_red) || !std::isfinite(theta_std_red)) fail("standard deviations must be finite");
  if (!(v_cap > 0.0)) fail("v_cap must be > 0");
  if (!(safety_pct >= 0.0 && safety_pct <= 100.0)) fail("safety_pct must lie in [0, 100]");
  if (!(catch_eps > 0.0)) fail("catch_eps must be > 0");
  if (!red_start.allFinite() || !blue_start.allFinite()) fail("start points must be finite");
  if (v_mean_red <= 0.0 && v_std_red == 0.0) fail("Red speed distribution has no positive mass");
}

Point2 project_destination(const GameConfig& cfg, const PolarAction& r1) {
  return position_after(cfg.red_start, r1, cfg.t_total);
}

PolarAction scripted_blue_stage1(const GameConfig& cfg, const PolarAction& r1) {
  return action_towards(cfg.blue_start, project_destination(cfg, r1), cfg.t_total);
}

SafetyCircle safety_circle(const GameConfig& cfg, const PolarAction& r1) {
  const Point2 center = project_destination(cfg, r1);
  return {center, cfg.safety_pct / 100.0 * endpoint_distance(cfg.red_start, center)};
}

RedResponse red_stage2(const GameConfig& cfg, const PolarAction& r1,
                       const Point2& blue_mid) {
  const SafetyCircle circle = safety_circle(cfg, r1);
  Point2 away = circle.center - blue_mid;
  const double length = away.norm();
  if (length == 0.0) {
    away = r1.direction();
  } else {
    away /= length;
  }
  const Point2 destination = circle.center + circle.radius * away;
  const Point2 red_mid = position_after(cfg.red_start, r1, cfg.half());
  PolarAction r2 = action_towards(red_mid, destination, cfg.half());
  if (r2.speed == 0.0) r2 = PolarAction(0.0, r1.heading);
  return {r2, destination};
}

PolarAction scripted_blue_stage2(const GameConfig& cfg, const Point2& blue_mid,
                                 double v1b, const Point2& dest2) {
  const PolarAction ideal = action_towards(blue_mid, dest2, cfg.half());
  const double budget = std::max(0.0, cfg.v_cap - v1b);
  return {std::min(ideal.speed, budget), ideal.heading};
}

EpisodeRecord play(const GameConfig& cfg, const PolarAction& r1,
                   const PolarAction& b1, const PolarAction& b2) {
  const int half = cfg.half();
  const Point2 blue_mid = position_after(cfg.blue_start, b1, half);
  EpisodeRecord rec;
  rec.r1 = r1;
  rec.b1 = b1;
  rec.r2 = red_stage2(cfg, r1, blue_mid).r2;
  rec.b2 = b2;
  rec.v_cap_rem = cfg.v_cap - b1.speed;
  rec.red_end = endpoint(cfg.red_start, r1, rec.r2, half);
  rec.blue_end = endpoint(cfg.blue_start, b1, b2, half);
  rec.d_rb = endpoint_distance(rec.red_end, rec.blue_end);
  rec.violated = speed_cap_violated(b1.speed, b2.speed, cfg.v_cap);
  return rec;
}

PolarAction sample_red_stage1(const GameConfig& cfg, Rng& rng) {
  double speed = 0.0;
  do {
    speed = normal(rng, cfg.v_mean_red, cfg.v_std_red);
  } while (!(speed > 0.0));
  const double heading = normal(rng, cfg.theta_mean_red, cfg.theta_std_red);
  return {speed, heading};
}

EpisodeRecord scripted_episode(const GameConfig& cfg, const PolarAction& r1) {
  const PolarAction b1 = scripted_blue_stage1(cfg, r1);
  const Point2 blue_mid = position_after(cfg.blue_start, b1, cfg.half());
  const RedResponse red = red_stage2(cfg, r1, blue_mid);
  const PolarAction b2 = scripted_blue_stage2(cfg, blue_mid, b1.speed, red.destination);
  return play(cfg, r1, b1, b2);
}

EpisodeRecord simulate_episode(const GameConfig& cfg, Rng& rng) {
  return scripted_episode(cfg, sample_red_stage1(cfg, rng));
}

double single_line_distance(const GameConfig& cfg, const PolarAction& r1,
                            const PolarAction& action) {
  const double second = std::clamp(cfg.v_cap - action.speed, 0.0, action.speed);
  return play(cfg, r1, action, PolarAction(second, action.heading)).d_rb;
}

}  // namespace pursuit
