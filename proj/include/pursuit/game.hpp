#pragma once

#include <cstdint>

#include "pursuit/geometry.hpp"
#include "pursuit/random.hpp"

namespace pursuit {

/// Parameters of the two-stage chase. Angles are radians; config files carry
/// degrees and are converted on load.
struct GameConfig {
  int t_total = 20;
  double v_mean_red = 5.0;
  double v_std_red = 0.7;
  double theta_mean_red = deg_to_rad(60.0);
  double theta_std_red = deg_to_rad(8.0);
  double v_cap = 12.0;
  double safety_pct = 10.0;
  Point2 red_start{10.0, 50.0};
  Point2 blue_start{90.0, 50.0};
  double catch_eps = 1e-6;

  int half() const { return t_total / 2; }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// One simulated game instance.
struct EpisodeRecord {
  std::int64_t episode_id = 0;
  PolarAction r1, b1, r2, b2;
  double v_cap_rem = 0.0;
  double d_rb = 0.0;
  bool violated = false;
  Point2 red_end = Point2::Zero();
  Point2 blue_end = Point2::Zero();
};

struct SafetyCircle {
  Point2 center;
  double radius;
};

struct RedResponse {
  PolarAction r2;
  Point2 destination;
};

/// Where Red would be at t_total had it kept its stage-1 action.
Point2 project_destination(const GameConfig& cfg, const PolarAction& r1);

/// Blue's data-generating stage-1 action: straight at the projected
/// destination, arriving exactly at t_total.
PolarAction scripted_blue_stage1(const GameConfig& cfg, const PolarAction& r1);

SafetyCircle safety_circle(const GameConfig& cfg, const PolarAction& r1);

/// Red's stage-2 policy: move to the point of the safety circle farthest from
/// Blue's midpoint. When Blue sits on the circle center every point is
/// equally far; Red then continues along its stage-1 heading.
RedResponse red_stage2(const GameConfig& cfg, const PolarAction& r1,
                       const Point2& blue_mid);

/// Blue's data-generating stage-2 action: aim at Red's new destination, with
/// the speed capped by the remaining budget v_cap - v1b.
PolarAction scripted_blue_stage2(const GameConfig& cfg, const Point2& blue_mid,
                                 double v1b, const Point2& dest2);

/// Speed budget check. Written as `second > cap - first` so that a stage-2
/// speed clipped to exactly `cap - first` never reads as a violation.
inline bool speed_cap_violated(double first, double second, double cap) {
  return second > cap - first;
}

/// Plays both stages given Blue's actions; Red responds through red_stage2.
/// The returned record has episode_id 0.
EpisodeRecord play(const GameConfig& cfg, const PolarAction& r1,
                   const PolarAction& b1, const PolarAction& b2);

/// Draws Red's stage-1 action (non-positive speeds are redrawn).
PolarAction sample_red_stage1(const GameConfig& cfg, Rng& rng);

/// Full data-generating episode: sampled Red, scripted Blue, Red's response.
EpisodeRecord simulate_episode(const GameConfig& cfg, Rng& rng);

/// Deterministic scripted episode for a given Red stage-1 action.
EpisodeRecord scripted_episode(const GameConfig& cfg, const PolarAction& r1);

/// End-point distance when Blue holds `action` for both stages. The second
/// stage speed drops to v_cap - speed when 2*speed exceeds the cap.
double single_line_distance(const GameConfig& cfg, const PolarAction& r1,
                            const PolarAction& action);

}  // namespace pursuit
