#include <doctest.h>

#include <numbers>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

using namespace pursuit;

TEST_CASE("parse_game_config: degrees, comments, defaults") {
  const GameConfig cfg = parse_game_config(
      "# defaults\n"
      "t_total = 20\n"
      "theta_mean_red_deg = 45   # trailing comment\n"
      "v_cap=11.5\n"
      "\n"
      "blue_start_x = 80\n");
  CHECK(cfg.t_total == 20);
  CHECK(cfg.theta_mean_red == doctest::Approx(std::numbers::pi / 4));
  CHECK(cfg.v_cap == 11.5);
  CHECK(cfg.blue_start.x() == 80.0);
  CHECK(cfg.blue_start.y() == GameConfig{}.blue_start.y());
  CHECK(cfg.v_mean_red == GameConfig{}.v_mean_red);
}

TEST_CASE("parse_game_config: fail fast on bad input") {
  CHECK_THROWS_AS(parse_game_config("speed_limit = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("v_cap = 3\nv_cap = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("theta_std_red_deg = 8\ntheta_std_red_rad = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("v_cap = twelve\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("v_cap 12\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("t_total = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_game_config("v_cap = -1\n"), ConfigError);
}

TEST_CASE("game_config_text round-trips bit-exactly") {
  GameConfig cfg;
  cfg.theta_mean_red = 1.0 / 3.0;
  cfg.v_std_red = 0.123456789012345678;
  cfg.red_start = Point2(-0.1, 1e-300);
  const GameConfig back = parse_game_config(game_config_text(cfg));
  CHECK(back.theta_mean_red == cfg.theta_mean_red);
  CHECK(back.v_std_red == cfg.v_std_red);
  CHECK(back.red_start == cfg.red_start);
  CHECK(game_config_text(back) == game_config_text(cfg));
  CHECK(config_digest(back) == config_digest(cfg));
}

TEST_CASE("config_digest separates configurations") {
  GameConfig a, b;
  b.v_cap = 12.000000001;
  CHECK(config_digest(a) != config_digest(b));
  CHECK(config_digest(a).size() == 16);
}

TEST_CASE("fnv1a_hex known vectors") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double("1e-3") == 1e-3);
  CHECK(parse_int("-42") == -42);
  CHECK_THROWS_AS(parse_double("1.0x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_int("4.0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK(parse_double(format_double(0.1)) == 0.1);
}
