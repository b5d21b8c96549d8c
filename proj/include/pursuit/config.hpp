#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "pursuit/game.hpp"

namespace pursuit {

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_digest(const std::filesystem::path& path);

/// Decimal rendering with 17 significant digits (round-trips any double).
std::string format_double(double value);
/// Strict parse of a full token; throws std::invalid_argument otherwise.
double parse_double(std::string_view token);
std::int64_t parse_int(std::string_view token);

/// Flat `key = value` text, `#` comments, angles in degrees. Keys:
///   t_total, v_mean_red, v_std_red, theta_mean_red_deg, theta_std_red_deg,
///   v_cap, safety_pct, red_start_x, red_start_y, blue_start_x, blue_start_y,
///   catch_eps
/// Each angle may instead be given in radians (`*_rad`), never both.
/// Missing keys keep their defaults; unknown or repeated keys are rejected.
GameConfig parse_game_config(std::string_view text);
GameConfig load_game_config(const std::filesystem::path& path);

/// Canonical text form: every key in fixed order, angles in radians so that
/// parse_game_config inverts it bit-exactly.
std::string game_config_text(const GameConfig& cfg);
std::string config_digest(const GameConfig& cfg);

}  // namespace pursuit
