#include "pursuit/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

#include "pursuit/errors.hpp"

namespace pursuit {

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return fnv1a_hex(buffer.str());
}

std::string format_double(double value) { return fmt::format("{:.17g}", value); }

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

double parse_double(std::string_view token) {
  token = trim(token);
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::invalid_argument("not a number: '" + std::string(token) + "'");
  return value;
}

std::int64_t parse_int(std::string_view token) {
  token = trim(token);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || token.empty())
    throw std::invalid_argument("not an integer: '" + std::string(token) + "'");
  return value;
}

namespace {

using Setter = std::function<void(GameConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"t_total", [](GameConfig& c, std::string_view v) { c.t_total = static_cast<int>(parse_int(v)); }},
      {"v_mean_red", [](GameConfig& c, std::string_view v) { c.v_mean_red = parse_double(v); }},
      {"v_std_red", [](GameConfig& c, std::string_view v) { c.v_std_red = parse_double(v); }},
      {"theta_mean_red_deg", [](GameConfig& c, std::string_view v) { c.theta_mean_red = deg_to_rad(parse_double(v)); }},
      {"theta_std_red_deg", [](GameConfig& c, std::string_view v) { c.theta_std_red = deg_to_rad(parse_double(v)); }},
      {"theta_mean_red_rad", [](GameConfig& c, std::string_view v) { c.theta_mean_red = parse_double(v); }},
      {"theta_std_red_rad", [](GameConfig& c, std::string_view v) { c.theta_std_red = parse_double(v); }},
      {"v_cap", [](GameConfig& c, std::string_view v) { c.v_cap = parse_double(v); }},
      {"safety_pct", [](GameConfig& c, std::string_view v) { c.safety_pct = parse_double(v); }},
      {"red_start_x", [](GameConfig& c, std::string_view v) { c.red_start.x() = parse_double(v); }},
      {"red_start_y", [](GameConfig& c, std::string_view v) { c.red_start.y() = parse_double(v); }},
      {"blue_start_x", [](GameConfig& c, std::string_view v) { c.blue_start.x() = parse_double(v); }},
      {"blue_start_y", [](GameConfig& c, std::string_view v) { c.blue_start.y() = parse_double(v); }},
      {"catch_eps", [](GameConfig& c, std::string_view v) { c.catch_eps = parse_double(v); }},
  };
  return table;
}

}  // namespace

GameConfig parse_game_config(std::string_view text) {
  GameConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::istringstream lines{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(lines, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(fmt::format("config line {}: unknown key '{}'", line_no, key));
    if (!seen.emplace(key).second)
      throw ConfigError(fmt::format("config line {}: repeated key '{}'", line_no, key));
    for (const std::string_view angle : {"theta_mean_red", "theta_std_red"}) {
      if (key.starts_with(angle) &&
          seen.count(std::string(angle) + "_deg") + seen.count(std::string(angle) + "_rad") > 1)
        throw ConfigError(fmt::format("config line {}: {} given in both degrees and radians", line_no, angle));
    }
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  cfg.validate();
  return cfg;
}

GameConfig load_game_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_game_config(buffer.str());
}

std::string game_config_text(const GameConfig& cfg) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  put("t_total", std::to_string(cfg.t_total));
  put("v_mean_red", format_double(cfg.v_mean_red));
  put("v_std_red", format_double(cfg.v_std_red));
  put("theta_mean_red_rad", format_double(cfg.theta_mean_red));
  put("theta_std_red_rad", format_double(cfg.theta_std_red));
  put("v_cap", format_double(cfg.v_cap));
  put("safety_pct", format_double(cfg.safety_pct));
  put("red_start_x", format_double(cfg.red_start.x()));
  put("red_start_y", format_double(cfg.red_start.y()));
  put("blue_start_x", format_double(cfg.blue_start.x()));
  put("blue_start_y", format_double(cfg.blue_start.y()));
  put("catch_eps", format_double(cfg.catch_eps));
  return out;
}

std::string config_digest(const GameConfig& cfg) { return fnv1a_hex(game_config_text(cfg)); }

}  // namespace pursuit
