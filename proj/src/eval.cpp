#include "pursuit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

namespace pursuit {

std::vector<ScoreSetting> default_sweep_settings() { return {{0.95, 0.98}, {0.55, 0.6}, {0.15, 0.2}}; }

EvalReport evaluate_rollouts(const Rollout& two_step, const Rollout& single, const Rollout& randomized,
                             const Dataset& test, std::uint64_t seed, unsigned threads) {
  if (test.size() == 0) throw ValidationError("evaluate: empty test set");
  const std::size_t n = test.size();
  std::vector<RolloutOutcome> star(n), s(n), r(n);
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& row = test.rows[i];
    const std::uint64_t episode_seed = derive_seed(seed, static_cast<std::uint64_t>(row.episode_id));
    Rng rng_star(episode_seed), rng_single(episode_seed), rng_random(episode_seed);
    star[i] = two_step(row.r1, rng_star);
    s[i] = single(row.r1, rng_single);
    r[i] = randomized(row.r1, rng_random);
  });

  EvalReport report;
  report.seed = seed;
  report.episodes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EpisodeDistances e{test.rows[i].episode_id, star[i].d_rb, s[i].d_rb, r[i].d_rb};
    report.episodes.push_back(e);
    report.means.star_single += e.delta_star_single();
    report.means.star_random += e.delta_star_random();
    report.means.single_random += e.delta_single_random();
  }
  report.means.star_single /= static_cast<double>(n);
  report.means.star_random /= static_cast<double>(n);
  report.means.single_random /= static_cast<double>(n);
  report.violations = {count_violations(star), count_violations(s), count_violations(r)};
  return report;
}

EvalReport evaluate(const TwoStepModel& two_step, const SingleStepModel& single, const RandomizedModel& randomized,
                    const GameConfig& cfg, const Dataset& test, std::uint64_t seed, unsigned threads) {
  return evaluate_rollouts(
      [&](const PolarAction& r1, Rng& rng) { return rollout_two_step(two_step, cfg, r1, rng); },
      [&](const PolarAction& r1, Rng& rng) { return rollout_single_step(single, cfg, r1, rng); },
      [&](const PolarAction& r1, Rng& rng) { return rollout_randomized(randomized, cfg, r1, rng); }, test, seed,
      threads);
}

std::size_t count_violations(std::span<const RolloutOutcome> outcomes) {
  return static_cast<std::size_t>(
      std::count_if(outcomes.begin(), outcomes.end(), [](const RolloutOutcome& o) { return o.violated; }));
}

int histogram_bin(double score) {
  const int bin = static_cast<int>(std::floor(std::clamp(score, 0.0, 1.0) * kHistogramBins));
  return std::min(bin, kHistogramBins - 1);
}

std::vector<SensitivityHistogram> sensitivity_sweep(const TwoStepModel& m, const GameConfig& cfg,
                                                    const Dataset& test, std::span<const ScoreSetting> settings,
                                                    const MinMax& train_distance_range, std::uint64_t seed,
                                                    unsigned threads) {
  if (settings.empty()) throw ValidationError("sensitivity_sweep: no settings");
  std::vector<SensitivityHistogram> out;
  for (const auto& setting : settings) {
    TwoStepModel queried = m;
    queried.s1_query = setting.s1;
    queried.s2_query = setting.s2;
    std::vector<double> realized(test.size());
    parallel_for(test.size(), threads, [&](std::size_t i) {
      const auto& row = test.rows[i];
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(row.episode_id)));
      realized[i] = realized_score(train_distance_range, rollout_two_step(queried, cfg, row.r1, rng).d_rb);
    });
    SensitivityHistogram h;
    h.setting = setting;
    h.counts.assign(kHistogramBins, 0);
    double total = 0.0;
    for (double v : realized) {
      ++h.counts[static_cast<std::size_t>(histogram_bin(v))];
      total += v;
    }
    h.mean_realized = test.size() ? total / static_cast<double>(test.size()) : 0.0;
    out.push_back(std::move(h));
  }
  return out;
}

double mean_best_of_k(const TwoStepModel& m, const GameConfig& cfg, const Dataset& test, int k, std::uint64_t seed,
                      unsigned threads) {
  if (test.size() == 0) throw ValidationError("mean_best_of_k: empty test set");
  std::vector<double> d(test.size());
  parallel_for(test.size(), threads, [&](std::size_t i) {
    const auto& row = test.rows[i];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(row.episode_id)));
    d[i] = best_of_k(m, cfg, row.r1, k, rng).d_rb;
  });
  double total = 0.0;
  for (double v : d) total += v;
  return total / static_cast<double>(d.size());
}

BoxSummary box_summary(std::vector<double> values) {
  if (values.empty()) throw ValidationError("box_summary: no values");
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back()};
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["dataset_digest"] = report.dataset_digest;
  j["test_size"] = report.test_size();
  j["mean_deltas"] = {{"delta_star_single", report.means.star_single},
                      {"delta_star_random", report.means.star_random},
                      {"delta_single_random", report.means.single_random}};
  j["violations"] = {{"two_step", report.violations.two_step},
                     {"single_step", report.violations.single_step},
                     {"randomized", report.violations.randomized}};
  auto episodes = nlohmann::ordered_json::array();
  for (const auto& e : report.episodes)
    episodes.push_back({{"episode_id", e.episode_id}, {"d_star", e.d_star}, {"d_s", e.d_s}, {"d_r", e.d_r}});
  j["episodes"] = std::move(episodes);
  auto sensitivity = nlohmann::ordered_json::array();
  for (const auto& h : report.sensitivity)
    sensitivity.push_back(
        {{"s1", h.setting.s1}, {"s2", h.setting.s2}, {"mean_realized", h.mean_realized}, {"counts", h.counts}});
  j["sensitivity"] = std::move(sensitivity);
  return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
  EvalReport report;
  try {
    const auto j = nlohmann::json::parse(text);
    report.seed = j.at("seed").get<std::uint64_t>();
    report.dataset_digest = j.at("dataset_digest").get<std::string>();
    const auto& m = j.at("mean_deltas");
    report.means = {m.at("delta_star_single").get<double>(), m.at("delta_star_random").get<double>(),
                    m.at("delta_single_random").get<double>()};
    const auto& v = j.at("violations");
    report.violations = {v.at("two_step").get<std::size_t>(), v.at("single_step").get<std::size_t>(),
                         v.at("randomized").get<std::size_t>()};
    for (const auto& e : j.at("episodes"))
      report.episodes.push_back({e.at("episode_id").get<std::int64_t>(), e.at("d_star").get<double>(),
                                 e.at("d_s").get<double>(), e.at("d_r").get<double>()});
    for (const auto& h : j.at("sensitivity"))
      report.sensitivity.push_back({{h.at("s1").get<double>(), h.at("s2").get<double>()},
                                    h.at("counts").get<std::vector<std::size_t>>(),
                                    h.at("mean_realized").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report.json: ") + e.what());
  }
  return report;
}

void write_deltas_csv(std::ostream& out, const EvalReport& report) {
  out << "episode_id,d_star,d_s,d_r,delta_ss,delta_sr_star,delta_sr\n";
  for (const auto& e : report.episodes) {
    out << e.episode_id << ',' << format_double(e.d_star) << ',' << format_double(e.d_s) << ','
        << format_double(e.d_r) << ',' << format_double(e.delta_star_single()) << ','
        << format_double(e.delta_star_random()) << ',' << format_double(e.delta_single_random()) << '\n';
  }
}

void write_sensitivity_csv(std::ostream& out, std::span<const SensitivityHistogram> histograms) {
  out << "setting_s1,setting_s2,bin_lo,bin_hi,count\n";
  for (const auto& h : histograms) {
    for (int b = 0; b < kHistogramBins; ++b) {
      out << format_double(h.setting.s1) << ',' << format_double(h.setting.s2) << ','
          << format_double(static_cast<double>(b) / kHistogramBins) << ','
          << format_double(static_cast<double>(b + 1) / kHistogramBins) << ',' << h.counts[static_cast<std::size_t>(b)]
          << '\n';
    }
  }
}

}  // namespace pursuit
