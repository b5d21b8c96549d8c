#include <doctest.h>

#include <numeric>
#include <sstream>

#include "pursuit/errors.hpp"
#include "pursuit/eval.hpp"
#include "pursuit/pipeline.hpp"

using namespace pursuit;

namespace {

Rollout constant_distance(double d, bool violated = false) {
  return [d, violated](const PolarAction&, Rng&) {
    RolloutOutcome o;
    o.d_rb = d;
    o.violated = violated;
    return o;
  };
}

// Distance drawn from the episode's source, so paired rollouts coincide.
Rollout random_distance(double scale) {
  return [scale](const PolarAction& r1, Rng& rng) {
    RolloutOutcome o;
    o.d_rb = scale * std::uniform_real_distribution<double>(0.0, 1.0)(rng) + r1.speed;
    return o;
  };
}

ActionSampler noisy(PolarAction a) {
  return [a](const Eigen::VectorXd&, double, Rng& rng) {
    return PolarAction(a.speed + normal(rng, 0.0, 1.0), a.heading + normal(rng, 0.0, 0.3));
  };
}

const Dataset& test_rows() {
  static const Dataset ds = generate_dataset(GameConfig{}, 200, 31);
  return ds;
}

}  // namespace

TEST_CASE("constant stubs: paired means") {
  const EvalReport r =
      evaluate_rollouts(constant_distance(1.0), constant_distance(3.0), constant_distance(4.0), test_rows(), 1);
  CHECK(r.test_size() == test_rows().size());
  CHECK(r.means.star_single == doctest::Approx(-2.0));
  CHECK(r.means.star_random == doctest::Approx(-3.0));
  CHECK(r.means.single_random == doctest::Approx(-1.0));
}

TEST_CASE("identical stubs: all deltas zero, per episode") {
  const EvalReport r =
      evaluate_rollouts(random_distance(5.0), random_distance(5.0), random_distance(5.0), test_rows(), 2);
  for (const auto& e : r.episodes) {
    CHECK(e.delta_star_single() == 0.0);
    CHECK(e.delta_star_random() == 0.0);
    CHECK(e.delta_single_random() == 0.0);
  }
  CHECK(r.means.star_single == 0.0);
}

TEST_CASE("property: per-episode identities and violation counts") {
  const EvalReport r = evaluate_rollouts(random_distance(2.0), random_distance(5.0), constant_distance(3.0, true),
                                         test_rows(), 3, 4);
  double sum = 0.0;
  for (const auto& e : r.episodes) {
    CHECK(e.delta_star_single() == e.d_star - e.d_s);
    CHECK(e.delta_star_random() == doctest::Approx(e.delta_star_single() + (e.d_s - e.d_r)).epsilon(1e-15));
    sum += e.delta_star_single();
  }
  CHECK(r.means.star_single == doctest::Approx(sum / static_cast<double>(r.test_size())));
  CHECK(r.violations.two_step == 0);
  CHECK(r.violations.randomized == r.test_size());
  CHECK(r.violations.single_step <= r.test_size());
}

TEST_CASE("evaluation is independent of the thread count") {
  const GameConfig cfg;
  const TwoStepModel two{noisy({4.5, 1.9}), noisy({5.5, 1.5}), 0.98, 0.98};
  const SingleStepModel single{noisy({5.0, 1.9}), 0.98};
  const RandomizedModel randomized = fit_randomized(test_rows());
  const EvalReport a = evaluate(two, single, randomized, cfg, test_rows(), 9, 1);
  const EvalReport b = evaluate(two, single, randomized, cfg, test_rows(), 9, 3);
  CHECK(report_to_json(a) == report_to_json(b));
}

TEST_CASE("count_violations") {
  RolloutOutcome yes, no;
  yes.violated = true;
  const std::vector<RolloutOutcome> v{yes, no, yes};
  CHECK(count_violations(v) == 2);
  CHECK(count_violations(std::vector<RolloutOutcome>{}) == 0);
}

TEST_CASE("histogram bins: 20 equal bins, 1.0 in the last") {
  CHECK(histogram_bin(0.0) == 0);
  CHECK(histogram_bin(0.049) == 0);
  CHECK(histogram_bin(0.05) == 1);
  CHECK(histogram_bin(0.999) == 19);
  CHECK(histogram_bin(1.0) == 19);
}

TEST_CASE("sensitivity sweep: score-blind stub gives identical histograms with full mass") {
  const GameConfig cfg;
  const TwoStepModel blind{noisy({4.5, 1.9}), noisy({5.5, 1.5}), 0.98, 0.98};
  const auto settings = default_sweep_settings();
  REQUIRE(settings.size() == 3);
  CHECK(settings[0].s1 == 0.95);
  CHECK(settings[0].s2 == 0.98);
  CHECK(settings[1].s1 == 0.55);
  CHECK(settings[1].s2 == 0.6);
  CHECK(settings[2].s1 == 0.15);
  CHECK(settings[2].s2 == 0.2);
  const auto h = sensitivity_sweep(blind, cfg, test_rows(), settings, {0.0, 30.0}, 4);
  REQUIRE(h.size() == 3);
  for (const auto& x : h) {
    CHECK(x.counts.size() == static_cast<std::size_t>(kHistogramBins));
    CHECK(std::accumulate(x.counts.begin(), x.counts.end(), std::size_t{0}) == test_rows().size());
    CHECK(x.counts == h[0].counts);
    CHECK(x.mean_realized == h[0].mean_realized);
  }
  CHECK_THROWS_AS(sensitivity_sweep(blind, cfg, test_rows(), {}, {0.0, 30.0}, 4), ValidationError);
}

TEST_CASE("sensitivity sweep passes each setting to the matching stage") {
  const GameConfig cfg;
  std::vector<double> s1_seen, s2_seen;
  TwoStepModel spy;
  spy.stage1 = [&](const Eigen::VectorXd& c, double s, Rng& rng) {
    s1_seen.push_back(s);
    return noisy({4.5, 1.9})(c, s, rng);
  };
  spy.stage2 = [&](const Eigen::VectorXd& c, double s, Rng& rng) {
    s2_seen.push_back(s);
    return noisy({5.5, 1.5})(c, s, rng);
  };
  Dataset few;
  few.rows.assign(test_rows().rows.begin(), test_rows().rows.begin() + 2);
  const std::vector<ScoreSetting> one{{0.3, 0.4}};
  sensitivity_sweep(spy, cfg, few, one, {0.0, 30.0}, 1);
  CHECK(s1_seen == std::vector<double>{0.3, 0.3});
  CHECK(s2_seen == std::vector<double>{0.4, 0.4});
}

TEST_CASE("box_summary: quartiles by linear interpolation") {
  const BoxSummary b = box_summary({5.0, 1.0, 4.0, 2.0, 3.0});
  CHECK(b.min == 1.0);
  CHECK(b.q1 == 2.0);
  CHECK(b.median == 3.0);
  CHECK(b.q3 == 4.0);
  CHECK(b.max == 5.0);
  const BoxSummary even = box_summary({1.0, 2.0, 3.0, 4.0});
  CHECK(even.q1 == doctest::Approx(1.75));
  CHECK(even.median == doctest::Approx(2.5));
  CHECK(even.q3 == doctest::Approx(3.25));
  const BoxSummary one = box_summary({-0.7});
  CHECK(one.min == -0.7);
  CHECK(one.median == -0.7);
  CHECK(one.max == -0.7);
  CHECK_THROWS_AS(box_summary({}), ValidationError);
}

TEST_CASE("report.json round-trips losslessly") {
  const GameConfig cfg;
  const TwoStepModel two{noisy({4.5, 1.9}), noisy({5.5, 1.5}), 0.98, 0.98};
  EvalReport r = evaluate_rollouts(random_distance(1.0 / 3.0), constant_distance(0.1, true), random_distance(7.0),
                                   test_rows(), 5);
  r.dataset_digest = "0123456789abcdef";
  r.sensitivity = sensitivity_sweep(two, cfg, test_rows(), default_sweep_settings(), {0.0, 30.0}, 6);
  const std::string text = report_to_json(r);
  const EvalReport back = report_from_json(text);
  CHECK(report_to_json(back) == text);
  REQUIRE(back.episodes.size() == r.episodes.size());
  for (std::size_t i = 0; i < r.episodes.size(); ++i) {
    CHECK(back.episodes[i].d_star == r.episodes[i].d_star);
    CHECK(back.episodes[i].d_r == r.episodes[i].d_r);
  }
  CHECK(back.means.star_random == r.means.star_random);
  CHECK(back.violations.single_step == r.violations.single_step);
  CHECK(back.sensitivity[2].counts == r.sensitivity[2].counts);
  CHECK(back.sensitivity[1].mean_realized == r.sensitivity[1].mean_realized);
  CHECK(back.seed == 5);
  CHECK_THROWS_AS(report_from_json("{\"seed\": 1}"), IoError);
}

TEST_CASE("deltas.csv and sensitivity.csv layouts") {
  const EvalReport r =
      evaluate_rollouts(constant_distance(1.0), constant_distance(3.0), constant_distance(4.0), test_rows(), 1);
  std::ostringstream deltas;
  write_deltas_csv(deltas, r);
  std::istringstream d(deltas.str());
  std::string line;
  std::getline(d, line);
  CHECK(line == "episode_id,d_star,d_s,d_r,delta_ss,delta_sr_star,delta_sr");
  std::getline(d, line);
  CHECK(line == std::to_string(test_rows().rows[0].episode_id) + ",1,3,4,-2,-3,-1");

  SensitivityHistogram h;
  h.setting = {0.95, 0.98};
  h.counts.assign(kHistogramBins, 1);
  std::ostringstream sens;
  write_sensitivity_csv(sens, std::vector<SensitivityHistogram>{h});
  std::istringstream s(sens.str());
  std::getline(s, line);
  CHECK(line == "setting_s1,setting_s2,bin_lo,bin_hi,count");
  std::getline(s, line);
  CHECK(line.rfind("0.94999999999999996,0.97999999999999998,0,0.050000000000000003,1", 0) == 0);
  int rows = 1;
  while (std::getline(s, line)) ++rows;
  CHECK(rows == kHistogramBins);
}

TEST_CASE("multirun: one run reproduces its own values, deterministic for a seed") {
  const Dataset full = generate_dataset(GameConfig{}, 700, 41);
  PipelineOptions options;
  options.gan.epochs = 2;
  options.gan.batch_size = 64;
  options.n_mc = 2;
  options.best_k = 3;
  const MultirunSummary a = multirun(full, options, 1, 77);
  REQUIRE(a.runs.size() == 1);
  const auto& m = a.runs[0].report.means;
  CHECK(a.star_single.min == m.star_single);
  CHECK(a.star_single.median == m.star_single);
  CHECK(a.star_single.max == m.star_single);
  CHECK(a.star_random.q1 == m.star_random);
  CHECK(a.single_random.q3 == m.single_random);
  CHECK(a.runs[0].report.test_size() == 140);
  CHECK(a.runs[0].report.sensitivity.size() == 3);

  const MultirunSummary b = multirun(full, options, 1, 77);
  CHECK(multirun_to_json(a) == multirun_to_json(b));
  std::ostringstream ca, cb;
  write_multirun_csv(ca, a);
  write_multirun_csv(cb, b);
  CHECK(ca.str() == cb.str());
  CHECK(ca.str().rfind("run_id,mean_delta_ss,mean_delta_sr_star,mean_delta_sr,violations_two_step,"
                       "violations_single,violations_rand\n0,",
                       0) == 0);
  CHECK_THROWS_AS(multirun(full, options, 0, 77), ValidationError);
}
