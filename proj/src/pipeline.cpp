#include "pursuit/pipeline.hpp"

#include <ostream>
#include <sstream>

#include <fmt/core.h>
#include <json.hpp>

#include "pursuit/config.hpp"
#include "pursuit/errors.hpp"

namespace pursuit {

namespace {

void emit(const StageLog& log, const std::string& line) {
  if (log) log(line);
}

TrainConfig seeded(TrainConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TwoStepTraining train_two_step(const Dataset& train, const GameConfig& cfg, const TrainConfig& gan, int n_mc,
                               double query_score, std::uint64_t seed, unsigned threads, const StageLog& log) {
  TwoStepTraining out;
  out.d_rb_range = fit_minmax(column_d_rb(train));
  Dataset scored = attach_s2(train, out.d_rb_range);
  emit(log, fmt::format("stage 1/4: attached s2 to {} training rows (d_rb range [{}, {}])", scored.size(),
                        format_double(out.d_rb_range.min), format_double(out.d_rb_range.max)));

  GanSpec g2_spec;
  g2_spec.condition_dim = 5;
  out.g2 = std::make_shared<const Generator>(
      train_conditional_gan(make_g2_pairs(scored), g2_spec, seeded(gan, derive_seed(seed, Stream::generator_g2))));
  emit(log, "stage 2/4: trained G2 (stage-2 generator)");

  out.s1_table = build_s1_scores(as_sampler(out.g2), scored, cfg, n_mc, derive_seed(seed, Stream::s1_scores),
                                 query_score, threads);
  scored = attach_s1(scored, out.s1_table);
  emit(log, fmt::format("stage 3/4: built s1 scores with G2 (n_mc = {}, alpha range [{}, {}])", n_mc,
                        format_double(out.s1_table.alpha_range.min), format_double(out.s1_table.alpha_range.max)));

  GanSpec g1_spec;
  g1_spec.condition_dim = 2;
  out.g1 = std::make_shared<const Generator>(
      train_conditional_gan(make_g1_pairs(scored), g1_spec, seeded(gan, derive_seed(seed, Stream::generator_g1))));
  emit(log, "stage 4/4: trained G1 (stage-1 generator)");
  out.scored_train = std::move(scored);
  return out;
}

SingleStepTraining train_single_step(const Dataset& train, const GameConfig& cfg, const TrainConfig& gan,
                                     std::uint64_t seed, const StageLog& log) {
  SingleStepTraining out;
  out.d_single_range = fit_minmax(column_d_single(train, cfg));
  GanSpec spec;
  spec.condition_dim = 2;
  out.generator = std::make_shared<const Generator>(train_conditional_gan(
      make_single_step_pairs(train, cfg, out.d_single_range), spec,
      seeded(gan, derive_seed(seed, Stream::generator_single))));
  emit(log, "trained single-step generator");
  return out;
}

RunResult run_pipeline(const Dataset& full, const PipelineOptions& options, int run_id, std::uint64_t run_seed,
                       const StageLog& log) {
  const auto& cfg = options.game;
  auto [train, test] = split(full, options.train_frac, derive_seed(run_seed, Stream::split));
  if (test.size() == 0) throw ValidationError("run_pipeline: empty test split");
  auto prefixed = [&](std::string_view line) { emit(log, fmt::format("[run {}] {}", run_id, line)); };

  const auto two = train_two_step(train, cfg, options.gan, options.n_mc, options.query_score, run_seed,
                                  options.threads, prefixed);
  const auto single = train_single_step(train, cfg, options.gan, run_seed, prefixed);
  const auto randomized = fit_randomized(train);

  const TwoStepModel two_model = make_two_step_model(two.g1, two.g2, options.query_score, options.query_score);
  const SingleStepModel single_model = make_single_step_model(single.generator, options.query_score);

  RunResult result;
  result.run_id = run_id;
  result.seed = run_seed;
  const std::uint64_t eval_seed = derive_seed(run_seed, Stream::evaluation);
  result.report = evaluate(two_model, single_model, randomized, cfg, test, eval_seed, options.threads);
  result.report.dataset_digest = fnv1a_hex([&] {
    std::ostringstream buffer;
    write_episodes_csv(buffer, full);
    return buffer.str();
  }());
  if (!options.sweep_settings.empty())
    result.report.sensitivity = sensitivity_sweep(two_model, cfg, test, options.sweep_settings, two.d_rb_range,
                                                  derive_seed(run_seed, Stream::sensitivity), options.threads);
  const std::uint64_t k_seed = derive_seed(run_seed, Stream::best_of_k);
  result.mean_d_best_of_1 = mean_best_of_k(two_model, cfg, test, 1, k_seed, options.threads);
  result.mean_d_best_of_k = mean_best_of_k(two_model, cfg, test, options.best_k, k_seed, options.threads);
  prefixed(fmt::format("mean deltas: star-single {:.4f}, star-random {:.4f}, single-random {:.4f}; violations "
                       "{}/{}/{} of {}",
                       result.report.means.star_single, result.report.means.star_random,
                       result.report.means.single_random, result.report.violations.two_step,
                       result.report.violations.single_step, result.report.violations.randomized,
                       result.report.test_size()));
  return result;
}

MultirunSummary multirun(const Dataset& full, const PipelineOptions& options, int n_runs, std::uint64_t base_seed,
                         const StageLog& log) {
  if (n_runs < 1) throw ValidationError("multirun: n_runs must be >= 1");
  MultirunSummary summary;
  summary.runs.resize(static_cast<std::size_t>(n_runs));
  PipelineOptions per_run = options;
  per_run.threads = 1;
  const std::uint64_t runs_seed = derive_seed(base_seed, Stream::runs);
  parallel_for(static_cast<std::size_t>(n_runs), options.threads, [&](std::size_t i) {
    summary.runs[i] = run_pipeline(full, per_run, static_cast<int>(i), derive_seed(runs_seed, i), log);
  });
  std::vector<double> ss, sr_star, sr;
  for (const auto& run : summary.runs) {
    ss.push_back(run.report.means.star_single);
    sr_star.push_back(run.report.means.star_random);
    sr.push_back(run.report.means.single_random);
  }
  summary.star_single = box_summary(ss);
  summary.star_random = box_summary(sr_star);
  summary.single_random = box_summary(sr);
  return summary;
}

void write_multirun_csv(std::ostream& out, const MultirunSummary& summary) {
  out << "run_id,mean_delta_ss,mean_delta_sr_star,mean_delta_sr,violations_two_step,violations_single,"
         "violations_rand\n";
  for (const auto& run : summary.runs) {
    const auto& r = run.report;
    out << run.run_id << ',' << format_double(r.means.star_single) << ',' << format_double(r.means.star_random)
        << ',' << format_double(r.means.single_random) << ',' << r.violations.two_step << ','
        << r.violations.single_step << ',' << r.violations.randomized << '\n';
  }
}

std::string multirun_to_json(const MultirunSummary& summary) {
  auto box = [](const BoxSummary& b) {
    return nlohmann::ordered_json{{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
  };
  nlohmann::ordered_json j;
  j["box_delta_star_single"] = box(summary.star_single);
  j["box_delta_star_random"] = box(summary.star_random);
  j["box_delta_single_random"] = box(summary.single_random);
  auto runs = nlohmann::ordered_json::array();
  for (const auto& run : summary.runs) {
    auto sensitivity = nlohmann::ordered_json::array();
    for (const auto& h : run.report.sensitivity)
      sensitivity.push_back({{"s1", h.setting.s1}, {"s2", h.setting.s2}, {"mean_realized", h.mean_realized}});
    runs.push_back({{"run_id", run.run_id},
                    {"seed", run.seed},
                    {"test_size", run.report.test_size()},
                    {"mean_delta_star_single", run.report.means.star_single},
                    {"mean_delta_star_random", run.report.means.star_random},
                    {"mean_delta_single_random", run.report.means.single_random},
                    {"violations_two_step", run.report.violations.two_step},
                    {"violations_single", run.report.violations.single_step},
                    {"violations_rand", run.report.violations.randomized},
                    {"mean_d_best_of_1", run.mean_d_best_of_1},
                    {"mean_d_best_of_k", run.mean_d_best_of_k},
                    {"sensitivity", std::move(sensitivity)}});
  }
  j["runs"] = std::move(runs);
  return j.dump(2) + "\n";
}

}  // namespace pursuit
