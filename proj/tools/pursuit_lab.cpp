// pursuit_lab: data generation, training, evaluation and multi-seed runs for
// the two-stage pursuit-evasion decision models.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "pursuit/bundle.hpp"
#include "pursuit/config.hpp"
#include "pursuit/dataset.hpp"
#include "pursuit/errors.hpp"
#include "pursuit/eval.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/policy.hpp"
#include "pursuit/scorer.hpp"

namespace fs = std::filesystem;
using namespace pursuit;

namespace {

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
};

struct GanFlags {
  int epochs = TrainConfig{}.epochs;
  int batch = TrainConfig{}.batch_size;
  double lr = TrainConfig{}.generator_lr;

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.generator_lr = lr;
    cfg.discriminator_lr = lr;
    cfg.validate();
    return cfg;
  }
  void add_to(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Training epochs per generator")->check(CLI::PositiveNumber);
    cmd->add_option("--batch", batch, "Minibatch size")->check(CLI::PositiveNumber);
    cmd->add_option("--lr", lr, "Adam learning rate for both networks")->check(CLI::PositiveNumber);
  }
  void record(Manifest& m) const {
    m.parameters["epochs"] = std::to_string(epochs);
    m.parameters["batch"] = std::to_string(batch);
    m.parameters["lr"] = format_double(lr);
  }
};

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

GameConfig data_config(const fs::path& data) { return load_game_config(data / "config.txt"); }

void require_same_digest(const std::string& what, const std::string& expected, const std::string& actual) {
  if (expected != actual)
    throw ValidationError(fmt::format("{}: digest mismatch (bundle {}, data {})", what, expected, actual));
}

std::vector<ScoreSetting> parse_settings(const std::string& text) {
  std::vector<ScoreSetting> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("setting '" + item + "' is not s1:s2");
    try {
      out.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
    } catch (const std::invalid_argument&) {
      throw ConfigError("setting '" + item + "' is not numeric");
    }
  }
  if (out.empty()) throw ConfigError("no score settings given");
  return out;
}

std::string settings_text(const std::vector<ScoreSetting>& settings) {
  std::string out;
  for (const auto& s : settings) out += (out.empty() ? "" : ",") + format_double(s.s1) + ":" + format_double(s.s2);
  return out;
}

// Writes the dataset directory produced by gen-data.
void cmd_gen_data(const Common& c, const std::string& config_path, std::size_t n, double train_frac) {
  const GameConfig cfg = config_path.empty() ? GameConfig{} : load_game_config(config_path);
  cfg.validate();
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("--train-frac must lie in (0, 1)");
  const fs::path out(c.out);
  ensure_dir(out);

  const Dataset full = generate_dataset(cfg, n, c.seed, c.threads);
  const std::uint64_t split_seed = derive_seed(c.seed, Stream::split);
  const auto [train, test] = split(full, train_frac, split_seed);
  if (train.size() < 2 || test.size() == 0) throw ValidationError("split leaves too few rows; raise --n");

  write_text(out / "config.txt", game_config_text(cfg));
  save_episodes_csv(out / "episodes.csv", full);
  save_episodes_csv(out / "train.csv", train);
  save_episodes_csv(out / "test.csv", test);
  save_norm_stats(out / "normstats.json", fit_norm_stats(train, cfg));

  Manifest m;
  m.command = "gen-data";
  m.config_digest = config_digest(cfg);
  m.seeds = {{"master", c.seed}, {"split", split_seed}};
  m.parameters = {{"n", std::to_string(n)}, {"train_frac", format_double(train_frac)}};
  write_manifest(out, m, {"config.txt", "episodes.csv", "train.csv", "test.csv", "normstats.json"});
  std::cout << fmt::format("wrote {} episodes ({} train / {} test) to {}\n", full.size(), train.size(),
                           test.size(), out.string());
}

void cmd_train(const Common& c, const std::string& data_dir, const std::string& model, const GanFlags& gan,
               int n_mc, double query_score) {
  const fs::path data(data_dir);
  const ModelKind kind = model_kind_from_name(model);
  const GameConfig cfg = data_config(data);
  const Dataset train = load_episodes_csv(data / "train.csv", cfg);
  if (train.size() == 0) throw ValidationError("train.csv has no rows");
  const fs::path out(c.out);
  ensure_dir(out);

  std::ostringstream log;
  auto logger = [&](std::string_view line) {
    log << line << '\n';
    std::cerr << line << '\n';
  };

  ModelBundle bundle;
  bundle.kind = kind;
  Manifest m;
  m.command = "train";
  m.config_digest = config_digest(cfg);
  m.seeds = {{"master", c.seed}};
  m.parameters["model"] = model_kind_name(kind);
  gan.record(m);
  m.parents = {{"data/manifest.json", file_digest(data / kManifestName)},
               {"normstats.json", file_digest(data / "normstats.json")},
               {"train.csv", file_digest(data / "train.csv")}};
  std::vector<std::string> artifacts;

  if (kind == ModelKind::two_step) {
    if (n_mc < 1) throw ConfigError("--n-mc must be >= 1");
    auto trained = train_two_step(train, cfg, gan.config(), n_mc, query_score, c.seed, c.threads, logger);
    bundle.g1 = trained.g1;
    bundle.g2 = trained.g2;
    save_score_table_csv(out / "scores_alpha.csv", trained.s1_table);
    m.parameters["n_mc"] = std::to_string(n_mc);
    m.parameters["s1_query"] = format_double(query_score);
    m.parameters["s2_query"] = format_double(query_score);
    m.seeds["g2"] = derive_seed(c.seed, Stream::generator_g2);
    m.seeds["s1_scores"] = derive_seed(c.seed, Stream::s1_scores);
    m.seeds["g1"] = derive_seed(c.seed, Stream::generator_g1);
    artifacts = {"g1/weights.mlp", "g1/spec.txt", "g1/standardization.txt", "g2/weights.mlp", "g2/spec.txt",
                 "g2/standardization.txt", "scores_alpha.csv", "train.log"};
  } else {
    auto trained = train_single_step(train, cfg, gan.config(), c.seed, logger);
    bundle.single = trained.generator;
    m.parameters["query_score"] = format_double(query_score);
    m.seeds["single"] = derive_seed(c.seed, Stream::generator_single);
    artifacts = {"single/weights.mlp", "single/spec.txt", "single/standardization.txt", "train.log"};
  }
  save_model_generators(out, bundle);
  write_text(out / "train.log", log.str());
  write_manifest(out, m, artifacts);
}

ModelBundle load_checked(const fs::path& dir, ModelKind expected, const fs::path& data, const GameConfig& cfg) {
  ModelBundle b = load_model_bundle(dir);
  if (b.kind != expected)
    throw ValidationError(fmt::format("{} holds a {} model, expected {}", dir.string(), model_kind_name(b.kind),
                                      model_kind_name(expected)));
  auto parent = b.manifest.parents.find("normstats.json");
  if (parent == b.manifest.parents.end()) throw ValidationError(dir.string() + ": manifest lacks normstats digest");
  require_same_digest("normstats.json", parent->second, file_digest(data / "normstats.json"));
  require_same_digest("config", b.manifest.config_digest, config_digest(cfg));
  return b;
}

void cmd_eval(const Common& c, const std::string& data_dir, const std::string& two_dir, const std::string& single_dir,
              const std::vector<ScoreSetting>& settings, int k) {
  const fs::path data(data_dir);
  const GameConfig cfg = data_config(data);
  const ModelBundle two = load_checked(two_dir, ModelKind::two_step, data, cfg);
  const ModelBundle single = load_checked(single_dir, ModelKind::single_step, data, cfg);
  const Dataset train = load_episodes_csv(data / "train.csv", cfg);
  const Dataset test = load_episodes_csv(data / "test.csv", cfg);
  const NormStats stats = load_norm_stats(data / "normstats.json");
  const fs::path out(c.out);
  ensure_dir(out);

  const auto two_model = make_two_step_model(two.g1, two.g2, two.s1_query, two.s2_query);
  const auto single_model = make_single_step_model(single.single, single.s1_query);
  const auto randomized = fit_randomized(train);
  const std::uint64_t eval_seed = derive_seed(c.seed, Stream::evaluation);
  const std::uint64_t sweep_seed = derive_seed(c.seed, Stream::sensitivity);
  const std::uint64_t k_seed = derive_seed(c.seed, Stream::best_of_k);

  EvalReport report = evaluate(two_model, single_model, randomized, cfg, test, eval_seed, c.threads);
  report.dataset_digest = file_digest(data / "test.csv");
  report.sensitivity = sensitivity_sweep(two_model, cfg, test, settings, stats.range("d_rb"), sweep_seed, c.threads);
  const double best1 = mean_best_of_k(two_model, cfg, test, 1, k_seed, c.threads);
  const double bestk = mean_best_of_k(two_model, cfg, test, k, k_seed, c.threads);

  write_text(out / "report.json", report_to_json(report));
  {
    std::ofstream f(out / "deltas.csv", std::ios::binary);
    write_deltas_csv(f, report);
    if (!f) throw IoError("cannot write deltas.csv");
  }
  {
    std::ofstream f(out / "sensitivity.csv", std::ios::binary);
    write_sensitivity_csv(f, report.sensitivity);
    if (!f) throw IoError("cannot write sensitivity.csv");
  }
  write_text(out / "best_of_k.csv",
             fmt::format("k,mean_d_rb\n1,{}\n{},{}\n", format_double(best1), k, format_double(bestk)));

  Manifest m;
  m.command = "eval";
  m.config_digest = config_digest(cfg);
  m.seeds = {{"master", c.seed}, {"evaluation", eval_seed}, {"sensitivity", sweep_seed}, {"best_of_k", k_seed}};
  m.parameters = {{"settings", settings_text(settings)}, {"k", std::to_string(k)}};
  m.parents = {{"two_step/manifest.json", file_digest(fs::path(two_dir) / kManifestName)},
               {"single_step/manifest.json", file_digest(fs::path(single_dir) / kManifestName)},
               {"data/manifest.json", file_digest(data / kManifestName)},
               {"normstats.json", file_digest(data / "normstats.json")}};
  write_manifest(out, m, {"report.json", "deltas.csv", "sensitivity.csv", "best_of_k.csv"});
  std::cout << fmt::format(
      "mean deltas: star-single {:.4f}, star-random {:.4f}, single-random {:.4f}\n"
      "violations: two-step {}, single-step {}, randomized {} of {}\n"
      "mean d_rb: best-of-1 {:.4f}, best-of-{} {:.4f}\n",
      report.means.star_single, report.means.star_random, report.means.single_random, report.violations.two_step,
      report.violations.single_step, report.violations.randomized, report.test_size(), best1, k, bestk);
}

void cmd_sweep(const Common& c, const std::string& data_dir, const std::string& two_dir,
               const std::vector<ScoreSetting>& settings) {
  const fs::path data(data_dir);
  const GameConfig cfg = data_config(data);
  const ModelBundle two = load_checked(two_dir, ModelKind::two_step, data, cfg);
  const Dataset test = load_episodes_csv(data / "test.csv", cfg);
  const NormStats stats = load_norm_stats(data / "normstats.json");
  const fs::path out(c.out);
  ensure_dir(out);

  const auto model = make_two_step_model(two.g1, two.g2, two.s1_query, two.s2_query);
  const std::uint64_t sweep_seed = derive_seed(c.seed, Stream::sensitivity);
  const auto histograms = sensitivity_sweep(model, cfg, test, settings, stats.range("d_rb"), sweep_seed, c.threads);
  {
    std::ofstream f(out / "sensitivity.csv", std::ios::binary);
    write_sensitivity_csv(f, histograms);
    if (!f) throw IoError("cannot write sensitivity.csv");
  }
  Manifest m;
  m.command = "sweep";
  m.config_digest = config_digest(cfg);
  m.seeds = {{"master", c.seed}, {"sensitivity", sweep_seed}};
  m.parameters = {{"settings", settings_text(settings)}};
  m.parents = {{"two_step/manifest.json", file_digest(fs::path(two_dir) / kManifestName)},
               {"data/manifest.json", file_digest(data / kManifestName)},
               {"normstats.json", file_digest(data / "normstats.json")}};
  write_manifest(out, m, {"sensitivity.csv"});
  for (const auto& h : histograms)
    std::cout << fmt::format("s1={} s2={}: mean realized score {:.4f}\n", h.setting.s1, h.setting.s2,
                             h.mean_realized);
}

void cmd_multirun(const Common& c, const std::string& config_path, const std::string& data_dir, std::size_t n,
                  double train_frac, int n_runs, const GanFlags& gan, int n_mc, int k,
                  const std::vector<ScoreSetting>& settings) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw ConfigError("--train-frac must lie in (0, 1)");
  if (n_runs < 1) throw ConfigError("--n-runs must be >= 1");
  if (n_mc < 1) throw ConfigError("--n-mc must be >= 1");
  Manifest m;
  m.command = "multirun";
  PipelineOptions options;
  Dataset full;
  if (!data_dir.empty()) {
    const fs::path data(data_dir);
    options.game = data_config(data);
    full = load_episodes_csv(data / "episodes.csv", options.game);
    m.parents = {{"data/manifest.json", file_digest(data / kManifestName)},
                 {"episodes.csv", file_digest(data / "episodes.csv")}};
  } else {
    options.game = config_path.empty() ? GameConfig{} : load_game_config(config_path);
    options.game.validate();
    full = generate_dataset(options.game, n, c.seed, c.threads);
    m.parameters["n"] = std::to_string(n);
  }
  options.gan = gan.config();
  options.train_frac = train_frac;
  options.n_mc = n_mc;
  options.best_k = k;
  options.sweep_settings = settings;
  options.threads = c.threads;
  const fs::path out(c.out);
  ensure_dir(out);

  std::ostringstream log;
  std::mutex log_mutex;
  auto logger = [&](std::string_view line) {
    std::lock_guard lock(log_mutex);
    std::cerr << line << '\n';
  };
  const MultirunSummary summary = multirun(full, options, n_runs, c.seed, logger);
  for (const auto& run : summary.runs)
    log << fmt::format("run {} seed {}: deltas {} {} {}; violations {} {} {} of {}; best-of-1 {} best-of-{} {}\n",
                       run.run_id, run.seed, format_double(run.report.means.star_single),
                       format_double(run.report.means.star_random), format_double(run.report.means.single_random),
                       run.report.violations.two_step, run.report.violations.single_step,
                       run.report.violations.randomized, run.report.test_size(), format_double(run.mean_d_best_of_1),
                       k, format_double(run.mean_d_best_of_k));
  {
    std::ofstream f(out / "multirun.csv", std::ios::binary);
    write_multirun_csv(f, summary);
    if (!f) throw IoError("cannot write multirun.csv");
  }
  write_text(out / "multirun.json", multirun_to_json(summary));
  write_text(out / "multirun.log", log.str());

  m.config_digest = config_digest(options.game);
  m.seeds["master"] = c.seed;
  m.seeds["runs"] = derive_seed(c.seed, Stream::runs);
  gan.record(m);
  m.parameters["n_runs"] = std::to_string(n_runs);
  m.parameters["train_frac"] = format_double(train_frac);
  m.parameters["n_mc"] = std::to_string(n_mc);
  m.parameters["k"] = std::to_string(k);
  m.parameters["settings"] = settings_text(settings);
  write_manifest(out, m, {"multirun.csv", "multirun.json", "multirun.log"});
  std::cout << log.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage pursuit-evasion decision models: data, training, evaluation"};
  app.require_subcommand(1);

  Common common;
  GanFlags gan;
  std::string config_path, data_dir, model = "two-step", two_dir, single_dir;
  std::string settings_arg = settings_text(default_sweep_settings());
  std::size_t n = 15000;
  std::size_t multirun_n = 3750;
  double train_frac = 0.8;
  int n_mc = 30;
  int k = 30;
  int n_runs = 5;
  double query_score = kHighQueryScore;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", common.seed, "Master seed; every internal stream derives from it");
    cmd->add_option("--threads", common.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", common.out, "Output directory")->required();
  };

  auto* gen = app.add_subcommand("gen-data", "Simulate scripted episodes and write the dataset directory");
  add_common(gen);
  gen->add_option("--config", config_path, "Game config file (key = value)");
  gen->add_option("--n", n, "Number of episodes")->check(CLI::PositiveNumber);
  gen->add_option("--train-frac", train_frac, "Training fraction of the split");

  auto* train = app.add_subcommand("train", "Train a two-step or single-step model");
  add_common(train);
  train->add_option("--data", data_dir, "Dataset directory from gen-data")->required();
  train->add_option("--model", model, "two-step or single-step");
  train->add_option("--n-mc", n_mc, "Monte-Carlo replays per row for stage-1 scores");
  train->add_option("--query-score", query_score, "Query score stored in the bundle");
  gan.add_to(train);

  auto* eval = app.add_subcommand("eval", "Compare two-step, single-step and randomized models on the test split");
  add_common(eval);
  eval->add_option("--data", data_dir, "Dataset directory from gen-data")->required();
  eval->add_option("--two-step", two_dir, "Two-step model bundle")->required();
  eval->add_option("--single-step", single_dir, "Single-step model bundle")->required();
  eval->add_option("--settings", settings_arg, "Sensitivity settings s1:s2,s1:s2,...");
  eval->add_option("--k", k, "Best-of-k query count")->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Realized-score histograms for several query-score settings");
  add_common(sweep);
  sweep->add_option("--data", data_dir, "Dataset directory from gen-data")->required();
  sweep->add_option("--two-step", two_dir, "Two-step model bundle")->required();
  sweep->add_option("--settings", settings_arg, "Settings s1:s2,s1:s2,...");

  auto* multi = app.add_subcommand("multirun", "Repeat split, train and evaluate over derived seeds");
  add_common(multi);
  multi->add_option("--config", config_path, "Game config file (ignored with --data)");
  multi->add_option("--data", data_dir, "Use episodes.csv from this dataset directory");
  multi->add_option("--n", multirun_n, "Episodes to simulate when --data is absent")->check(CLI::PositiveNumber);
  multi->add_option("--train-frac", train_frac, "Training fraction of each split");
  multi->add_option("--n-runs", n_runs, "Number of independent runs");
  multi->add_option("--n-mc", n_mc, "Monte-Carlo replays per row for stage-1 scores");
  multi->add_option("--k", k, "Best-of-k query count")->check(CLI::PositiveNumber);
  multi->add_option("--settings", settings_arg, "Sensitivity settings s1:s2,s1:s2,...");
  gan.add_to(multi);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) cmd_gen_data(common, config_path, n, train_frac);
    if (*train) cmd_train(common, data_dir, model, gan, n_mc, query_score);
    if (*eval) cmd_eval(common, data_dir, two_dir, single_dir, parse_settings(settings_arg), k);
    if (*sweep) cmd_sweep(common, data_dir, two_dir, parse_settings(settings_arg));
    if (*multi)
      cmd_multirun(common, config_path, data_dir, multirun_n, train_frac, n_runs, gan, n_mc, k,
                   parse_settings(settings_arg));
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << '\n';
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
