// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/core.h>

#include "pursuit/cgan.hpp"
#include "pursuit/dataset.hpp"
#include "pursuit/game.hpp"
#include "pursuit/neural.hpp"
#include "pursuit/pipeline.hpp"

using namespace pursuit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Verdict()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = budget_s <= 0.0 || elapsed < budget_s;
  const bool pass = v.pass && in_time;
  if (!pass) ++failures;
  std::cout << fmt::format("criterion {} {}: {} ({}; {:.1f} s{})", id, name, pass ? "PASS" : "FAIL", v.detail,
                           elapsed, in_time ? "" : fmt::format(", over the {:.0f} s budget", budget_s))
            << std::endl;
}

Verdict simulator_fidelity() {
  const GameConfig cfg;
  Rng rng(20240601);
  double worst_circle = 0.0, worst_gap = -1e300;
  for (int i = 0; i < 100000; ++i) {
    const EpisodeRecord e = simulate_episode(cfg, rng);
    const Point2 blue_mid = position_after(cfg.blue_start, e.b1, cfg.half());
    const RedResponse resp = red_stage2(cfg, e.r1, blue_mid);
    const SafetyCircle c = safety_circle(cfg, e.r1);
    worst_circle = std::max(worst_circle, std::abs((resp.destination - c.center).norm() - c.radius));
    const double chosen = (resp.destination - blue_mid).norm();
    double best = 0.0;
    for (int k = 0; k < 3600; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 3600.0;
      best = std::max(best, (c.center + c.radius * Point2(std::cos(phi), std::sin(phi)) - blue_mid).norm());
    }
    worst_gap = std::max(worst_gap, best - chosen);
  }
  return {worst_circle < 1e-9 && worst_gap < 1e-6,
          fmt::format("max circle error {:.2e}, max brute-force gain {:.2e}", worst_circle, worst_gap)};
}

Verdict success_rate() {
  const GameConfig cfg;
  const Dataset ds = generate_dataset(cfg, 15000, 1);
  const auto hits = std::count_if(ds.rows.begin(), ds.rows.end(), [&](const auto& r) { return r.d_rb < 1e-6; });
  const double frac = static_cast<double>(hits) / static_cast<double>(ds.size());
  return {frac >= 0.80 && frac <= 0.95, fmt::format("{} of 15000 intercepted, fraction {:.4f}", hits, frac)};
}

Verdict gradient_correctness() {
  std::vector<MlpSpec> specs{{{5, 96, 64, 2}, Activation::relu, Activation::identity},
                             {{5, 64, 32, 1}, Activation::leaky_relu, Activation::logistic}};
  Rng rng(77);
  const Activation hidden[] = {Activation::relu, Activation::leaky_relu, Activation::logistic};
  const Activation output[] = {Activation::identity, Activation::logistic};
  while (specs.size() < 20) {
    MlpSpec s;
    const int depth = 2 + static_cast<int>(rng() % 3);
    for (int l = 0; l <= depth; ++l) s.layer_sizes.push_back(1 + static_cast<int>(rng() % 16));
    s.hidden = hidden[rng() % 3];
    s.output = output[rng() % 2];
    specs.push_back(s);
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < specs.size(); ++i) worst = std::max(worst, grad_check(specs[i], 1000 + i));
  return {worst < 1e-4, fmt::format("20 networks, max relative error {:.2e}", worst)};
}

Verdict gan_smoke() {
  auto pairs = [](Eigen::Index n, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ConditionalSamples s{Eigen::MatrixXd(2, n), Eigen::VectorXd(n), Eigen::MatrixXd(2, n)};
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < 2; ++k) s.conditions(k, i) = standard_normal(rng);
      s.scores(i) = u(rng);
      for (int k = 0; k < 2; ++k) s.actions(k, i) = 2.0 * s.conditions(k, i) + 0.05 * standard_normal(rng);
    }
    return s;
  };
  TrainConfig cfg;
  cfg.seed = 2024;
  const Generator g = train_conditional_gan(pairs(4000, 2024), GanSpec{}, cfg);
  Rng rng(2025);
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < 100; ++c) {
    Eigen::VectorXd cond(2);
    cond << std::clamp(1.5 * standard_normal(rng), -2.5, 2.5), std::clamp(1.5 * standard_normal(rng), -2.5, 2.5);
    const Eigen::MatrixXd actions =
        sample_generator_batch(g, cond.replicate(1, 400), Eigen::VectorXd::Constant(400, 0.5), rng);
    total += (actions.rowwise().mean() - 2.0 * cond).cwiseAbs().sum();
    count += 2;
  }
  const double mae = total / count;
  return {mae < 0.1, fmt::format("held-out conditional mean absolute error {:.4f}", mae)};
}

// Criteria 5 to 8 share one desk-scale multirun.
MultirunSummary desk_scale;

Verdict end_to_end() {
  const GameConfig game;
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const Dataset full = generate_dataset(game, 3750, 11, cores);
  PipelineOptions options;
  options.game = game;
  options.threads = cores;
  desk_scale = multirun(full, options, 5, 11);
  int negative = 0;
  std::string values;
  for (const auto& run : desk_scale.runs) {
    const auto& m = run.report.means;
    if (m.star_single < 0 && m.star_random < 0 && m.single_random < 0) ++negative;
    values += fmt::format(" [{:.2f} {:.2f} {:.2f}]", m.star_single, m.star_random, m.single_random);
  }
  const std::size_t test = desk_scale.runs.empty() ? 0 : desk_scale.runs[0].report.test_size();
  return {negative == 5 && test == 750,
          fmt::format("{} of 5 runs all-negative, test size {}, mean deltas ss/sr*/sr:{}", negative, test, values)};
}

Verdict violation_rate() {
  int ok = 0;
  std::string values;
  for (const auto& run : desk_scale.runs) {
    const double frac = static_cast<double>(run.report.violations.two_step) / run.report.test_size();
    if (frac < 0.15) ++ok;
    values += fmt::format(" {:.3f}", frac);
  }
  return {desk_scale.runs.size() == 5 && ok >= 4, fmt::format("{} of 5 runs below 0.15; fractions{}", ok, values)};
}

Verdict score_sensitivity() {
  int ok = 0;
  std::string values;
  for (const auto& run : desk_scale.runs) {
    const auto& s = run.report.sensitivity;
    if (s.size() == 3 && s[0].mean_realized > s[1].mean_realized && s[1].mean_realized > s[2].mean_realized) ++ok;
    values += " [";
    for (const auto& h : s) values += fmt::format(" {:.3f}", h.mean_realized);
    values += " ]";
  }
  return {desk_scale.runs.size() == 5 && ok >= 4,
          fmt::format("{} of 5 runs ordered high > mid > low; mean realized{}", ok, values)};
}

Verdict best_of_k_dominance() {
  int ok = 0;
  std::string values;
  for (const auto& run : desk_scale.runs) {
    if (run.mean_d_best_of_k <= run.mean_d_best_of_1) ++ok;
    values += fmt::format(" [{:.3f} {:.3f}]", run.mean_d_best_of_1, run.mean_d_best_of_k);
  }
  return {desk_scale.runs.size() == 5 && ok == 5,
          fmt::format("{} of 5 runs with k=30 <= k=1; mean d_rb k=1/k=30{}", ok, values)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int lab(const std::string& args) {
  const std::string cmd = std::string(PURSUIT_LAB_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Compares every file under two output directories byte for byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++count_b;
  if (files.empty() || count_b != files.size()) {
    why = a.filename().string() + ": file sets differ";
    return false;
  }
  for (const auto& f : files)
    if (slurp(a / f) != slurp(b / f)) {
      why = (a.filename() / f).string() + " differs";
      return false;
    }
  return true;
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "pursuit_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  auto out = [&](const std::string& name, int rep) { return (root / fmt::format("{}_{}", name, rep)).string(); };
  const std::string gan = " --epochs 5 --batch 64 --threads 1";
  std::vector<std::string> names;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string data = out("data", 0);
    const std::vector<std::pair<std::string, std::string>> commands{
        {"data", "gen-data --n 600 --seed 4 --threads 1"},
        {"two", "train --data " + data + " --model two-step --n-mc 3 --seed 5" + gan},
        {"one", "train --data " + data + " --model single-step --seed 6" + gan},
        {"eval", "eval --data " + data + " --two-step " + out("two", 0) + " --single-step " + out("one", 0) +
                     " --k 5 --seed 7 --threads 1"},
        {"sweep", "sweep --data " + data + " --two-step " + out("two", 0) + " --seed 8 --threads 1"},
        {"multi", "multirun --n 500 --n-runs 2 --n-mc 2 --k 3 --seed 9" + gan}};
    names.clear();
    for (const auto& [name, args] : commands) {
      names.push_back(name);
      if (const int code = lab(args + " --out " + out(name, rep)); code != 0)
        return {false, fmt::format("{} exited with {}", name, code)};
    }
  }
  for (const auto& name : names) {
    std::string why;
    if (!same_tree(out(name, 0), out(name, 1), why)) return {false, why};
  }
  return {true, "gen-data, train (two-step, single-step), eval, sweep, multirun: byte-identical reruns"};
}

}  // namespace

int main() {
  report(1, "simulator fidelity", 30, simulator_fidelity);
  report(2, "success rate", 60, success_rate);
  report(3, "gradient correctness", 30, gradient_correctness);
  report(4, "GAN smoke", 120, gan_smoke);
  report(5, "end-to-end direction", 1800, end_to_end);
  report(6, "violation rate", 0, violation_rate);
  report(7, "score sensitivity", 0, score_sensitivity);
  report(8, "best-of-k dominance", 0, best_of_k_dominance);
  report(9, "determinism", 0, determinism);
  std::cout << (failures == 0 ? "all criteria PASS" : fmt::format("{} criteria FAIL", failures)) << std::endl;
  return failures == 0 ? 0 : 1;
}
