#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "pursuit/dataset.hpp"
#include "pursuit/game.hpp"
#include "pursuit/neural.hpp"
#include "pursuit/random.hpp"

namespace pursuit {

/// Widths of a conditional GAN. The generator sees (condition, score, noise)
/// and emits an action; the discriminator sees (condition, score, action).
struct GanSpec {
  int condition_dim = 2;
  int noise_dim = 2;
  int action_dim = 2;
  std::vector<int> generator_hidden{96, 64};
  std::vector<int> discriminator_hidden{64, 32};

  int generator_input_width() const { return condition_dim + 1 + noise_dim; }
  int discriminator_input_width() const { return condition_dim + 1 + action_dim; }

  MlpSpec generator_mlp() const;
  MlpSpec discriminator_mlp() const;
  void validate() const;
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 128;
  double generator_lr = 2e-4;
  double discriminator_lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int discriminator_steps = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Training pairs in columnar form: column i of `conditions` and `actions`
/// together with scores(i) is one (condition, score, action) triple.
struct ConditionalSamples {
  Eigen::MatrixXd conditions;
  Eigen::VectorXd scores;
  Eigen::MatrixXd actions;

  Eigen::Index size() const { return scores.size(); }
  /// Throws ValidationError on empty data, ragged shapes, non-finite
  /// features or scores outside [0, 1].
  void validate() const;
};

/// Per-row affine map to zero mean and unit variance. Rows with zero spread
/// keep unit scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& columns);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& columns) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& columns) const;
};

/// A trained conditional generator with its frozen standardization.
struct Generator {
  GanSpec spec;
  MlpParams<double> net;
  Standardizer conditions;
  Standardizer actions;
};

/// One action in original units. Noise is standard Normal.
Eigen::VectorXd sample_generator(const Generator& g, const Eigen::VectorXd& condition, double score,
                                 Rng& rng);

/// Column-wise batch version; draws noise column by column in order.
Eigen::MatrixXd sample_generator_batch(const Generator& g, const Eigen::MatrixXd& conditions,
                                       const Eigen::VectorXd& scores, Rng& rng);

struct EpochStats {
  int epoch = 0;
  double discriminator_loss = 0.0;
  double generator_loss = 0.0;
};

/// Adversarial training state: minimax discriminator loss, non-saturating
/// generator loss, probabilities clamped to [1e-7, 1 - 1e-7] inside the
/// reported losses. Single-threaded and bitwise reproducible for a seed.
class ConditionalGanTrainer {
 public:
  ConditionalGanTrainer(const GanSpec& spec, const TrainConfig& cfg, const ConditionalSamples& data);

  void run_epoch();
  void train();

  /// One discriminator update from already-assembled, standardized
  /// discriminator inputs (one sample per column). Returns the loss.
  double discriminator_step(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake);
  /// One generator update for standardized conditions. Returns the loss.
  double generator_step(const Eigen::MatrixXd& conditions, const Eigen::VectorXd& scores);

  /// Discriminator probabilities for standardized discriminator inputs.
  Eigen::VectorXd discriminate(const Eigen::MatrixXd& inputs) const;

  Generator generator() const;
  const std::vector<EpochStats>& history() const { return history_; }
  const Standardizer& condition_scaler() const { return condition_scaler_; }
  const Standardizer& action_scaler() const { return action_scaler_; }

 private:
  Eigen::MatrixXd generator_input(const Eigen::MatrixXd& conditions, const Eigen::VectorXd& scores);
  Eigen::MatrixXd discriminator_input(const Eigen::MatrixXd& conditions, const Eigen::VectorXd& scores,
                                      const Eigen::MatrixXd& actions) const;

  GanSpec spec_;
  TrainConfig cfg_;
  Standardizer condition_scaler_;
  Standardizer action_scaler_;
  Eigen::MatrixXd conditions_;  // standardized
  Eigen::VectorXd scores_;
  Eigen::MatrixXd actions_;  // standardized
  MlpParams<double> gen_;
  MlpParams<double> disc_;
  OptimizerState<double> gen_opt_;
  OptimizerState<double> disc_opt_;
  Rng rng_;
  int epoch_ = 0;
  std::vector<EpochStats> history_;
};

Generator train_conditional_gan(const ConditionalSamples& pairs, const GanSpec& spec, const TrainConfig& cfg);

/// condition (v1_r, theta1_r), score s1, action (v1_b, theta1_b).
ConditionalSamples make_g1_pairs(const Dataset& train);
/// condition (v1_r, theta1_r, v2_r, theta2_r, v_cap_rem), score s2,
/// action (v2_b, theta2_b).
ConditionalSamples make_g2_pairs(const Dataset& train);
/// Single-line benchmark: condition (v1_r, theta1_r), action the scripted
/// stage-1 action, score 1 - eta(d_single) where d_single is the distance
/// reached by holding that action for both stages.
ConditionalSamples make_single_step_pairs(const Dataset& train, const GameConfig& cfg,
                                          const MinMax& d_single_range);

/// Stage policy interface shared by trained generators and test stubs.
using ActionSampler = std::function<PolarAction(const Eigen::VectorXd& condition, double score, Rng& rng)>;

/// Wraps a 2-D (speed, heading) generator as an ActionSampler.
ActionSampler as_sampler(std::shared_ptr<const Generator> g);

}  // namespace pursuit
