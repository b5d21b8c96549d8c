#include "pursuit/cgan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "pursuit/errors.hpp"

namespace pursuit {

namespace {

constexpr double kProbabilityClamp = 1e-7;

double clamped_log(double p) { return std::log(std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp)); }

}  // namespace

MlpSpec GanSpec::generator_mlp() const {
  MlpSpec s;
  s.layer_sizes.push_back(generator_input_width());
  s.layer_sizes.insert(s.layer_sizes.end(), generator_hidden.begin(), generator_hidden.end());
  s.layer_sizes.push_back(action_dim);
  s.hidden = Activation::relu;
  s.output = Activation::identity;
  return s;
}

MlpSpec GanSpec::discriminator_mlp() const {
  MlpSpec s;
  s.layer_sizes.push_back(discriminator_input_width());
  s.layer_sizes.insert(s.layer_sizes.end(), discriminator_hidden.begin(), discriminator_hidden.end());
  s.layer_sizes.push_back(1);
  s.hidden = Activation::leaky_relu;
  s.output = Activation::logistic;
  return s;
}

void GanSpec::validate() const {
  if (condition_dim < 1 || noise_dim < 1 || action_dim < 1)
    throw ValidationError("GanSpec dimensions must be >= 1");
  for (int w : generator_hidden)
    if (w < 1) throw ValidationError("GanSpec generator widths must be >= 1");
  for (int w : discriminator_hidden)
    if (w < 1) throw ValidationError("GanSpec discriminator widths must be >= 1");
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || discriminator_steps < 1)
    throw ValidationError("TrainConfig counts must be positive");
  if (!(generator_lr > 0.0) || !(discriminator_lr > 0.0) || !(epsilon > 0.0))
    throw ValidationError("TrainConfig rates must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw ValidationError("TrainConfig decay rates must lie in (0, 1)");
}

void ConditionalSamples::validate() const {
  if (scores.size() == 0) throw ValidationError("conditional GAN: empty training data");
  if (conditions.cols() != scores.size() || actions.cols() != scores.size())
    throw ValidationError("conditional GAN: conditions, scores and actions differ in length");
  if (!conditions.allFinite() || !actions.allFinite() || !scores.allFinite())
    throw ValidationError("conditional GAN: non-finite features");
  if ((scores.array() < 0.0).any() || (scores.array() > 1.0).any())
    throw ValidationError("conditional GAN: scores must lie in [0, 1]");
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& columns) {
  Standardizer s;
  const double n = static_cast<double>(columns.cols());
  s.mean = columns.rowwise().sum() / n;
  const Eigen::MatrixXd centered = columns.colwise() - s.mean;
  s.scale = (centered.cwiseAbs2().rowwise().sum() / n).cwiseSqrt();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i)
    if (!(s.scale(i) > 1e-12)) s.scale(i) = 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& columns) const {
  return (columns.colwise() - mean).array().colwise() / scale.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& columns) const {
  Eigen::MatrixXd out = columns.array().colwise() * scale.array();
  out.colwise() += mean;
  return out;
}

Eigen::MatrixXd sample_generator_batch(const Generator& g, const Eigen::MatrixXd& conditions,
                                       const Eigen::VectorXd& scores, Rng& rng) {
  if (conditions.rows() != g.spec.condition_dim)
    throw ValidationError(fmt::format("generator expects condition width {}, got {}", g.spec.condition_dim,
                                      conditions.rows()));
  if (conditions.cols() != scores.size()) throw ValidationError("generator: conditions and scores differ in length");
  const Eigen::Index n = conditions.cols();
  Eigen::MatrixXd input(g.spec.generator_input_width(), n);
  input.topRows(g.spec.condition_dim) = g.conditions.apply(conditions);
  input.row(g.spec.condition_dim) = scores.transpose();
  for (Eigen::Index j = 0; j < n; ++j)
    for (int k = 0; k < g.spec.noise_dim; ++k) input(g.spec.condition_dim + 1 + k, j) = standard_normal(rng);
  return g.actions.invert(forward(g.net, input));
}

Eigen::VectorXd sample_generator(const Generator& g, const Eigen::VectorXd& condition, double score, Rng& rng) {
  Eigen::VectorXd scores(1);
  scores(0) = score;
  return sample_generator_batch(g, condition, scores, rng).col(0);
}

ConditionalGanTrainer::ConditionalGanTrainer(const GanSpec& spec, const TrainConfig& cfg,
                                             const ConditionalSamples& data)
    : spec_(spec), cfg_(cfg), rng_(cfg.seed) {
  spec_.validate();
  cfg_.validate();
  data.validate();
  if (data.conditions.rows() != spec_.condition_dim || data.actions.rows() != spec_.action_dim)
    throw ValidationError(fmt::format("training data widths ({}, {}) do not match GanSpec ({}, {})",
                                      data.conditions.rows(), data.actions.rows(), spec_.condition_dim,
                                      spec_.action_dim));
  if (data.size() < 2 * cfg_.batch_size)
    throw ValidationError(fmt::format("conditional GAN needs at least {} pairs, got {}", 2 * cfg_.batch_size,
                                      data.size()));
  condition_scaler_ = Standardizer::fit(data.conditions);
  action_scaler_ = Standardizer::fit(data.actions);
  conditions_ = condition_scaler_.apply(data.conditions);
  scores_ = data.scores;
  actions_ = action_scaler_.apply(data.actions);
  gen_ = make_mlp<double>(spec_.generator_mlp(), rng_);
  disc_ = make_mlp<double>(spec_.discriminator_mlp(), rng_);
  if (gen_.spec.input_width() != spec_.condition_dim + spec_.noise_dim + 1 ||
      disc_.spec.input_width() != spec_.condition_dim + spec_.action_dim + 1)
    throw ValidationError("conditional GAN wiring mismatch");
  gen_opt_ = OptimizerState<double>::fresh(gen_, cfg_.generator_lr, cfg_.beta1, cfg_.beta2, cfg_.epsilon);
  disc_opt_ = OptimizerState<double>::fresh(disc_, cfg_.discriminator_lr, cfg_.beta1, cfg_.beta2, cfg_.epsilon);
}

Eigen::MatrixXd ConditionalGanTrainer::generator_input(const Eigen::MatrixXd& conditions,
                                                       const Eigen::VectorXd& scores) {
  Eigen::MatrixXd input(spec_.generator_input_width(), conditions.cols());
  input.topRows(spec_.condition_dim) = conditions;
  input.row(spec_.condition_dim) = scores.transpose();
  for (Eigen::Index j = 0; j < input.cols(); ++j)
    for (int k = 0; k < spec_.noise_dim; ++k) input(spec_.condition_dim + 1 + k, j) = standard_normal(rng_);
  return input;
}

Eigen::MatrixXd ConditionalGanTrainer::discriminator_input(const Eigen::MatrixXd& conditions,
                                                           const Eigen::VectorXd& scores,
                                                           const Eigen::MatrixXd& actions) const {
  Eigen::MatrixXd input(spec_.discriminator_input_width(), conditions.cols());
  input.topRows(spec_.condition_dim) = conditions;
  input.row(spec_.condition_dim) = scores.transpose();
  input.bottomRows(spec_.action_dim) = actions;
  return input;
}

Eigen::VectorXd ConditionalGanTrainer::discriminate(const Eigen::MatrixXd& inputs) const {
  return forward(disc_, inputs).row(0).transpose();
}

double ConditionalGanTrainer::discriminator_step(const Eigen::MatrixXd& real, const Eigen::MatrixXd& fake) {
  const auto real_tape = forward_tape(disc_, real);
  const auto fake_tape = forward_tape(disc_, fake);
  const Eigen::RowVectorXd p_real = real_tape.output().row(0);
  const Eigen::RowVectorXd p_fake = fake_tape.output().row(0);
  const double n_real = static_cast<double>(real.cols());
  const double n_fake = static_cast<double>(fake.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < p_real.size(); ++j) loss -= clamped_log(p_real(j)) / n_real;
  for (Eigen::Index j = 0; j < p_fake.size(); ++j) loss -= clamped_log(1.0 - p_fake(j)) / n_fake;

  // d(-log p)/dlogit = p - 1, d(-log(1 - p))/dlogit = p.
  const Eigen::MatrixXd grad_real = (p_real.array() - 1.0).matrix() / n_real;
  const Eigen::MatrixXd grad_fake = p_fake / n_fake;
  auto grads = backward(disc_, real_tape, grad_real, GradientAt::pre_activation).params;
  const auto fake_grads = backward(disc_, fake_tape, grad_fake, GradientAt::pre_activation).params;
  for (std::size_t l = 0; l < grads.weights.size(); ++l) {
    grads.weights[l] += fake_grads.weights[l];
    grads.biases[l] += fake_grads.biases[l];
  }
  adam_step(disc_, grads, disc_opt_);
  if (!std::isfinite(loss)) throw std::runtime_error("conditional GAN: non-finite discriminator loss");
  return loss;
}

double ConditionalGanTrainer::generator_step(const Eigen::MatrixXd& conditions, const Eigen::VectorXd& scores) {
  const auto gen_tape = forward_tape(gen_, generator_input(conditions, scores));
  const auto disc_tape = forward_tape(disc_, discriminator_input(conditions, scores, gen_tape.output()));
  const Eigen::RowVectorXd p_fake = disc_tape.output().row(0);
  const double n = static_cast<double>(conditions.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < p_fake.size(); ++j) loss -= clamped_log(p_fake(j)) / n;

  const Eigen::MatrixXd grad_logit = (p_fake.array() - 1.0).matrix() / n;
  const auto disc_grads = backward(disc_, disc_tape, grad_logit, GradientAt::pre_activation);
  const Eigen::MatrixXd grad_action = disc_grads.input.bottomRows(spec_.action_dim);
  const auto gen_grads = backward(gen_, gen_tape, grad_action);
  adam_step(gen_, gen_grads.params, gen_opt_);
  if (!std::isfinite(loss)) throw std::runtime_error("conditional GAN: non-finite generator loss");
  return loss;
}

void ConditionalGanTrainer::run_epoch() {
  const Eigen::Index n = scores_.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng_);
  const Eigen::Index batch = cfg_.batch_size;
  const Eigen::Index batches = n / batch;

  Eigen::MatrixXd cond(spec_.condition_dim, batch);
  Eigen::VectorXd score(batch);
  Eigen::MatrixXd action(spec_.action_dim, batch);
  double d_total = 0.0, g_total = 0.0;
  for (Eigen::Index b = 0; b < batches; ++b) {
    for (Eigen::Index j = 0; j < batch; ++j) {
      const Eigen::Index i = order[static_cast<std::size_t>(b * batch + j)];
      cond.col(j) = conditions_.col(i);
      score(j) = scores_(i);
      action.col(j) = actions_.col(i);
    }
    for (int k = 0; k < cfg_.discriminator_steps; ++k) {
      const Eigen::MatrixXd fake_actions = forward(gen_, generator_input(cond, score));
      d_total += discriminator_step(discriminator_input(cond, score, action),
                                    discriminator_input(cond, score, fake_actions)) /
                 cfg_.discriminator_steps;
    }
    g_total += generator_step(cond, score);
  }
  ++epoch_;
  history_.push_back({epoch_, d_total / static_cast<double>(batches), g_total / static_cast<double>(batches)});
}

void ConditionalGanTrainer::train() {
  while (epoch_ < cfg_.epochs) run_epoch();
}

Generator ConditionalGanTrainer::generator() const {
  return {spec_, gen_, condition_scaler_, action_scaler_};
}

Generator train_conditional_gan(const ConditionalSamples& pairs, const GanSpec& spec, const TrainConfig& cfg) {
  ConditionalGanTrainer trainer(spec, cfg, pairs);
  trainer.train();
  return trainer.generator();
}

ConditionalSamples make_g1_pairs(const Dataset& train) {
  if (!train.s1) throw ValidationError("make_g1_pairs: s1 scores are not attached");
  const auto n = static_cast<Eigen::Index>(train.size());
  ConditionalSamples out{Eigen::MatrixXd(2, n), Eigen::VectorXd(n), Eigen::MatrixXd(2, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = train.rows[static_cast<std::size_t>(i)];
    out.conditions.col(i) << r.r1.speed, r.r1.heading;
    out.scores(i) = (*train.s1)[static_cast<std::size_t>(i)];
    out.actions.col(i) << r.b1.speed, r.b1.heading;
  }
  return out;
}

ConditionalSamples make_g2_pairs(const Dataset& train) {
  if (!train.s2) throw ValidationError("make_g2_pairs: s2 scores are not attached");
  const auto n = static_cast<Eigen::Index>(train.size());
  ConditionalSamples out{Eigen::MatrixXd(5, n), Eigen::VectorXd(n), Eigen::MatrixXd(2, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = train.rows[static_cast<std::size_t>(i)];
    out.conditions.col(i) << r.r1.speed, r.r1.heading, r.r2.speed, r.r2.heading, r.v_cap_rem;
    out.scores(i) = (*train.s2)[static_cast<std::size_t>(i)];
    out.actions.col(i) << r.b2.speed, r.b2.heading;
  }
  return out;
}

ConditionalSamples make_single_step_pairs(const Dataset& train, const GameConfig& cfg,
                                          const MinMax& d_single_range) {
  const auto n = static_cast<Eigen::Index>(train.size());
  ConditionalSamples out{Eigen::MatrixXd(2, n), Eigen::VectorXd(n), Eigen::MatrixXd(2, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = train.rows[static_cast<std::size_t>(i)];
    const PolarAction action = scripted_blue_stage1(cfg, r.r1);
    out.conditions.col(i) << r.r1.speed, r.r1.heading;
    out.scores(i) = 1.0 - eta(d_single_range, single_line_distance(cfg, r.r1, action));
    out.actions.col(i) << action.speed, action.heading;
  }
  return out;
}

ActionSampler as_sampler(std::shared_ptr<const Generator> g) {
  if (g->spec.action_dim != 2) throw ValidationError("as_sampler: generator must emit (speed, heading)");
  return [g = std::move(g)](const Eigen::VectorXd& condition, double score, Rng& rng) {
    const Eigen::VectorXd a = sample_generator(*g, condition, score, rng);
    return PolarAction(a(0), a(1));
  };
}

}  // namespace pursuit
