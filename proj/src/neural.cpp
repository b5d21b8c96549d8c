#include "pursuit/neural.hpp"

#include <array>

namespace pursuit {

namespace {

constexpr std::array<std::pair<Activation, std::string_view>, 4> kActivationNames = {{
    {Activation::identity, "identity"},
    {Activation::relu, "relu"},
    {Activation::leaky_relu, "leaky_relu"},
    {Activation::logistic, "logistic"},
}};

bool has_kink(Activation a) { return a == Activation::relu || a == Activation::leaky_relu; }

/// Sign pattern of every rectified pre-activation.
std::vector<bool> kink_pattern(const MlpParams<double>& params, const ForwardTape<double>& tape) {
  std::vector<bool> pattern;
  for (std::size_t l = 0; l < tape.pre.size(); ++l) {
    if (!has_kink(params.spec.activation_of(l))) continue;
    const auto& z = tape.pre[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) pattern.push_back(z(i) > 0.0);
  }
  return pattern;
}

}  // namespace

std::string_view activation_name(Activation a) {
  for (const auto& [value, name] : kActivationNames)
    if (value == a) return name;
  return "identity";
}

Activation activation_from_name(std::string_view name) {
  for (const auto& [value, n] : kActivationNames)
    if (n == name) return value;
  throw ValidationError("unknown activation '" + std::string(name) + "'");
}

double grad_check(const MlpSpec& spec, std::uint64_t seed) {
  constexpr double kStep = 1e-5;
  constexpr double kFloor = 1e-2;
  constexpr int kBatch = 4;
  Rng rng(seed);
  auto params = make_mlp<double>(spec, rng);
  // Nonzero biases so that they take part in the check.
  for (auto& b : params.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = 0.1 * standard_normal(rng);
  Eigen::MatrixXd input(spec.input_width(), kBatch);
  Eigen::MatrixXd projection(spec.output_width(), kBatch);
  for (Eigen::Index i = 0; i < input.size(); ++i) input(i) = standard_normal(rng);
  for (Eigen::Index i = 0; i < projection.size(); ++i) projection(i) = standard_normal(rng);

  const auto tape = forward_tape(params, input);
  const auto grads = backward(params, tape, projection);
  const auto base_pattern = kink_pattern(params, tape);

  double worst = 0.0;
  // Evaluates the loss at +step and -step of one coordinate, restoring it.
  auto probe = [&](double& coordinate, const Eigen::MatrixXd& x, double analytic) {
    const double saved = coordinate;
    coordinate = saved + kStep;
    const auto plus = forward_tape(params, x);
    coordinate = saved - kStep;
    const auto minus = forward_tape(params, x);
    coordinate = saved;
    if (kink_pattern(params, plus) != base_pattern || kink_pattern(params, minus) != base_pattern) return;
    const double numeric =
        ((plus.output().array() - minus.output().array()) * projection.array()).sum() / (2.0 * kStep);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), kFloor});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };

  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < params.weights[l].size(); ++i)
      probe(params.weights[l](i), input, grads.params.weights[l](i));
    for (Eigen::Index i = 0; i < params.biases[l].size(); ++i)
      probe(params.biases[l](i), input, grads.params.biases[l](i));
  }
  Eigen::MatrixXd x = input;
  for (Eigen::Index i = 0; i < x.size(); ++i) probe(x(i), x, grads.input(i));
  return worst;
}

}  // namespace pursuit
