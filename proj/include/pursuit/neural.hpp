#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <Eigen/Core>
#include <fmt/core.h>

#include "pursuit/errors.hpp"
#include "pursuit/random.hpp"

namespace pursuit {

enum class Activation { identity, relu, leaky_relu, logistic };

inline constexpr double kLeakySlope = 0.2;

std::string_view activation_name(Activation a);
/// Throws ValidationError for an unknown name.
Activation activation_from_name(std::string_view name);

/// Layer widths from input to output plus the two nonlinearities.
struct MlpSpec {
  std::vector<int> layer_sizes;
  Activation hidden = Activation::relu;
  Activation output = Activation::identity;

  int input_width() const { return layer_sizes.front(); }
  int output_width() const { return layer_sizes.back(); }
  std::size_t layer_count() const { return layer_sizes.size() - 1; }
  Activation activation_of(std::size_t layer) const {
    return layer + 1 == layer_count() ? output : hidden;
  }

  void validate() const {
    if (layer_sizes.size() < 2) throw ValidationError("MlpSpec needs at least input and output widths");
    for (int w : layer_sizes)
      if (w < 1) throw ValidationError("MlpSpec widths must be >= 1");
  }
};

template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Weights are (out x in); a batch is a matrix with one sample per column.
template <typename Scalar>
struct MlpParams {
  MlpSpec spec;
  std::vector<MatrixT<Scalar>> weights;
  std::vector<VectorT<Scalar>> biases;

  static MlpParams zeros(const MlpSpec& spec) {
    spec.validate();
    MlpParams p;
    p.spec = spec;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
      p.weights.push_back(MatrixT<Scalar>::Zero(spec.layer_sizes[l + 1], spec.layer_sizes[l]));
      p.biases.push_back(VectorT<Scalar>::Zero(spec.layer_sizes[l + 1]));
    }
    return p;
  }

  MlpParams zeros_like() const { return zeros(spec); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }
};

/// Fan-in scaled uniform initialization, U(-sqrt(6/fan_in), sqrt(6/fan_in)),
/// i.e. weight variance 2/fan_in. Biases start at zero.
template <typename Scalar>
void initialize(MlpParams<Scalar>& params, Rng& rng) {
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto& w = params.weights[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = static_cast<Scalar>(dist(rng));
    params.biases[l].setZero();
  }
}

inline double prescribed_weight_variance(int fan_in) { return 2.0 / fan_in; }

template <typename Scalar>
MlpParams<Scalar> make_mlp(const MlpSpec& spec, Rng& rng) {
  auto p = MlpParams<Scalar>::zeros(spec);
  initialize(p, rng);
  return p;
}

namespace detail {

template <typename Scalar>
MatrixT<Scalar> activate(Activation a, const MatrixT<Scalar>& z) {
  switch (a) {
    case Activation::identity:
      return z;
    case Activation::relu:
      return z.array().max(Scalar(0)).matrix();
    case Activation::leaky_relu:
      return (z.array() > Scalar(0)).select(z, Scalar(kLeakySlope) * z);
    case Activation::logistic:
      return (Scalar(1) + (-z.array()).exp()).inverse().matrix();
  }
  return z;
}

/// Elementwise derivative, evaluated from the pre- and post-activation.
template <typename Scalar>
MatrixT<Scalar> activation_slope(Activation a, const MatrixT<Scalar>& z, const MatrixT<Scalar>& y) {
  switch (a) {
    case Activation::identity:
      return MatrixT<Scalar>::Ones(z.rows(), z.cols());
    case Activation::relu:
      return (z.array() > Scalar(0)).template cast<Scalar>().matrix();
    case Activation::leaky_relu:
      return (z.array() > Scalar(0)).select(MatrixT<Scalar>::Ones(z.rows(), z.cols()),
                                             MatrixT<Scalar>::Constant(z.rows(), z.cols(), Scalar(kLeakySlope)));
    case Activation::logistic:
      return (y.array() * (Scalar(1) - y.array())).matrix();
  }
  return MatrixT<Scalar>::Ones(z.rows(), z.cols());
}

template <typename Scalar>
void check_input(const MlpParams<Scalar>& params, Eigen::Index rows) {
  if (rows != params.spec.input_width())
    throw ValidationError(fmt::format("mlp input has {} rows, network expects {}", rows,
                                      params.spec.input_width()));
}

}  // namespace detail

/// Intermediate values of one forward pass, kept for backward.
template <typename Scalar>
struct ForwardTape {
  MatrixT<Scalar> input;
  std::vector<MatrixT<Scalar>> pre;
  std::vector<MatrixT<Scalar>> post;

  const MatrixT<Scalar>& output() const { return post.back(); }
};

template <typename Scalar>
ForwardTape<Scalar> forward_tape(const MlpParams<Scalar>& params,
                                 const Eigen::Ref<const MatrixT<std::type_identity_t<Scalar>>>& input) {
  detail::check_input(params, input.rows());
  ForwardTape<Scalar> tape;
  tape.input = input;
  tape.pre.reserve(params.weights.size());
  tape.post.reserve(params.weights.size());
  const MatrixT<Scalar>* x = &tape.input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    MatrixT<Scalar> z = params.weights[l] * *x;
    z.colwise() += params.biases[l];
    tape.post.push_back(detail::activate(params.spec.activation_of(l), z));
    tape.pre.push_back(std::move(z));
    x = &tape.post.back();
  }
  return tape;
}

template <typename Scalar>
MatrixT<Scalar> forward(const MlpParams<Scalar>& params,
                        const Eigen::Ref<const MatrixT<std::type_identity_t<Scalar>>>& input) {
  detail::check_input(params, input.rows());
  MatrixT<Scalar> x = input;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    MatrixT<Scalar> z = params.weights[l] * x;
    z.colwise() += params.biases[l];
    x = detail::activate(params.spec.activation_of(l), z);
  }
  return x;
}

template <typename Scalar>
VectorT<Scalar> forward(const MlpParams<Scalar>& params, const VectorT<Scalar>& input) {
  return forward(params, Eigen::Ref<const MatrixT<Scalar>>(input)).col(0);
}

template <typename Scalar>
struct MlpGradients {
  MlpParams<Scalar> params;
  MatrixT<Scalar> input;
};

/// Where the upstream gradient is taken: with respect to the network output,
/// or with respect to the output layer's pre-activation (logits).
enum class GradientAt { output, pre_activation };

/// Reverse-mode gradients of sum(upstream .* output) over the batch.
template <typename Scalar>
MlpGradients<Scalar> backward(const MlpParams<Scalar>& params, const ForwardTape<Scalar>& tape,
                              const Eigen::Ref<const MatrixT<std::type_identity_t<Scalar>>>& upstream,
                              GradientAt at = GradientAt::output) {
  const auto& out = tape.output();
  if (upstream.rows() != out.rows() || upstream.cols() != out.cols())
    throw ValidationError(fmt::format("upstream gradient is {}x{}, output is {}x{}", upstream.rows(),
                                      upstream.cols(), out.rows(), out.cols()));
  MlpGradients<Scalar> grads{params.zeros_like(), {}};
  MatrixT<Scalar> delta = upstream;
  const std::size_t layers = params.weights.size();
  for (std::size_t k = layers; k-- > 0;) {
    if (k + 1 < layers || at == GradientAt::output)
      delta.array() *= detail::activation_slope(params.spec.activation_of(k), tape.pre[k], tape.post[k]).array();
    const MatrixT<Scalar>& below = k == 0 ? tape.input : tape.post[k - 1];
    grads.params.weights[k].noalias() = delta * below.transpose();
    grads.params.biases[k] = delta.rowwise().sum();
    delta = params.weights[k].transpose() * delta;
  }
  grads.input = std::move(delta);
  return grads;
}

template <typename Scalar>
struct OptimizerState {
  long step = 0;
  MlpParams<Scalar> first_moment;
  MlpParams<Scalar> second_moment;
  Scalar learning_rate = Scalar(2e-4);
  Scalar beta1 = Scalar(0.5);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);

  static OptimizerState fresh(const MlpParams<Scalar>& params, Scalar lr = Scalar(2e-4),
                              Scalar beta1 = Scalar(0.5), Scalar beta2 = Scalar(0.999),
                              Scalar epsilon = Scalar(1e-8)) {
    return {0, params.zeros_like(), params.zeros_like(), lr, beta1, beta2, epsilon};
  }
};

/// Adaptive-moment update with bias correction.
template <typename Scalar>
void adam_step(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads, OptimizerState<Scalar>& state) {
  if (grads.weights.size() != params.weights.size() || state.first_moment.weights.size() != params.weights.size())
    throw ValidationError("adam_step: shape mismatch");
  ++state.step;
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, Scalar(state.step));
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = state.beta1 * m + (Scalar(1) - state.beta1) * g;
    v = state.beta2 * v + (Scalar(1) - state.beta2) * g.cwiseAbs2();
    p.array() -= state.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], state.first_moment.weights[l], state.second_moment.weights[l]);
    update(params.biases[l], grads.biases[l], state.first_moment.biases[l], state.second_moment.biases[l]);
  }
}

/// Compares backward against central differences (step 1e-5) on a randomly
/// initialized network and a random batch of 4 inputs, for every parameter
/// and input coordinate. Error per coordinate is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-2). Coordinates whose
/// perturbation flips a rectifier on or off are skipped, since the loss is
/// not differentiable across that kink.
double grad_check(const MlpSpec& spec, std::uint64_t seed);

/// MLPv1 text format: "MLPv1", the layer sizes, then for each layer the
/// weight rows (row-major, one row per line) and the bias line, all with 17
/// significant digits. Activations are not stored; the caller supplies them.
template <typename Scalar>
void save_mlp(std::ostream& out, const MlpParams<Scalar>& params) {
  out << "MLPv1\n";
  for (std::size_t i = 0; i < params.spec.layer_sizes.size(); ++i)
    out << (i ? " " : "") << params.spec.layer_sizes[i];
  out << '\n';
  auto line = [&](auto&& values, Eigen::Index n) {
    for (Eigen::Index j = 0; j < n; ++j)
      out << (j ? " " : "") << fmt::format("{:.17g}", static_cast<double>(values(j)));
    out << '\n';
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    const auto& w = params.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) line(w.row(i), w.cols());
    line(params.biases[l], params.biases[l].size());
  }
}

template <typename Scalar>
MlpParams<Scalar> load_mlp(std::istream& in, Activation hidden, Activation output) {
  std::string line;
  if (!std::getline(in, line) || (line != "MLPv1" && line != "MLPv1\r"))
    throw IoError("weight file: missing MLPv1 magic line");
  if (!std::getline(in, line)) throw IoError("weight file: missing layer sizes");
  MlpSpec spec;
  spec.hidden = hidden;
  spec.output = output;
  {
    std::istringstream sizes(line);
    int w;
    while (sizes >> w) spec.layer_sizes.push_back(w);
  }
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw IoError(std::string("weight file: ") + e.what());
  }
  auto p = MlpParams<Scalar>::zeros(spec);
  auto read = [&](Scalar& target) {
    std::string token;
    if (!(in >> token)) throw IoError("weight file: truncated");
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw IoError("weight file: bad number '" + token + "'");
    target = static_cast<Scalar>(value);
  };
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    auto& w = p.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) read(w(i, j));
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) read(p.biases[l](i));
  }
  if (!p.all_finite()) throw IoError("weight file: non-finite entries");
  return p;
}

}  // namespace pursuit
