#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavage::dqn {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Multiply-accumulate counter fed by every forward and backward pass.
struct MacCounter {
  std::int64_t macs = 0;
};

/// Fully connected network: rectifier on hidden layers, identity on the output.
/// weights[l] is (out x in) so that a_{l+1} = W_l a_l + b_l.
template <class Scalar>
struct MlpParams {
  std::vector<Matrix<Scalar>> weights;
  std::vector<Vector<Scalar>> biases;

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_width() const { return weights.empty() ? 0 : static_cast<int>(weights.front().cols()); }
  int output_width() const { return weights.empty() ? 0 : static_cast<int>(weights.back().rows()); }

  std::vector<int> widths() const {
    std::vector<int> w;
    if (weights.empty()) return w;
    w.push_back(input_width());
    for (const auto& m : weights) w.push_back(static_cast<int>(m.rows()));
    return w;
  }

  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
  }

  void set_zero() {
    for (auto& w : weights) w.setZero();
    for (auto& b : biases) b.setZero();
  }

  bool all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
      if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
  }

  /// Visits every scalar parameter in a fixed order (layer, weights column-major, then bias).
  template <class F>
  void for_each(F&& f) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index i = 0; i < weights[l].size(); ++i) f(weights[l].data()[i]);
      for (Eigen::Index i = 0; i < biases[l].size(); ++i) f(biases[l].data()[i]);
    }
  }

  friend bool operator==(const MlpParams& a, const MlpParams& b) {
    if (a.weights.size() != b.weights.size()) return false;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      if (a.weights[l].rows() != b.weights[l].rows() || a.weights[l].cols() != b.weights[l].cols()) return false;
      if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) return false;
    }
    return true;
  }
};

/// Zero-filled parameters with the given layer widths.
template <class Scalar>
MlpParams<Scalar> zero_mlp(std::span<const int> widths) {
  if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
  MlpParams<Scalar> p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l] < 1 || widths[l + 1] < 1) throw std::invalid_argument("layer widths must be >= 1");
    p.weights.push_back(Matrix<Scalar>::Zero(widths[l + 1], widths[l]));
    p.biases.push_back(Vector<Scalar>::Zero(widths[l + 1]));
  }
  return p;
}

template <class Scalar>
MlpParams<Scalar> zeros_like(const MlpParams<Scalar>& p) {
  const auto w = p.widths();
  return zero_mlp<Scalar>(w);
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization of weights and biases.
template <class Scalar>
MlpParams<Scalar> make_mlp(std::span<const int> widths, std::uint64_t seed) {
  MlpParams<Scalar> p = zero_mlp<Scalar>(widths);
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.weights[l].cols()));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < p.weights[l].size(); ++i) p.weights[l].data()[i] = static_cast<Scalar>(u(rng));
    for (Eigen::Index i = 0; i < p.biases[l].size(); ++i) p.biases[l].data()[i] = static_cast<Scalar>(u(rng));
  }
  return p;
}

inline std::vector<int> layer_widths(int input, std::span<const int> hidden, int output) {
  std::vector<int> w{input};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(output);
  return w;
}

/// MACs of one single-sample forward pass.
inline std::int64_t forward_macs(std::span<const int> widths) {
  std::int64_t n = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) n += static_cast<std::int64_t>(widths[l]) * widths[l + 1];
  return n;
}

/// Activations of a batched forward pass; activations[0] is the input (in x B).
template <class Scalar>
struct ForwardCache {
  std::vector<Matrix<Scalar>> activations;
};

template <class Scalar>
Matrix<Scalar> forward_batch(const MlpParams<Scalar>& p, const Matrix<Scalar>& inputs,
                             ForwardCache<Scalar>* cache = nullptr, MacCounter* counter = nullptr) {
  if (inputs.rows() != p.input_width())
    throw std::invalid_argument("input width " + std::to_string(inputs.rows()) + " does not match network input " +
                                std::to_string(p.input_width()));
  Matrix<Scalar> a = inputs;
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  const int L = p.num_layers();
  for (int l = 0; l < L; ++l) {
    Matrix<Scalar> z = p.weights[l] * a;
    z.colwise() += p.biases[l];
    if (l + 1 < L) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
    if (counter) counter->macs += static_cast<std::int64_t>(p.weights[l].size()) * inputs.cols();
  }
  return a;
}

/// Q-values for one state.
template <class Scalar>
Vector<Scalar> forward(const MlpParams<Scalar>& p, const Vector<Scalar>& state, MacCounter* counter = nullptr) {
  if (state.size() != p.input_width())
    throw std::invalid_argument("input width " + std::to_string(state.size()) + " does not match network input " +
                                std::to_string(p.input_width()));
  Vector<Scalar> a = state;
  const int L = p.num_layers();
  for (int l = 0; l < L; ++l) {
    Vector<Scalar> z = p.weights[l] * a + p.biases[l];
    if (l + 1 < L) z = z.cwiseMax(Scalar(0));
    a = std::move(z);
    if (counter) counter->macs += static_cast<std::int64_t>(p.weights[l].size());
  }
  return a;
}

template <class Scalar>
Vector<Scalar> forward(const MlpParams<Scalar>& p, std::span<const double> state, MacCounter* counter = nullptr) {
  Vector<Scalar> x(static_cast<Eigen::Index>(state.size()));
  for (std::size_t i = 0; i < state.size(); ++i) x[static_cast<Eigen::Index>(i)] = static_cast<Scalar>(state[i]);
  return forward(p, x, counter);
}

/// Accumulates parameter gradients of sum_b <grad_out_b, f(x_b)> into `grads`.
/// Counts 2 * in * out MACs per layer per sample.
template <class Scalar>
void backward(const MlpParams<Scalar>& p, const ForwardCache<Scalar>& cache, Matrix<Scalar> grad_out,
              MlpParams<Scalar>& grads, MacCounter* counter = nullptr) {
  const int L = p.num_layers();
  const Eigen::Index batch = grad_out.cols();
  Matrix<Scalar> delta = std::move(grad_out);
  for (int l = L - 1; l >= 0; --l) {
    const Matrix<Scalar>& a_in = cache.activations[l];
    grads.weights[l].noalias() += delta * a_in.transpose();
    grads.biases[l] += delta.rowwise().sum();
    if (counter) counter->macs += 2 * static_cast<std::int64_t>(p.weights[l].size()) * batch;
    if (l > 0) {
      Matrix<Scalar> prev = p.weights[l].transpose() * delta;
      // rectifier derivative: activations of hidden layers are post-ReLU
      delta = (a_in.array() > Scalar(0)).select(prev, Scalar(0));
    }
  }
}

}  // namespace uavage::dqn
