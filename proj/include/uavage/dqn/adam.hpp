#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "uavage/dqn/mlp.hpp"

namespace uavage::dqn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class Scalar>
struct AdamState {
  MlpParams<Scalar> m;
  MlpParams<Scalar> v;
  std::int64_t step = 0;

  static AdamState like(const MlpParams<Scalar>& p) { return {zeros_like(p), zeros_like(p), 0}; }
};

/// Bias-corrected Adam update in place.
template <class Scalar>
void adam_step(MlpParams<Scalar>& params, const MlpParams<Scalar>& grads, AdamState<Scalar>& state,
               double learning_rate, const AdamConfig& cfg = {}) {
  if (params.widths() != grads.widths() || params.widths() != state.m.widths())
    throw std::invalid_argument("adam_step: parameter, gradient and moment shapes differ");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  const Scalar b1 = static_cast<Scalar>(cfg.beta1), b2 = static_cast<Scalar>(cfg.beta2);
  const Scalar step_size = static_cast<Scalar>(learning_rate / c1);
  const Scalar inv_c2 = static_cast<Scalar>(1.0 / c2);
  const Scalar eps = static_cast<Scalar>(cfg.eps);

  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = b1 * m + (Scalar(1) - b1) * g;
    v = b2 * v.array() + (Scalar(1) - b2) * g.array().square();
    p.array() -= step_size * m.array() / ((v.array() * inv_c2).sqrt() + eps);
  };
  for (int l = 0; l < params.num_layers(); ++l) {
    update(params.weights[l], grads.weights[l], state.m.weights[l], state.v.weights[l]);
    update(params.biases[l], grads.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

}  // namespace uavage::dqn
