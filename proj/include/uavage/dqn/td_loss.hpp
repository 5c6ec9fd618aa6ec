#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "uavage/dqn/mlp.hpp"

namespace uavage::dqn {

template <class Scalar>
struct Transition {
  std::vector<Scalar> state;
  int action = 0;
  Scalar reward = 0;
  std::vector<Scalar> next_state;
  std::vector<std::uint8_t> next_mask;  // empty: every action valid in next_state
  bool terminal = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

template <class Scalar>
struct LossResult {
  Scalar loss = 0;
  MlpParams<Scalar> gradients;
};

/// Largest entry of `q` among actions allowed by `mask` (all actions if the mask is empty).
template <class Scalar>
Scalar masked_max(const Vector<Scalar>& q, std::span<const std::uint8_t> mask) {
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index a = 0; a < q.size(); ++a)
    if (mask.empty() || mask[static_cast<std::size_t>(a)]) best = std::max(best, q[a]);
  return best;
}

/// Bootstrap targets r + gamma * max_a' Q_target(s', a'); terminal transitions keep r only.
template <class Scalar>
std::vector<Scalar> td_targets(const MlpParams<Scalar>& target, std::span<const Transition<Scalar>* const> batch,
                               Scalar discount, MacCounter* counter = nullptr) {
  const int n = static_cast<int>(batch.size());
  Matrix<Scalar> next(target.input_width(), n);
  for (int b = 0; b < n; ++b)
    next.col(b) = Eigen::Map<const Vector<Scalar>>(batch[b]->next_state.data(),
                                                   static_cast<Eigen::Index>(batch[b]->next_state.size()));
  const Matrix<Scalar> qn = forward_batch<Scalar>(target, next, nullptr, counter);
  std::vector<Scalar> y(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) {
    y[b] = batch[b]->reward;
    if (!batch[b]->terminal) {
      const Vector<Scalar> col = qn.col(b);
      y[b] += discount * masked_max<Scalar>(col, batch[b]->next_mask);
    }
  }
  return y;
}

/// Mean squared TD error over the batch and its gradient with respect to `params`.
/// The target network is treated as a constant.
template <class Scalar>
LossResult<Scalar> td_loss(const MlpParams<Scalar>& params, const MlpParams<Scalar>& target,
                           std::span<const Transition<Scalar>* const> batch, Scalar discount,
                           MacCounter* counter = nullptr) {
  if (batch.empty()) throw std::invalid_argument("td_loss needs a nonempty batch");
  const int n = static_cast<int>(batch.size());
  const std::vector<Scalar> y = td_targets(target, batch, discount, counter);

  Matrix<Scalar> states(params.input_width(), n);
  for (int b = 0; b < n; ++b) {
    if (static_cast<int>(batch[b]->state.size()) != params.input_width())
      throw std::invalid_argument("transition state width does not match the network");
    states.col(b) = Eigen::Map<const Vector<Scalar>>(batch[b]->state.data(), params.input_width());
  }
  ForwardCache<Scalar> cache;
  const Matrix<Scalar> q = forward_batch(params, states, &cache, counter);

  LossResult<Scalar> out;
  out.gradients = zeros_like(params);
  Matrix<Scalar> grad_out = Matrix<Scalar>::Zero(q.rows(), n);
  Scalar loss = 0;
  for (int b = 0; b < n; ++b) {
    const int a = batch[b]->action;
    if (a < 0 || a >= q.rows()) throw std::out_of_range("transition action out of range");
    const Scalar err = q(a, b) - y[b];
    loss += err * err;
    grad_out(a, b) = Scalar(2) * err / Scalar(n);
  }
  out.loss = loss / Scalar(n);
  backward(params, cache, std::move(grad_out), out.gradients, counter);
  return out;
}

}  // namespace uavage::dqn
