#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace uavage::dqn {

/// With probability epsilon a uniform valid action, otherwise the valid argmax
/// (ties go to the lowest index). An empty mask means every action is valid.
template <class Q>
int act_epsilon_greedy(const Q& qvals, std::span<const std::uint8_t> mask, double epsilon, std::mt19937_64& rng) {
  const int n = static_cast<int>(qvals.size());
  if (!mask.empty() && static_cast<int>(mask.size()) != n)
    throw std::invalid_argument("action mask size does not match the Q-vector");
  auto valid = [&](int a) { return mask.empty() || mask[static_cast<std::size_t>(a)] != 0; };

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    int count = 0;
    for (int a = 0; a < n; ++a) count += valid(a);
    if (count == 0) throw std::invalid_argument("action mask has no valid action");
    std::uniform_int_distribution<int> pick(0, count - 1);
    int k = pick(rng);
    for (int a = 0; a < n; ++a)
      if (valid(a) && k-- == 0) return a;
  }
  int best = -1;
  for (int a = 0; a < n; ++a)
    if (valid(a) && (best < 0 || qvals[a] > qvals[best])) best = a;
  if (best < 0) throw std::invalid_argument("action mask has no valid action");
  return best;
}

/// Linear anneal from `start` to `end` over the first `decay_fraction` of training, then flat.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay_fraction = 0.6;

  double at(int episode, int total_episodes) const {
    const double horizon = decay_fraction * total_episodes;
    if (horizon <= 0.0 || episode >= horizon) return end;
    const double f = episode / horizon;
    return std::clamp(start + (end - start) * f, 0.0, 1.0);
  }
};

}  // namespace uavage::dqn
