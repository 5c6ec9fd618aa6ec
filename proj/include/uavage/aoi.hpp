#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavage {

/// Per-device age of information, frame granular, clamped to [1, max_age].
struct AoiState {
  std::vector<int> ages;
  int max_age = 30;

  static AoiState initial(int num_devices, int max_age, int initial_age = 1) {
    if (max_age < 1) throw std::invalid_argument("max_age must be >= 1");
    return {std::vector<int>(static_cast<std::size_t>(num_devices), std::clamp(initial_age, 1, max_age)),
            max_age};
  }

  int size() const { return static_cast<int>(ages.size()); }
  friend bool operator==(const AoiState&, const AoiState&) = default;
};

struct RewardConfig {
  std::vector<double> weights;  // theta_d
  double power_penalty = 5.0;   // zeta
};

/// Served devices restart at age 1; every other device ages by one frame up to the cap.
inline AoiState update_aoi(const AoiState& state, std::span<const int> served) {
  AoiState next = state;
  for (int& a : next.ages) a = std::min(state.max_age, a + 1);
  for (int id : served) {
    if (id < 0 || id >= state.size())
      throw std::out_of_range("served device id " + std::to_string(id) + " out of range");
    next.ages[id] = 1;
  }
  return next;
}

inline double weighted_age(const AoiState& state, std::span<const double> weights) {
  if (weights.size() != state.ages.size())
    throw std::invalid_argument("weight vector has " + std::to_string(weights.size()) +
                                " entries, age vector has " + std::to_string(state.ages.size()));
  double s = 0.0;
  for (std::size_t d = 0; d < weights.size(); ++d) s += weights[d] * state.ages[d];
  return s;
}

inline double power_term(std::span<const double> powers, double power_penalty, int cluster_size) {
  if (cluster_size < 1) throw std::invalid_argument("cluster_size must be >= 1");
  return power_penalty / cluster_size * std::accumulate(powers.begin(), powers.end(), 0.0);
}

/// Immediate UAV reward from the post-update ages and the uplink powers of the devices it served.
inline double step_reward(const AoiState& state, std::span<const double> powers, const RewardConfig& config,
                          int cluster_size) {
  return -weighted_age(state, config.weights) - power_term(powers, config.power_penalty, cluster_size);
}

}  // namespace uavage
