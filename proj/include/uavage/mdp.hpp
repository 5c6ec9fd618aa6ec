#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uavage/aoi.hpp"
#include "uavage/channel.hpp"
#include "uavage/world.hpp"

namespace uavage {

/// How ages enter an observation vector.
enum class AgeObservation {
  cluster_max,  // one entry per cluster: oldest member age
  per_device,   // one entry per device
};

/// Everything needed to instantiate one environment.
struct ScenarioConfig {
  WorldConfig world;
  LinkBudget budget;
  RateConfig rate;
  UavConfig uav;
  int num_devices = 300;
  int max_age = 30;
  int initial_age = 1;
  double power_penalty = 5.0;
  int horizon = 60;
  AgeObservation observation = AgeObservation::cluster_max;
  std::vector<double> weights;  // empty: 1/D for every device
};

/// Static part of the swarm environment: geometry, devices, clusters and link model.
/// Immutable after construction; shareable between episode runners.
class Environment {
 public:
  explicit Environment(ScenarioConfig config) : config_(std::move(config)), world_(config_.world) {
    if (config_.horizon < 0) throw ConfigError("horizon must be >= 0");
    if (config_.max_age < 1) throw ConfigError("max_age must be >= 1");
    capacity_ = cluster_capacity(config_.rate, world_.cell_size(), config_.uav.velocity,
                                 config_.budget.packet_size);
    timing_ = cycle_timing(config_.rate.duplex, world_.cell_size(), config_.uav.velocity);
    starts_ = resolve_start_positions(config_.uav, world_);
    devices_ = place_devices(world_, config_.num_devices, config_.world.rng_seed);
    if (!config_.weights.empty()) {
      if (static_cast<int>(config_.weights.size()) != config_.num_devices)
        throw ConfigError("weights must list one value per device");
      for (std::size_t d = 0; d < devices_.size(); ++d) {
        if (!(config_.weights[d] > 0.0)) throw ConfigError("device weights must be > 0");
        devices_[d].weight = config_.weights[d];
      }
    }
    clusters_ = cluster_devices(devices_, capacity_, world_);
    reward_.power_penalty = config_.power_penalty;
    for (const Device& d : devices_) reward_.weights.push_back(d.weight);
  }

  const ScenarioConfig& config() const { return config_; }
  const GridWorld& world() const { return world_; }
  const std::vector<Device>& devices() const { return devices_; }
  const std::vector<Cluster>& clusters() const { return clusters_; }
  const LinkBudget& budget() const { return config_.budget; }
  const UavConfig& uav() const { return config_.uav; }
  const RewardConfig& reward() const { return reward_; }
  const CycleTiming& timing() const { return timing_; }
  const std::vector<Cell>& start_positions() const { return starts_; }
  int capacity() const { return capacity_; }
  int num_devices() const { return static_cast<int>(devices_.size()); }
  int num_clusters() const { return static_cast<int>(clusters_.size()); }
  int num_uavs() const { return config_.uav.count; }
  int horizon() const { return config_.horizon; }
  int max_age() const { return config_.max_age; }
  int actions_per_uav() const { return kNumDirections * num_clusters(); }

  AoiState initial_aoi() const { return AoiState::initial(num_devices(), max_age(), config_.initial_age); }

 private:
  ScenarioConfig config_;
  GridWorld world_;
  int capacity_ = 0;
  CycleTiming timing_;
  std::vector<Cell> starts_;
  std::vector<Device> devices_;
  std::vector<Cluster> clusters_;
  RewardConfig reward_;
};

struct AgentAction {
  Direction direction = Direction::hover;
  int cluster = 0;  // 0-based cluster index
  friend bool operator==(const AgentAction&, const AgentAction&) = default;
};

/// Per-agent action index: direction-major, cluster-minor.
inline int action_index(AgentAction a, int num_clusters) {
  return static_cast<int>(a.direction) * num_clusters + a.cluster;
}

inline AgentAction decode_action(int index, int num_clusters) {
  return {static_cast<Direction>(index / num_clusters), index % num_clusters};
}

/// Raised when a joint action space is too large to learn (dimensionality curse).
class DimensionalityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::int64_t kDefaultJointActionCap = 1'000'000;

/// (5*C)^k actions: k = 1 for per-UAV learners, k = U for a joint learner.
inline std::int64_t action_space_size(int num_clusters, int num_uavs_joint,
                                      std::int64_t cap = kDefaultJointActionCap) {
  if (num_clusters < 1 || num_uavs_joint < 1) throw std::invalid_argument("action space inputs must be >= 1");
  const std::int64_t per = static_cast<std::int64_t>(kNumDirections) * num_clusters;
  std::int64_t size = 1;
  for (int k = 0; k < num_uavs_joint; ++k) {
    if (size > cap / per)
      throw DimensionalityError("joint action space (5*" + std::to_string(num_clusters) + ")^" +
                                std::to_string(num_uavs_joint) + " exceeds the cap of " + std::to_string(cap) +
                                " actions; a centralized learner cannot cover it (curse of dimensionality)");
    size *= per;
  }
  return size;
}

/// Joint index with UAV 0 as the least significant digit.
inline std::vector<AgentAction> decode_joint_action(std::int64_t index, int num_uavs, int num_clusters) {
  const std::int64_t per = static_cast<std::int64_t>(kNumDirections) * num_clusters;
  std::vector<AgentAction> out(static_cast<std::size_t>(num_uavs));
  for (int u = 0; u < num_uavs; ++u) {
    out[u] = decode_action(static_cast<int>(index % per), num_clusters);
    index /= per;
  }
  return out;
}

inline std::int64_t joint_action_index(std::span<const AgentAction> actions, int num_clusters) {
  const std::int64_t per = static_cast<std::int64_t>(kNumDirections) * num_clusters;
  std::int64_t index = 0;
  for (std::size_t u = actions.size(); u-- > 0;) index = index * per + action_index(actions[u], num_clusters);
  return index;
}

struct AgentState {
  Cell uav_cell;
  std::vector<int> ages;
  std::vector<std::optional<AgentAction>> peer_actions;  // Co-MARL only; empty slots encode as zeros
};

/// Width of an observation with `num_positions` UAV cells and `peer_slots` peer-action one-hots.
inline int observation_width(const Environment& env, int num_positions, int peer_slots) {
  const int ages = env.config().observation == AgeObservation::cluster_max ? env.num_clusters() : env.num_devices();
  return 2 * num_positions + ages + peer_slots * env.actions_per_uav();
}

/// [x/extent, y/extent per cell, ages/A_max, peer one-hots]; every entry in [0,1].
inline std::vector<double> encode_observation(const Environment& env, std::span<const Cell> cells,
                                              std::span<const int> ages,
                                              std::span<const std::optional<AgentAction>> peers,
                                              int peer_slots) {
  const GridWorld& w = env.world();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(observation_width(env, static_cast<int>(cells.size()), peer_slots)));
  for (const Cell& c : cells) {
    const Point p = w.cell_center(c);
    out.push_back(p.x / w.extent_x());
    out.push_back(p.y / w.extent_y());
  }
  const double inv = 1.0 / env.max_age();
  if (env.config().observation == AgeObservation::cluster_max) {
    for (const Cluster& c : env.clusters()) {
      int oldest = 1;
      for (int id : c.member_ids) oldest = std::max(oldest, ages[id]);
      out.push_back(oldest * inv);
    }
  } else {
    for (int a : ages) out.push_back(a * inv);
  }
  const int per = env.actions_per_uav();
  for (int s = 0; s < peer_slots; ++s) {
    const std::size_t base = out.size();
    out.resize(base + per, 0.0);
    if (s < static_cast<int>(peers.size()) && peers[s]) out[base + action_index(*peers[s], env.num_clusters())] = 1.0;
  }
  return out;
}

inline std::vector<double> encode_state(const AgentState& state, const Environment& env, int peer_slots = 0) {
  return encode_observation(env, std::span<const Cell>(&state.uav_cell, 1), state.ages, state.peer_actions,
                            peer_slots);
}

/// Per-agent mask over the 5*C actions: false only for moves leaving the valid cell set.
inline std::vector<std::uint8_t> valid_action_mask(Cell cell, const GridWorld& world, int num_clusters) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(kNumDirections * num_clusters), 0);
  for (Direction d : kDirections) {
    const bool ok = d == Direction::hover || move_is_valid(cell, d, world);
    for (int c = 0; c < num_clusters; ++c) mask[static_cast<int>(d) * num_clusters + c] = ok;
  }
  return mask;
}

inline std::vector<std::uint8_t> valid_action_mask(const AgentState& state, const GridWorld& world,
                                                   int num_clusters) {
  return valid_action_mask(state.uav_cell, world, num_clusters);
}

/// Product mask over the joint action space (UAV 0 least significant).
inline std::vector<std::uint8_t> joint_action_mask(std::span<const Cell> cells, const Environment& env) {
  const int per = env.actions_per_uav();
  std::vector<std::uint8_t> mask{1};
  for (const Cell& c : cells) {
    const auto m = valid_action_mask(c, env.world(), env.num_clusters());
    std::vector<std::uint8_t> next(mask.size() * per);
    for (int a = 0; a < per; ++a)
      for (std::size_t r = 0; r < mask.size(); ++r) next[a * mask.size() + r] = mask[r] && m[a];
    mask = std::move(next);
  }
  return mask;
}

/// Per-frame log record.
struct FrameRecord {
  int frame = 0;
  std::vector<Cell> cells;
  std::vector<int> clusters;
  std::vector<std::uint8_t> served;
  std::vector<int> ages;
  std::vector<double> rewards;
  std::vector<double> gain_bs;
  double weighted_age = 0.0;
  double total_power = 0.0;
  double power_term_per_device = 0.0;  // zeta/D * sum P
};

struct StepResult {
  std::vector<Cell> positions;
  AoiState aoi;
  std::vector<double> rewards;       // per UAV
  std::vector<double> powers;        // per device, zero for unserved devices
  std::vector<double> power_terms;   // per UAV: zeta/D_c * sum of its devices' power
  double age_term = 0.0;             // sum_d theta_d A_d after the update
  FrameRecord record;

  /// Reward of a single learner controlling every UAV.
  double joint_reward() const {
    double r = -age_term;
    for (double p : power_terms) r -= p;
    return r;
  }
};

/// One frame: navigate, collect uplinks at the destination cell, relay, update ages.
/// A cluster chosen by several UAVs is served once, by the lowest-indexed of them.
inline StepResult env_step(const Environment& env, std::span<const Cell> positions,
                           std::span<const AgentAction> actions, const AoiState& aoi, int frame = 0) {
  const int num_uavs = static_cast<int>(positions.size());
  if (static_cast<int>(actions.size()) != num_uavs)
    throw std::invalid_argument("joint action size does not match UAV count");
  const GridWorld& world = env.world();
  const double h = env.uav().height;

  StepResult out;
  out.positions.resize(num_uavs);
  out.powers.assign(static_cast<std::size_t>(env.num_devices()), 0.0);
  out.power_terms.assign(static_cast<std::size_t>(num_uavs), 0.0);
  out.record.served.assign(static_cast<std::size_t>(env.num_devices()), 0);

  std::vector<int> served_ids;
  std::vector<std::uint8_t> cluster_taken(static_cast<std::size_t>(env.num_clusters()), 0);
  for (int u = 0; u < num_uavs; ++u) {
    const AgentAction& a = actions[u];
    if (a.cluster < 0 || a.cluster >= env.num_clusters())
      throw std::out_of_range("cluster index " + std::to_string(a.cluster) + " out of range");
    out.positions[u] = apply_move(positions[u], a.direction, world);
    const Point p = world.cell_center(out.positions[u]);
    const Point bs = world.bs_position();
    out.record.gain_bs.push_back(gain_bs(h, std::hypot(p.x - bs.x, p.y - bs.y), world.bs_height(), env.budget()));
    if (cluster_taken[a.cluster]) continue;
    cluster_taken[a.cluster] = 1;
    const Cluster& c = env.clusters()[a.cluster];
    double sum = 0.0;
    for (int id : c.member_ids) {
      const Point dp = env.devices()[id].position;
      const double pw = tx_power(gain_device(h, std::hypot(dp.x - p.x, dp.y - p.y), env.budget()), env.budget());
      out.powers[id] = pw;
      sum += pw;
      served_ids.push_back(id);
      out.record.served[id] = 1;
    }
    out.power_terms[u] = env.reward().power_penalty / static_cast<double>(c.member_ids.size()) * sum;
  }

  out.aoi = update_aoi(aoi, served_ids);
  out.age_term = weighted_age(out.aoi, env.reward().weights);
  out.rewards.resize(num_uavs);
  for (int u = 0; u < num_uavs; ++u) out.rewards[u] = -out.age_term - out.power_terms[u];

  FrameRecord& rec = out.record;
  rec.frame = frame;
  rec.cells = out.positions;
  for (const AgentAction& a : actions) rec.clusters.push_back(a.cluster);
  rec.ages = out.aoi.ages;
  rec.rewards = out.rewards;
  rec.weighted_age = out.age_term;
  for (double p : out.powers) rec.total_power += p;
  rec.power_term_per_device = env.reward().power_penalty / env.num_devices() * rec.total_power;
  return out;
}

/// Small-instance view of the environment as a deterministic discrete MDP whose single
/// agent controls every UAV. State = [x_u, y_u for each UAV, per-device ages].
class DiscreteSwarmMdp {
 public:
  using State = std::vector<int>;

  explicit DiscreteSwarmMdp(const Environment& env, std::int64_t cap = kDefaultJointActionCap)
      : env_(&env), num_actions_(action_space_size(env.num_clusters(), env.num_uavs(), cap)) {}

  State initial_state() const {
    State s;
    for (const Cell& c : env_->start_positions()) {
      s.push_back(c.x);
      s.push_back(c.y);
    }
    const AoiState a = env_->initial_aoi();
    s.insert(s.end(), a.ages.begin(), a.ages.end());
    return s;
  }

  int num_actions() const { return static_cast<int>(num_actions_); }

  std::vector<std::uint8_t> action_mask(const State& s) const { return joint_action_mask(cells(s), *env_); }

  struct Step {
    State next;
    double reward = 0.0;
  };

  Step step(const State& s, int action) const {
    const auto cs = cells(s);
    AoiState aoi{std::vector<int>(s.begin() + 2 * env_->num_uavs(), s.end()), env_->max_age()};
    const auto actions = decode_joint_action(action, env_->num_uavs(), env_->num_clusters());
    StepResult r = env_step(*env_, cs, actions, aoi);
    Step out;
    for (const Cell& c : r.positions) {
      out.next.push_back(c.x);
      out.next.push_back(c.y);
    }
    out.next.insert(out.next.end(), r.aoi.ages.begin(), r.aoi.ages.end());
    out.reward = r.joint_reward();
    return out;
  }

  const Environment& environment() const { return *env_; }

 private:
  std::vector<Cell> cells(const State& s) const {
    std::vector<Cell> out(static_cast<std::size_t>(env_->num_uavs()));
    for (int u = 0; u < env_->num_uavs(); ++u) out[u] = {s[2 * u], s[2 * u + 1]};
    return out;
  }

  const Environment* env_;
  std::int64_t num_actions_;
};

}  // namespace uavage
