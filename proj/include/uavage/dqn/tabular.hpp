#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "uavage/dqn/policy.hpp"

// Exact small-instance machinery: tabular Q-learning and finite-horizon backward
// induction over deterministic discrete MDPs. Used as oracles for the DQN stack.

namespace uavage::dqn {

template <class M>
concept DiscreteMdp = requires(const M& m, const typename M::State& s, int a) {
  { m.initial_state() } -> std::convertible_to<typename M::State>;
  { m.num_actions() } -> std::convertible_to<int>;
  { m.step(s, a).next } -> std::convertible_to<typename M::State>;
  { m.step(s, a).reward } -> std::convertible_to<double>;
};

template <class M>
std::vector<std::uint8_t> mdp_action_mask(const M& m, const typename M::State& s) {
  if constexpr (requires { m.action_mask(s); })
    return m.action_mask(s);
  else
    return {};
}

struct IntVectorHash {
  std::size_t operator()(const std::vector<int>& v) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int x : v) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
      h *= 0x100000001b3ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

template <class State>
using StateHash = std::conditional_t<std::is_same_v<State, std::vector<int>>, IntVectorHash, std::hash<State>>;

class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense Q-values over an enumerated state set.
template <class State>
class QTable {
 public:
  QTable() = default;
  QTable(std::vector<State> states, int num_actions, double init = 0.0)
      : states_(std::move(states)), num_actions_(num_actions) {
    values_.assign(states_.size() * static_cast<std::size_t>(num_actions), init);
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
  }

  std::size_t num_states() const { return states_.size(); }
  int num_actions() const { return num_actions_; }
  const std::vector<State>& states() const { return states_; }
  bool contains(const State& s) const { return index_.count(s) != 0; }

  double& operator()(const State& s, int a) { return values_[slot(s, a)]; }
  double operator()(const State& s, int a) const { return values_[slot(s, a)]; }

  std::vector<double> row(const State& s) const {
    const std::size_t base = slot(s, 0);
    return {values_.begin() + base, values_.begin() + base + num_actions_};
  }

  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t slot(const State& s, int a) const {
    auto it = index_.find(s);
    if (it == index_.end()) throw std::out_of_range("state not in Q-table");
    return it->second * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a);
  }

  std::vector<State> states_;
  int num_actions_ = 0;
  std::vector<double> values_;
  std::unordered_map<State, std::size_t, StateHash<State>> index_;
};

/// Breadth-first enumeration of states reachable from the start state.
/// Throws CapacityError once |S| * |A| exceeds `cap`.
template <DiscreteMdp M>
std::vector<typename M::State> reachable_states(const M& mdp, std::int64_t cap) {
  using State = typename M::State;
  const int na = mdp.num_actions();
  std::unordered_map<State, char, StateHash<State>> seen;
  std::vector<State> order;
  std::deque<State> frontier{mdp.initial_state()};
  seen.emplace(frontier.front(), 0);
  while (!frontier.empty()) {
    State s = std::move(frontier.front());
    frontier.pop_front();
    order.push_back(s);
    if (static_cast<std::int64_t>(order.size()) * na > cap)
      throw CapacityError("reachable state-action count exceeds the cap of " + std::to_string(cap));
    const auto mask = mdp_action_mask(mdp, s);
    for (int a = 0; a < na; ++a) {
      if (!mask.empty() && !mask[a]) continue;
      State n = mdp.step(s, a).next;
      if (seen.emplace(n, 0).second) frontier.push_back(std::move(n));
    }
  }
  return order;
}

struct TabularConfig {
  double learning_rate = 0.5;
  double discount = 0.99;
  int horizon = 10;
  int max_episodes = 20'000;
  double tolerance = 1e-9;  // stop once an episode's largest |update| falls below this
  EpsilonSchedule epsilon{1.0, 0.05, 0.6};
  double initial_value = 0.0;
  std::uint64_t seed = 0;
  std::int64_t cap = 100'000;
};

template <class State>
struct TabularResult {
  std::vector<QTable<State>> q;  // one table per frame of the horizon
  int episodes = 0;
  double last_max_update = 0.0;
};

/// Episodic Q-learning over stage-indexed tables,
///   Q_t(s,a) <- Q_t(s,a) + alpha (r + gamma max_a' Q_{t+1}(s',a') - Q_t(s,a)),
/// with no bootstrap on the last frame. Indexing by frame keeps the targets stationary
/// under a finite horizon, so in a deterministic MDP the tables settle exactly.
template <DiscreteMdp M>
TabularResult<typename M::State> tabular_q_learning(const M& mdp, const TabularConfig& cfg) {
  using State = typename M::State;
  TabularResult<State> out;
  const auto states = reachable_states(mdp, cfg.cap);
  if (static_cast<std::int64_t>(states.size()) * mdp.num_actions() * cfg.horizon > cfg.cap)
    throw CapacityError("state-action-horizon product exceeds the cap of " + std::to_string(cfg.cap));
  out.q.assign(static_cast<std::size_t>(std::max(cfg.horizon, 0)), QTable<State>(states, mdp.num_actions(), cfg.initial_value));
  std::mt19937_64 rng(cfg.seed);
  const int decay_end = static_cast<int>(std::ceil(cfg.epsilon.decay_fraction * cfg.max_episodes));

  auto best_next = [&](const QTable<State>& q, const State& s) {
    const auto mask = mdp_action_mask(mdp, s);
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < mdp.num_actions(); ++a)
      if (mask.empty() || mask[a]) best = std::max(best, q(s, a));
    return best;
  };

  for (int ep = 0; ep < cfg.max_episodes; ++ep) {
    const double eps = cfg.epsilon.at(ep, cfg.max_episodes);
    State s = mdp.initial_state();
    double max_update = 0.0;
    for (int t = 0; t < cfg.horizon; ++t) {
      const auto mask = mdp_action_mask(mdp, s);
      const int a = act_epsilon_greedy(out.q[t].row(s), mask, eps, rng);
      auto step = mdp.step(s, a);
      const bool last = t + 1 == cfg.horizon;
      const double target = step.reward + (last ? 0.0 : cfg.discount * best_next(out.q[t + 1], step.next));
      double& q = out.q[t](s, a);
      const double delta = cfg.learning_rate * (target - q);
      q += delta;
      max_update = std::max(max_update, std::abs(delta));
      s = std::move(step.next);
    }
    out.episodes = ep + 1;
    out.last_max_update = max_update;
    if (ep + 1 >= decay_end && max_update < cfg.tolerance) break;
  }
  return out;
}

template <class State>
struct DpSolution {
  double value = 0.0;
  std::vector<int> plan;
};

/// Backward induction: the maximal undiscounted return over `horizon` frames from the
/// start state, and one maximizing action sequence (ties to the lowest action index).
template <DiscreteMdp M>
DpSolution<typename M::State> finite_horizon_dp(const M& mdp, int horizon, std::int64_t cap = 10'000'000) {
  using State = typename M::State;
  DpSolution<State> out;
  if (horizon <= 0) return out;
  const int na = mdp.num_actions();
  const std::vector<State> states = reachable_states(mdp, cap);
  if (static_cast<std::int64_t>(states.size()) * na * horizon > cap)
    throw CapacityError("state-action-horizon product exceeds the cap of " + std::to_string(cap));

  std::unordered_map<State, std::size_t, StateHash<State>> index;
  for (std::size_t i = 0; i < states.size(); ++i) index.emplace(states[i], i);
  // successor table
  const double ninf = -std::numeric_limits<double>::infinity();
  std::vector<std::size_t> succ(states.size() * na, 0);
  std::vector<double> reward(states.size() * na, ninf);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto mask = mdp_action_mask(mdp, states[i]);
    for (int a = 0; a < na; ++a) {
      if (!mask.empty() && !mask[a]) continue;
      auto step = mdp.step(states[i], a);
      succ[i * na + a] = index.at(step.next);
      reward[i * na + a] = step.reward;
    }
  }

  // value[t][i]: best return from state i with horizon - t frames to go
  std::vector<std::vector<double>> value(static_cast<std::size_t>(horizon) + 1, std::vector<double>(states.size(), 0.0));
  std::vector<std::vector<int>> choice(static_cast<std::size_t>(horizon), std::vector<int>(states.size(), -1));
  for (int t = horizon - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < states.size(); ++i) {
      double best = ninf;
      int arg = -1;
      for (int a = 0; a < na; ++a) {
        if (reward[i * na + a] == ninf) continue;
        const double v = reward[i * na + a] + value[t + 1][succ[i * na + a]];
        if (v > best) {
          best = v;
          arg = a;
        }
      }
      value[t][i] = best;
      choice[t][i] = arg;
    }
  }
  out.value = value[0][0];  // states[0] is the start state
  std::size_t i = 0;
  for (int t = 0; t < horizon; ++t) {
    const int a = choice[t][i];
    out.plan.push_back(a);
    i = succ[i * na + a];
  }
  return out;
}

/// Undiscounted return of `policy(state, t)` over `horizon` frames from the start state.
template <DiscreteMdp M, class Policy>
double rollout_return(const M& mdp, Policy&& policy, int horizon) {
  auto s = mdp.initial_state();
  double total = 0.0;
  for (int t = 0; t < horizon; ++t) {
    auto step = mdp.step(s, policy(s, t));
    total += step.reward;
    s = std::move(step.next);
  }
  return total;
}

/// Greedy return of stage-indexed Q-tables (masked argmax, ties to the lowest index).
template <DiscreteMdp M>
double greedy_return(const M& mdp, const std::vector<QTable<typename M::State>>& q, int horizon) {
  std::mt19937_64 unused(0);
  return rollout_return(
      mdp,
      [&](const typename M::State& s, int t) {
        return act_epsilon_greedy(q.at(t).row(s), mdp_action_mask(mdp, s), 0.0, unused);
      },
      horizon);
}

}  // namespace uavage::dqn
