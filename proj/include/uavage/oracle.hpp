#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "uavage/dqn/tabular.hpp"
#include "uavage/mdp.hpp"
#include "uavage/schemes.hpp"

namespace uavage {

/// The smallest instance with a nontrivial schedule: 3x3 grid, one UAV, four devices in
/// two clusters of two, ten frames.
inline ScenarioConfig small_instance() {
  ScenarioConfig s;
  s.world.grid_cells_x = 3;
  s.world.grid_cells_y = 3;
  s.world.rng_seed = 7;
  s.num_devices = 4;
  s.uav.count = 1;
  s.rate = {2.5e6, Duplex::full};  // capacity 2
  s.uav.duplex = Duplex::full;
  s.max_age = 4;  // keeps the scaled age features well apart
  s.horizon = 10;
  return s;
}

struct OracleConfig {
  int dqn_episodes = 1000;
  double dqn_learning_rate = 3e-4;
  int dqn_sync_interval = 100;
  double tabular_tolerance = 0.01;  // relative to the optimum
  double dqn_tolerance = 0.05;
  std::uint64_t seed = 1;
};

struct OracleReport {
  int num_clusters = 0;
  double optimum = 0.0;  // finite-horizon DP
  double tabular = 0.0;  // greedy return of tabular Q-learning
  double dqn = 0.0;      // greedy return of the trained network
  int tabular_episodes = 0;

  static double gap(double value, double optimum) { return std::abs(value - optimum) / std::abs(optimum); }
  double tabular_gap() const { return gap(tabular, optimum); }
  double dqn_gap() const { return gap(dqn, optimum); }
};

/// Solves the small instance three ways. Returns are undiscounted sums of team reward
/// (negative), so the gaps are relative to |optimum|.
inline OracleReport run_oracle(const OracleConfig& cfg = {}) {
  const Environment env(small_instance());
  const int T = env.config().horizon;
  OracleReport rep;
  rep.num_clusters = env.num_clusters();

  const DiscreteSwarmMdp mdp(env);
  rep.optimum = dqn::finite_horizon_dp(mdp, T).value;

  dqn::TabularConfig tc;
  tc.horizon = T;
  tc.discount = 0.99;
  tc.seed = derive_seed(cfg.seed, 0x7461627);
  const auto tab = dqn::tabular_q_learning(mdp, tc);
  rep.tabular = dqn::greedy_return(mdp, tab.q, T);
  rep.tabular_episodes = tab.episodes;

  TrainConfig train;
  train.episodes = cfg.dqn_episodes;
  train.seed = cfg.seed;
  train.dqn.learning_rate = cfg.dqn_learning_rate;
  train.dqn.batch_size = 32;
  train.dqn.target_sync_interval = cfg.dqn_sync_interval;
  SchemeRunner runner(env, SchemeKind::c_rl, train);
  for (int ep = 0; ep < train.episodes; ++ep) runner.run_episode(train.epsilon.at(ep, train.episodes), true);
  const EpisodeLog greedy = runner.run_episode(0.0, false);
  rep.dqn = greedy.returns.at(0);
  return rep;
}

}  // namespace uavage
