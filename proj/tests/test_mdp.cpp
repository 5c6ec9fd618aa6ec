#include <gtest/gtest.h>

#include <random>

#include "uavage/mdp.hpp"

using namespace uavage;

namespace {

ScenarioConfig small(int devices, double rate, int uavs = 1) {
  ScenarioConfig s;
  s.world.grid_cells_x = s.world.grid_cells_y = 5;
  s.world.rng_seed = 11;
  s.num_devices = devices;
  s.rate = {rate, Duplex::full};
  s.uav.count = uavs;
  s.horizon = 8;
  return s;
}

int valid_directions(const std::vector<std::uint8_t>& mask, int C) {
  int n = 0;
  for (int d = 0; d < kNumDirections; ++d) n += mask[d * C];
  return n;
}

}  // namespace

TEST(Encoding, BsCenterFreshAges) {
  ScenarioConfig s = small(6, 2.5e6);  // capacity 2 -> 3 clusters
  s.world.grid_cells_x = s.world.grid_cells_y = 11;
  const Environment env(s);
  AgentState st{env.world().bs_cell(), env.initial_aoi().ages, {}};
  const auto v = encode_state(st, env);
  ASSERT_EQ(v.size(), 2u + 3u);
  EXPECT_DOUBLE_EQ(v[0], 0.5);
  EXPECT_DOUBLE_EQ(v[1], 0.5);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(v[2 + k], 1.0 / 30);
}

TEST(Encoding, SaturatedAgesAreOne) {
  const Environment env(small(6, 2.5e6));
  AgentState st{{0, 0}, std::vector<int>(6, env.max_age()), {}};
  const auto v = encode_state(st, env);
  for (std::size_t i = 2; i < v.size(); ++i) EXPECT_DOUBLE_EQ(v[i], 1.0);
  for (double x : v) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
}

TEST(Encoding, PositionLocality) {
  const Environment env(small(6, 2.5e6));
  std::vector<int> ages{3, 1, 4, 1, 5, 9};
  const auto a = encode_state({{1, 2}, ages, {}}, env), b = encode_state({{3, 0}, ages, {}}, env);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_NE(a[0], b[0]);
  EXPECT_NE(a[1], b[1]);
  for (std::size_t i = 2; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Encoding, ClusterMaxAndPerDevice) {
  ScenarioConfig s = small(6, 2.5e6);
  const Environment env(s);
  std::vector<int> ages{3, 1, 4, 1, 5, 9};
  const auto v = encode_state({{0, 0}, ages, {}}, env);
  for (int k = 0; k < env.num_clusters(); ++k) {
    int m = 0;
    for (int id : env.clusters()[k].member_ids) m = std::max(m, ages[id]);
    EXPECT_DOUBLE_EQ(v[2 + k], m / 30.0);
  }
  s.observation = AgeObservation::per_device;
  const Environment env2(s);
  const auto w = encode_state({{0, 0}, ages, {}}, env2);
  ASSERT_EQ(w.size(), 8u);
  for (int d = 0; d < 6; ++d) EXPECT_DOUBLE_EQ(w[2 + d], ages[d] / 30.0);
}

TEST(Encoding, PeerOneHots) {
  const Environment env(small(6, 2.5e6, 3));
  const int C = env.num_clusters();
  std::vector<std::optional<AgentAction>> peers{AgentAction{Direction::east, 2}, std::nullopt};
  AgentState st{{0, 0}, env.initial_aoi().ages, peers};
  const auto v = encode_state(st, env, 2);
  ASSERT_EQ(static_cast<int>(v.size()), observation_width(env, 1, 2));
  const int base = 2 + C;
  for (int i = 0; i < 2 * 5 * C; ++i) EXPECT_EQ(v[base + i], i == action_index({Direction::east, 2}, C) ? 1.0 : 0.0);
}

TEST(Actions, SpaceSizes) {
  EXPECT_EQ(action_space_size(12, 1), 60);
  EXPECT_EQ(action_space_size(12, 3), 216000);
  EXPECT_EQ(action_space_size(1, 1), 5);
  EXPECT_THROW(action_space_size(12, 4), DimensionalityError);
  try {
    action_space_size(12, 4);
  } catch (const DimensionalityError& e) {
    EXPECT_NE(std::string(e.what()).find("dimensionality"), std::string::npos);
  }
  EXPECT_EQ(action_space_size(12, 4, 20'000'000), 12'960'000);
}

TEST(Actions, IndexRoundTrip) {
  for (int C = 1; C < 7; ++C)
    for (int i = 0; i < 5 * C; ++i) EXPECT_EQ(action_index(decode_action(i, C), C), i);
  for (std::int64_t j = 0; j < 15 * 15 * 15; ++j) {
    const auto a = decode_joint_action(j, 3, 3);
    EXPECT_EQ(joint_action_index(a, 3), j);
  }
  // UAV 0 is the least significant digit
  EXPECT_EQ(decode_joint_action(1, 2, 3)[0], decode_action(1, 3));
  EXPECT_EQ(decode_joint_action(15, 2, 3)[1], decode_action(1, 3));
}

TEST(Mask, CornerInteriorEnclosed) {
  ScenarioConfig s = small(6, 2.5e6);
  s.world.restricted_cells = {{3, 4}, {4, 3}};
  const Environment env(s);
  const int C = env.num_clusters();
  EXPECT_EQ(valid_directions(valid_action_mask(Cell{0, 0}, env.world(), C), C), 3);
  EXPECT_EQ(valid_directions(valid_action_mask(Cell{2, 2}, env.world(), C), C), 5);
  const auto enclosed = valid_action_mask(Cell{4, 4}, env.world(), C);
  EXPECT_EQ(valid_directions(enclosed, C), 1);
  for (int k = 0; k < C; ++k) EXPECT_TRUE(enclosed[action_index({Direction::hover, k}, C)]);
  for (int d = 0; d < 5; ++d)
    for (int k = 1; k < C; ++k) EXPECT_EQ(enclosed[d * C + k], enclosed[d * C]);  // cluster never restricts
}

TEST(Step, FullService) {
  ScenarioConfig s = small(5, 12.5e6);  // capacity 10: one cluster
  const Environment env(s);
  ASSERT_EQ(env.num_clusters(), 1);
  AoiState a{{4, 7, 2, 30, 9}, 30};
  const std::vector<Cell> pos{{2, 2}};
  const std::vector<AgentAction> act{{Direction::hover, 0}};
  const StepResult r = env_step(env, pos, act, a);
  EXPECT_EQ(r.aoi.ages, std::vector<int>(5, 1));
  EXPECT_EQ(r.positions[0], (Cell{2, 2}));
}

TEST(Step, DuplicateClusterServedOnce) {
  const Environment one(small(8, 2.5e6, 1)), two(small(8, 2.5e6, 2));
  const AoiState a{{3, 3, 3, 3, 3, 3, 3, 3}, 30};
  const std::vector<Cell> p1{{2, 2}}, p2{{2, 2}, {1, 1}};
  const StepResult r1 = env_step(one, p1, std::vector<AgentAction>{{Direction::hover, 1}}, a);
  const StepResult r2 = env_step(two, p2, std::vector<AgentAction>{{Direction::hover, 1}, {Direction::north, 1}}, a);
  EXPECT_EQ(r1.aoi.ages, r2.aoi.ages);
  for (int d = 0; d < 8; ++d) {
    const bool member = one.devices()[d].cluster_id == 1;
    EXPECT_EQ(r2.aoi.ages[d], member ? 1 : 4);
  }
  EXPECT_GT(r2.power_terms[0], 0.0);
  EXPECT_EQ(r2.power_terms[1], 0.0);  // the second UAV found the cluster taken
  EXPECT_DOUBLE_EQ(r2.rewards[0], -r2.age_term - r2.power_terms[0]);
  EXPECT_DOUBLE_EQ(r2.rewards[1], -r2.age_term);
}

TEST(Step, MoveIntoRestrictedStillServes) {
  ScenarioConfig s = small(4, 2.5e6);
  s.world.restricted_cells = {{2, 3}};
  const Environment env(s);
  const AoiState a{{5, 5, 5, 5}, 30};
  const std::vector<Cell> pos{{2, 2}};
  const StepResult r = env_step(env, pos, std::vector<AgentAction>{{Direction::north, 0}}, a);
  EXPECT_EQ(r.positions[0], (Cell{2, 2}));
  for (int id : env.clusters()[0].member_ids) EXPECT_EQ(r.aoi.ages[id], 1);
}

TEST(Step, PowersMatchChannelAtDestination) {
  const Environment env(small(4, 2.5e6));
  const AoiState a = env.initial_aoi();
  const std::vector<Cell> pos{{0, 0}};
  const StepResult r = env_step(env, pos, std::vector<AgentAction>{{Direction::east, 0}}, a);
  const Point p = env.world().cell_center({1, 0});
  double sum = 0;
  for (int id : env.clusters()[0].member_ids) {
    const Point d = env.devices()[id].position;
    const double expect = tx_power(gain_device(100.0, std::hypot(d.x - p.x, d.y - p.y), env.budget()), env.budget());
    EXPECT_NEAR(r.powers[id] / expect, 1.0, 1e-12);
    sum += expect;
  }
  EXPECT_NEAR(r.power_terms[0] / (5.0 / env.clusters()[0].member_ids.size() * sum), 1.0, 1e-12);
}

TEST(Step, RandomRolloutInvariants) {
  ScenarioConfig s = small(20, 5e6, 3);
  s.world.restricted_cells = {{0, 4}, {1, 4}};
  const Environment env(s);
  std::mt19937 rng(3);
  std::vector<Cell> pos = env.start_positions();
  AoiState a = env.initial_aoi();
  for (int t = 0; t < 2000; ++t) {
    std::vector<AgentAction> act;
    for (int u = 0; u < 3; ++u)
      act.push_back({kDirections[rng() % 5], static_cast<int>(rng() % env.num_clusters())});
    StepResult r = env_step(env, pos, act, a, t);
    for (const Cell& c : r.positions) ASSERT_TRUE(env.world().is_valid(c));
    for (int x : r.aoi.ages) {
      ASSERT_GE(x, 1);
      ASSERT_LE(x, env.max_age());
    }
    for (double rw : r.rewards) ASSERT_TRUE(std::isfinite(rw));
    pos = r.positions;
    a = r.aoi;
  }
}
