#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uavage/channel.hpp"
#include "uavage/mdp.hpp"
#include "uavage/schemes.hpp"

namespace uavage {

enum class Profile { paper, desk };

inline Profile parse_profile(std::string_view s) {
  if (s == "paper") return Profile::paper;
  if (s == "desk") return Profile::desk;
  throw ConfigError("unknown profile '" + std::string(s) + "' (expected desk|paper)");
}

struct SweepAxes {
  std::vector<double> tx_rates;  // bits/s
  std::vector<int> uav_counts;
  std::vector<Duplex> duplex;
  std::vector<SchemeKind> schemes;
  std::vector<std::uint64_t> seeds;
};

struct RunConfig {
  ScenarioConfig scenario;  // tx rate, duplex and UAV count are overridden per sweep point
  TrainConfig train;
  SweepAxes sweep;
  std::string output_dir = "results";
  bool frame_logs = true;
};

/// Parameters of the large network scenario (300 devices, 10 UAVs, 10^5 episodes).
inline RunConfig paper_profile() {
  RunConfig c;
  ScenarioConfig& s = c.scenario;
  s.world.grid_cells_x = 11;
  s.world.grid_cells_y = 11;
  s.world.cell_size = 100.0;
  s.world.bs_height = 15.0;
  s.world.restricted_cells = {{8, 8}, {8, 9}, {9, 8}, {9, 9}};
  s.budget = LinkBudget::from_db(30.0, -100.0, 1e6, 5e6);
  s.rate = {31.25e6, Duplex::full};
  s.uav.count = 10;
  s.uav.height = 100.0;
  s.uav.velocity = 25.0;
  s.world.frame_duration = nav_time(s.world.cell_size, s.uav.velocity);
  s.num_devices = 300;
  s.max_age = 30;
  s.power_penalty = 5.0;
  s.horizon = 60;
  c.train.episodes = 100'000;
  c.train.dqn.learning_rate = 1e-4;
  c.train.dqn.discount = 0.99;
  c.sweep.tx_rates = {31.25e6};
  c.sweep.uav_counts = {10};
  c.sweep.duplex = {Duplex::full};
  c.sweep.schemes = {kAllSchemes.begin(), kAllSchemes.end()};
  c.sweep.seeds = {1};
  return c;
}

/// Desk-scale profile: 40 devices, 1-3 UAVs, 5000 episodes, 5 seeds.
inline RunConfig desk_profile() {
  RunConfig c = paper_profile();
  c.scenario.num_devices = 40;
  c.scenario.rate = {12.5e6, Duplex::full};
  c.train.episodes = 5000;
  c.train.dqn.learning_rate = 1e-3;
  c.train.dqn.batch_size = 32;
  c.train.dqn.train_every = 2;
  c.train.curve_window = 100;
  c.sweep.tx_rates = {12.5e6};
  c.sweep.uav_counts = {1, 2, 3};
  c.sweep.duplex = {Duplex::half, Duplex::full};
  c.sweep.seeds = {1, 2, 3, 4, 5};
  return c;
}

inline RunConfig profile_defaults(Profile p) { return p == Profile::desk ? desk_profile() : paper_profile(); }

/// Scenario of one sweep point.
inline ScenarioConfig scenario_for(const RunConfig& cfg, double tx_rate, Duplex duplex, int num_uavs, std::uint64_t seed) {
  ScenarioConfig s = cfg.scenario;
  s.rate = {tx_rate, duplex};
  s.uav.count = num_uavs;
  s.uav.duplex = duplex;
  if (!s.uav.start_positions.empty() && static_cast<int>(s.uav.start_positions.size()) != num_uavs)
    s.uav.start_positions.clear();
  s.world.rng_seed = derive_seed(seed, 0x776f726c64ULL);  // device placement depends on the seed only
  return s;
}

namespace detail {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
    for (auto it = j_.begin(); it != j_.end(); ++it) keys_.push_back(it.key());
  }

  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    auto it = j_.find(key);
    mark(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + ": wrong type");
    }
  }

  const json* child(const char* key) {
    mark(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys that no getter asked for.
  void finish() const {
    for (const auto& k : keys_)
      if (std::find(used_.begin(), used_.end(), k) == used_.end())
        throw ConfigError("unknown key '" + path(k) + "'");
  }

 private:
  void mark(const char* key) { used_.emplace_back(key); }

  const json& j_;
  std::string path_;
  std::vector<std::string> keys_;
  std::vector<std::string> used_;
};

inline std::vector<Cell> read_cells(const json& j, const std::string& path) {
  std::vector<Cell> out;
  if (!j.is_array()) throw ConfigError(path + ": expected a list of [x, y] cells");
  for (const auto& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer())
      throw ConfigError(path + ": expected [x, y] integer pairs");
    out.push_back({c[0].get<int>(), c[1].get<int>()});
  }
  return out;
}

}  // namespace detail

/// Overlays a JSON document onto `cfg`. Unknown keys and wrong types are errors.
inline void apply_json(RunConfig& cfg, const nlohmann::json& root) {
  using detail::Reader;
  if (root.is_null()) return;
  Reader top(root, "");
  ScenarioConfig& s = cfg.scenario;

  if (const auto* j = top.child("world")) {
    Reader r(*j, "world");
    r.get("grid_cells_x", s.world.grid_cells_x);
    r.get("grid_cells_y", s.world.grid_cells_y);
    r.get("cell_size_m", s.world.cell_size);
    r.get("bs_height_m", s.world.bs_height);
    r.get("frame_duration_s", s.world.frame_duration);
    r.get("devices", s.num_devices);
    if (const auto* c = r.child("bs_cell")) {
      auto cells = detail::read_cells(nlohmann::json::array({*c}), r.path("bs_cell"));
      s.world.bs_cell = cells.front();
    }
    if (const auto* c = r.child("restricted_cells")) s.world.restricted_cells = detail::read_cells(*c, r.path("restricted_cells"));
    r.finish();
  }
  if (const auto* j = top.child("channel")) {
    Reader r(*j, "channel");
    double beta0_db = 10.0 * std::log10(s.budget.beta0);
    double noise_dbm = 10.0 * std::log10(s.budget.noise_power) + 30.0;
    r.get("beta0_db", beta0_db);
    r.get("noise_dbm", noise_dbm);
    r.get("bandwidth_hz", s.budget.bandwidth);
    r.get("packet_bits", s.budget.packet_size);
    s.budget = LinkBudget::from_db(beta0_db, noise_dbm, s.budget.bandwidth, s.budget.packet_size);
    r.get("tx_rate_bps", s.rate.tx_rate);
    std::string duplex(to_string(s.rate.duplex));
    r.get("duplex", duplex);
    s.rate.duplex = parse_duplex(duplex);
    r.finish();
  }
  if (const auto* j = top.child("uav")) {
    Reader r(*j, "uav");
    r.get("count", s.uav.count);
    r.get("height_m", s.uav.height);
    r.get("velocity_mps", s.uav.velocity);
    if (const auto* c = r.child("start_cells")) s.uav.start_positions = detail::read_cells(*c, r.path("start_cells"));
    r.finish();
  }
  if (const auto* j = top.child("reward")) {
    Reader r(*j, "reward");
    r.get("max_age", s.max_age);
    r.get("initial_age", s.initial_age);
    r.get("power_penalty", s.power_penalty);
    r.get("weights", s.weights);
    r.finish();
  }
  if (const auto* j = top.child("train")) {
    Reader r(*j, "train");
    TrainConfig& t = cfg.train;
    r.get("episodes", t.episodes);
    r.get("horizon", s.horizon);
    r.get("learning_rate", t.dqn.learning_rate);
    r.get("discount", t.dqn.discount);
    r.get("batch_size", t.dqn.batch_size);
    r.get("replay_capacity", t.dqn.replay_capacity);
    r.get("target_sync_interval", t.dqn.target_sync_interval);
    r.get("train_every", t.dqn.train_every);
    r.get("hidden", t.dqn.hidden);
    r.get("epsilon_start", t.epsilon.start);
    r.get("epsilon_end", t.epsilon.end);
    r.get("epsilon_decay_fraction", t.epsilon.decay_fraction);
    r.get("eval_fraction", t.eval_fraction);
    r.get("curve_window", t.curve_window);
    r.get("joint_action_cap", t.joint_action_cap);
    r.get("allow_large_joint", t.allow_large_joint);
    r.get("broadcast_interval", t.broadcast_interval);
    r.get("terminal_at_horizon", t.terminal_at_horizon);
    std::string obs = s.observation == AgeObservation::cluster_max ? "cluster_max" : "per_device";
    r.get("observation", obs);
    if (obs == "cluster_max")
      s.observation = AgeObservation::cluster_max;
    else if (obs == "per_device")
      s.observation = AgeObservation::per_device;
    else
      throw ConfigError("train.observation: expected cluster_max|per_device");
    r.finish();
  }
  if (const auto* j = top.child("sweep")) {
    Reader r(*j, "sweep");
    r.get("tx_rates_bps", cfg.sweep.tx_rates);
    r.get("uav_counts", cfg.sweep.uav_counts);
    if (const auto* d = r.child("duplex")) {
      std::vector<std::string> names;
      try {
        names = d->get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("sweep.duplex: expected a list of strings");
      }
      cfg.sweep.duplex.clear();
      for (const auto& n : names) cfg.sweep.duplex.push_back(parse_duplex(n));
    }
    if (const auto* d = r.child("schemes")) {
      std::vector<std::string> names;
      try {
        names = d->get<std::vector<std::string>>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("sweep.schemes: expected a list of strings");
      }
      cfg.sweep.schemes.clear();
      for (const auto& n : names) cfg.sweep.schemes.push_back(parse_scheme(n));
    }
    r.get("seeds", cfg.sweep.seeds);
    r.finish();
  }
  if (const auto* j = top.child("output")) {
    Reader r(*j, "output");
    r.get("dir", cfg.output_dir);
    r.get("frame_logs", cfg.frame_logs);
    r.finish();
  }
  top.finish();
}

/// Checks every sweep point; throws ConfigError naming the first violation.
inline void validate_config(const RunConfig& cfg) {
  const SweepAxes& s = cfg.sweep;
  if (s.seeds.empty()) throw ConfigError("sweep.seeds must be nonempty");
  if (s.tx_rates.empty() || s.uav_counts.empty() || s.duplex.empty() || s.schemes.empty())
    throw ConfigError("every sweep axis must be nonempty");
  const TrainConfig& t = cfg.train;
  if (t.episodes < 1) throw ConfigError("train.episodes must be >= 1");
  if (!(t.dqn.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(t.dqn.discount >= 0.0 && t.dqn.discount < 1.0)) throw ConfigError("train.discount must be in [0, 1)");
  if (t.dqn.batch_size < 1 || t.dqn.replay_capacity < 1 || t.dqn.target_sync_interval < 1 || t.dqn.train_every < 1)
    throw ConfigError("train batch/replay/sync/train_every must be >= 1");
  for (int w : t.dqn.hidden)
    if (w < 1) throw ConfigError("train.hidden widths must be >= 1");
  auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(t.epsilon.start) || !in01(t.epsilon.end) || !in01(t.epsilon.decay_fraction))
    throw ConfigError("epsilon schedule values must lie in [0, 1]");
  if (!(t.eval_fraction > 0.0 && t.eval_fraction <= 1.0)) throw ConfigError("train.eval_fraction must be in (0, 1]");
  if (cfg.scenario.horizon < 1) throw ConfigError("train.horizon must be >= 1");
  if (cfg.scenario.max_age < 1) throw ConfigError("reward.max_age must be >= 1");
  if (cfg.scenario.num_devices < 1) throw ConfigError("world.devices must be >= 1");
  const LinkBudget& b = cfg.scenario.budget;
  if (!(b.beta0 > 0 && b.noise_power > 0 && b.bandwidth > 0 && b.packet_size > 0))
    throw ConfigError("channel parameters must be positive");

  const GridWorld world(cfg.scenario.world);
  for (double rate : s.tx_rates)
    for (Duplex d : s.duplex) {
      int capacity = 0;
      try {
        capacity = cluster_capacity({rate, d}, world.cell_size(), cfg.scenario.uav.velocity, b.packet_size);
      } catch (const ConfigError& e) {
        throw ConfigError("sweep point tx_rate=" + std::to_string(rate) + " duplex=" + std::string(to_string(d)) +
                          ": " + e.what());
      }
      (void)capacity;
      for (int u : s.uav_counts) {
        UavConfig uav = cfg.scenario.uav;
        uav.count = u;
        if (!uav.start_positions.empty() && static_cast<int>(uav.start_positions.size()) != u) uav.start_positions.clear();
        resolve_start_positions(uav, world);
      }
    }
}

/// Profile defaults overlaid with the JSON file at `path`, validated.
inline RunConfig parse_config(const std::filesystem::path& path, Profile profile = Profile::paper) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  RunConfig cfg = profile_defaults(profile);
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
    apply_json(cfg, j);
  }
  validate_config(cfg);
  return cfg;
}

}  // namespace uavage
