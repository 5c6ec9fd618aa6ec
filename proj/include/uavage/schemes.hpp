#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "uavage/dqn/learner.hpp"
#include "uavage/dqn/policy.hpp"
#include "uavage/mdp.hpp"

namespace uavage {

/// Training topologies plus the random-walk baseline.
enum class SchemeKind {
  c_rl,         // one joint learner at the BS over all UAVs
  co_marl,      // per-UAV learners, serial action passing, BS age broadcast
  pco_marl,     // per-UAV learners, actions to BS only, BS age broadcast
  d_marl,       // per-UAV learners, no sharing, local age beliefs
  random_walk,  // uniform valid actions, no learning
};

inline constexpr std::array<SchemeKind, 5> kAllSchemes{SchemeKind::c_rl, SchemeKind::co_marl, SchemeKind::pco_marl,
                                                       SchemeKind::d_marl, SchemeKind::random_walk};

inline std::string_view to_string(SchemeKind s) {
  switch (s) {
    case SchemeKind::c_rl: return "C-RL";
    case SchemeKind::co_marl: return "Co-MARL";
    case SchemeKind::pco_marl: return "PCo-MARL";
    case SchemeKind::d_marl: return "D-MARL";
    case SchemeKind::random_walk: return "RW";
  }
  return "?";
}

inline SchemeKind parse_scheme(std::string_view name) {
  std::string n;
  for (char c : name)
    if (c != '-' && c != '_') n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (n == "crl") return SchemeKind::c_rl;
  if (n == "comarl") return SchemeKind::co_marl;
  if (n == "pcomarl") return SchemeKind::pco_marl;
  if (n == "dmarl") return SchemeKind::d_marl;
  if (n == "rw" || n == "randomwalk") return SchemeKind::random_walk;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected C-RL|Co-MARL|PCo-MARL|D-MARL|RW)");
}

/// Control messages per UAV per episode (relayed data excluded).
inline int messages_per_uav(SchemeKind s) {
  switch (s) {
    case SchemeKind::c_rl: return 1;         // policy/action download from the BS
    case SchemeKind::co_marl: return 4;      // action upload, age broadcast, sync, peer-action relay
    case SchemeKind::pco_marl: return 3;     // action upload, age broadcast, sync
    case SchemeKind::d_marl: return 2;       // position report, sync beacon
    case SchemeKind::random_walk: return 1;  // position report
  }
  return 0;
}

inline std::int64_t count_messages(SchemeKind s, int num_uavs) {
  if (num_uavs < 1) throw std::invalid_argument("num_uavs must be >= 1");
  return static_cast<std::int64_t>(messages_per_uav(s)) * num_uavs;
}

/// MACs of `forward_samples` single-sample forward passes and `backward_samples`
/// backward passes (each backward costs twice a forward).
inline std::int64_t count_macs(std::span<const int> widths, std::int64_t forward_samples,
                               std::int64_t backward_samples) {
  return dqn::forward_macs(widths) * (forward_samples + 2 * backward_samples);
}

struct AccountingCounters {
  std::int64_t messages = 0;
  std::int64_t mac_ops = 0;
  double wall_time = 0.0;  // seconds, episode loop only

  AccountingCounters& operator+=(const AccountingCounters& o) {
    messages += o.messages;
    mac_ops += o.mac_ops;
    wall_time += o.wall_time;
    return *this;
  }
};

struct TrainConfig {
  dqn::DqnConfig dqn;
  int episodes = 5000;
  dqn::EpsilonSchedule epsilon;
  std::uint64_t seed = 0;
  double eval_fraction = 0.1;
  int curve_window = 50;
  std::int64_t joint_action_cap = kDefaultJointActionCap;
  bool allow_large_joint = false;  // override the C-RL refusal
  int broadcast_interval = 1;      // frames between BS age broadcasts (PCo-MARL)
  // The horizon is a time limit, not an absorbing state: observations carry no clock, so
  // cutting the bootstrap at frame T makes one observation's target depend on the frame.
  // Set to cut it anyway.
  bool terminal_at_horizon = false;
};

struct EpisodeLog {
  std::vector<FrameRecord> frames;
  std::vector<double> returns;  // per UAV, undiscounted
  double mean_weighted_age = 0.0;
  double mean_total_power = 0.0;
  AccountingCounters counters;
};

namespace detail {
enum : std::uint64_t { kInitStream = 1, kReplayStream = 2, kPolicyStream = 3 };
}

/// Executes episodes of one scheme, owning its learners and RNG streams.
class SchemeRunner {
 public:
  using Learner = dqn::DqnLearner<float>;

  SchemeRunner(const Environment& env, SchemeKind scheme, TrainConfig config)
      : env_(&env), scheme_(scheme), config_(std::move(config)) {
    const int U = env.num_uavs();
    const int C = env.num_clusters();
    if (config_.broadcast_interval < 1) throw ConfigError("broadcast_interval must be >= 1");
    int learners = 0, input = 0, output = 0;
    switch (scheme_) {
      case SchemeKind::c_rl: {
        const std::int64_t cap =
            config_.allow_large_joint ? std::numeric_limits<int>::max() : config_.joint_action_cap;
        output = static_cast<int>(action_space_size(C, U, cap));
        input = observation_width(env, U, 0);
        learners = 1;
        break;
      }
      case SchemeKind::co_marl:
        output = env.actions_per_uav();
        input = observation_width(env, 1, U - 1);
        learners = U;
        break;
      case SchemeKind::pco_marl:
      case SchemeKind::d_marl:
        output = env.actions_per_uav();
        input = observation_width(env, 1, 0);
        learners = U;
        break;
      case SchemeKind::random_walk:
        break;
    }
    for (int i = 0; i < learners; ++i)
      learners_.emplace_back(input, output, config_.dqn, derive_seed(config_.seed, detail::kInitStream, i),
                             derive_seed(config_.seed, detail::kReplayStream, i));
    for (int u = 0; u < U; ++u) policy_rng_.emplace_back(derive_seed(config_.seed, detail::kPolicyStream, u));
  }

  SchemeKind scheme() const { return scheme_; }
  const Environment& environment() const { return *env_; }
  const TrainConfig& config() const { return config_; }
  const std::vector<Learner>& learners() const { return learners_; }
  std::int64_t frames_run() const { return frames_run_; }
  const AccountingCounters& totals() const { return totals_; }

  /// Observation of UAV `u` as its scheme sees it.
  std::vector<double> observe(int u, std::span<const Cell> cells, const AoiState& true_ages,
                              std::span<const AoiState> beliefs, const AoiState& broadcast,
                              std::span<const std::optional<AgentAction>> peers) const {
    const Environment& env = *env_;
    switch (scheme_) {
      case SchemeKind::c_rl:
        return encode_observation(env, cells, true_ages.ages, {}, 0);
      case SchemeKind::co_marl:
        return encode_observation(env, cells.subspan(u, 1), true_ages.ages, peers.first(u), env.num_uavs() - 1);
      case SchemeKind::pco_marl:
        return encode_observation(env, cells.subspan(u, 1), broadcast.ages, {}, 0);
      case SchemeKind::d_marl:
        return encode_observation(env, cells.subspan(u, 1), beliefs[u].ages, {}, 0);
      case SchemeKind::random_walk:
        break;
    }
    return {};
  }

  EpisodeLog run_episode(double epsilon, bool learn = true, bool keep_frames = false) {
    const Environment& env = *env_;
    const int U = env.num_uavs();
    const int C = env.num_clusters();
    const auto t0 = std::chrono::steady_clock::now();
    dqn::MacCounter macs;

    std::vector<Cell> cells = env.start_positions();
    AoiState aoi = env.initial_aoi();
    AoiState broadcast = aoi;
    std::vector<AoiState> beliefs(scheme_ == SchemeKind::d_marl ? U : 0, aoi);

    struct Pending {
      std::vector<double> obs;
      int action = 0;
      double reward = 0.0;
    };
    std::vector<std::optional<Pending>> pending(learners_.size());
    auto complete = [&](std::size_t i, const std::vector<double>& next_obs, const std::vector<std::uint8_t>& mask,
                        bool terminal) {
      if (!learn || !pending[i]) return;
      learners_[i].remember(pending[i]->obs, pending[i]->action, pending[i]->reward, next_obs, mask, terminal);
      pending[i].reset();
    };

    EpisodeLog log;
    log.returns.assign(static_cast<std::size_t>(U), 0.0);
    std::vector<AgentAction> actions(static_cast<std::size_t>(U));
    std::vector<std::optional<AgentAction>> peers(static_cast<std::size_t>(std::max(U - 1, 0)));
    double age_sum = 0.0, power_sum = 0.0;

    for (int t = 0; t < env.horizon(); ++t) {
      if (scheme_ == SchemeKind::c_rl) {
        auto obs = observe(0, cells, aoi, beliefs, broadcast, {});
        auto mask = joint_action_mask(cells, env);
        complete(0, obs, mask, false);
        const int a = learners_[0].act(obs, mask, epsilon, policy_rng_[0], &macs);
        actions = decode_joint_action(a, U, C);
        pending[0] = Pending{std::move(obs), a, 0.0};
      } else {
        std::fill(peers.begin(), peers.end(), std::nullopt);
        for (int u = 0; u < U; ++u) {
          auto mask = valid_action_mask(cells[u], env.world(), C);
          int a = 0;
          if (scheme_ == SchemeKind::random_walk) {
            const std::vector<double> flat(mask.size(), 0.0);
            a = dqn::act_epsilon_greedy(flat, mask, 1.0, policy_rng_[u]);
          } else {
            auto obs = observe(u, cells, aoi, beliefs, broadcast, peers);
            complete(u, obs, mask, false);
            a = learners_[u].act(obs, mask, epsilon, policy_rng_[u], &macs);
            pending[u] = Pending{std::move(obs), a, 0.0};
          }
          actions[u] = decode_action(a, C);
          if (u < U - 1) peers[u] = actions[u];
        }
      }

      StepResult step = env_step(env, cells, actions, aoi, t);
      if (scheme_ == SchemeKind::c_rl) {
        if (pending[0]) pending[0]->reward = step.joint_reward();
      } else {
        for (std::size_t i = 0; i < learners_.size(); ++i)
          if (pending[i]) pending[i]->reward = step.rewards[i];
      }
      for (int u = 0; u < U; ++u) log.returns[u] += step.rewards[u];
      age_sum += step.age_term;
      power_sum += step.record.total_power;

      if (scheme_ == SchemeKind::d_marl) {
        for (int u = 0; u < U; ++u) beliefs[u] = update_aoi(beliefs[u], env.clusters()[actions[u].cluster].member_ids);
      }
      aoi = std::move(step.aoi);
      cells = std::move(step.positions);
      if ((t + 1) % config_.broadcast_interval == 0) broadcast = aoi;
      if (keep_frames) log.frames.push_back(std::move(step.record));

      ++frames_run_;
      if (learn && frames_run_ % config_.dqn.train_every == 0)
        for (auto& l : learners_) l.train_step(&macs);
    }

    // Close every open transition with the final observation.
    const bool terminal = config_.terminal_at_horizon;
    if (learn) {
      if (scheme_ == SchemeKind::c_rl) {
        if (!learners_.empty()) complete(0, observe(0, cells, aoi, beliefs, broadcast, {}), joint_action_mask(cells, env), terminal);
      } else {
        std::fill(peers.begin(), peers.end(), std::nullopt);
        for (std::size_t u = 0; u < learners_.size(); ++u)
          complete(u, observe(static_cast<int>(u), cells, aoi, beliefs, broadcast, peers),
                   valid_action_mask(cells[u], env.world(), C), terminal);
      }
    }

    const int T = std::max(env.horizon(), 1);
    log.mean_weighted_age = age_sum / T;
    log.mean_total_power = power_sum / T;
    log.counters.messages = count_messages(scheme_, U);
    log.counters.mac_ops = macs.macs;
    log.counters.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    totals_ += log.counters;
    return log;
  }

  void save(std::ostream& os) const {
    os << "runner 1 " << to_string(scheme_) << ' ' << env_->num_uavs() << ' ' << frames_run_ << ' '
       << totals_.messages << ' ' << totals_.mac_ops << '\n';
    for (const auto& r : policy_rng_) dqn::io::write_rng(os, r);
    os << "learners " << learners_.size() << '\n';
    for (const auto& l : learners_) l.save(os);
  }

  void load(std::istream& is) {
    dqn::io::expect(is, "runner");
    if (dqn::io::read_int(is) != 1) throw std::runtime_error("unsupported runner checkpoint version");
    if (parse_scheme(dqn::io::next_token(is)) != scheme_) throw std::runtime_error("checkpoint scheme mismatch");
    if (dqn::io::read_int(is) != env_->num_uavs()) throw std::runtime_error("checkpoint UAV count mismatch");
    frames_run_ = dqn::io::read_int(is);
    totals_.messages = dqn::io::read_int(is);
    totals_.mac_ops = dqn::io::read_int(is);
    for (auto& r : policy_rng_) dqn::io::read_rng(is, r);
    dqn::io::expect(is, "learners");
    if (dqn::io::read_int(is) != static_cast<long long>(learners_.size()))
      throw std::runtime_error("checkpoint learner count mismatch");
    for (auto& l : learners_) l.load(is);
  }

 private:
  const Environment* env_;
  SchemeKind scheme_;
  TrainConfig config_;
  std::vector<Learner> learners_;
  std::vector<std::mt19937_64> policy_rng_;
  std::int64_t frames_run_ = 0;
  AccountingCounters totals_;
};

struct CurvePoint {
  int episode_end = 0;  // exclusive
  double epsilon = 0.0;
  double mean_weighted_age = 0.0;
};

struct TrainResult {
  std::vector<double> episode_ages;   // mean weighted age of each episode
  std::vector<double> episode_powers;
  std::vector<CurvePoint> curve;
  double eval_mean_age = 0.0;         // mean over the final eval_fraction of episodes
  double eval_mean_power = 0.0;
  AccountingCounters totals;
  AccountingCounters per_episode;     // totals / episodes
  EpisodeLog last_episode;            // with per-frame records
};

/// Episode-budget driver with epsilon annealing and checkpoint/resume.
class Trainer {
 public:
  Trainer(const Environment& env, SchemeKind scheme, TrainConfig config)
      : runner_(env, scheme, std::move(config)) {
    if (runner_.config().episodes < 1) throw ConfigError("episodes must be >= 1");
  }

  const SchemeRunner& runner() const { return runner_; }
  int next_episode() const { return next_episode_; }
  bool done() const { return next_episode_ >= runner_.config().episodes; }

  double epsilon_for(int episode) const {
    return runner_.config().epsilon.at(episode, runner_.config().episodes);
  }

  /// Runs one training episode; the final episode keeps its per-frame records.
  const EpisodeLog& step() {
    const int ep = next_episode_++;
    const bool last = done();
    last_ = runner_.run_episode(epsilon_for(ep), runner_.scheme() != SchemeKind::random_walk, last);
    ages_.push_back(last_.mean_weighted_age);
    powers_.push_back(last_.mean_total_power);
    epsilons_.push_back(epsilon_for(ep));
    return last_;
  }

  void run_to_end() {
    while (!done()) step();
  }

  TrainResult result() const {
    TrainResult r;
    r.episode_ages = ages_;
    r.episode_powers = powers_;
    const int n = static_cast<int>(ages_.size());
    const int window = std::max(1, runner_.config().curve_window);
    for (int b = 0; b < n; b += window) {
      const int e = std::min(n, b + window);
      double s = 0.0;
      for (int i = b; i < e; ++i) s += ages_[i];
      r.curve.push_back({e, epsilons_[e - 1], s / (e - b)});
    }
    if (n > 0) {
      const int k = std::clamp(static_cast<int>(std::ceil(runner_.config().eval_fraction * n)), 1, n);
      double sa = 0.0, sp = 0.0;
      for (int i = n - k; i < n; ++i) {
        sa += ages_[i];
        sp += powers_[i];
      }
      r.eval_mean_age = sa / k;
      r.eval_mean_power = sp / k;
      r.totals = runner_.totals();
      r.per_episode.messages = r.totals.messages / n;
      r.per_episode.mac_ops = r.totals.mac_ops / n;
      r.per_episode.wall_time = r.totals.wall_time / n;
    }
    r.last_episode = last_;
    return r;
  }

  /// Versioned text checkpoint: trainer progress, runner RNGs and every learner.
  void save(std::ostream& os) const {
    os << "uavage-checkpoint 1\n";
    os << "trainer " << next_episode_ << '\n';
    dqn::io::write_vec(os, ages_);
    dqn::io::write_vec(os, powers_);
    dqn::io::write_vec(os, epsilons_);
    runner_.save(os);
  }

  void load(std::istream& is) {
    dqn::io::expect(is, "uavage-checkpoint");
    if (dqn::io::read_int(is) != 1) throw std::runtime_error("unsupported checkpoint version");
    dqn::io::expect(is, "trainer");
    next_episode_ = static_cast<int>(dqn::io::read_int(is));
    ages_ = dqn::io::read_vec<double>(is);
    powers_ = dqn::io::read_vec<double>(is);
    epsilons_ = dqn::io::read_vec<double>(is);
    runner_.load(is);
  }

 private:
  SchemeRunner runner_;
  int next_episode_ = 0;
  std::vector<double> ages_;
  std::vector<double> powers_;
  std::vector<double> epsilons_;
  EpisodeLog last_;
};

inline TrainResult train(const Environment& env, SchemeKind scheme, const TrainConfig& config) {
  Trainer trainer(env, scheme, config);
  trainer.run_to_end();
  return trainer.result();
}

}  // namespace uavage
