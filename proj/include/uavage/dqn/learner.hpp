#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <type_traits>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "uavage/dqn/adam.hpp"
#include "uavage/dqn/mlp.hpp"
#include "uavage/dqn/policy.hpp"
#include "uavage/dqn/replay.hpp"
#include "uavage/dqn/td_loss.hpp"

namespace uavage::dqn {

struct DqnConfig {
  std::vector<int> hidden{64, 128, 64};
  double learning_rate = 1e-4;
  double discount = 0.99;
  int batch_size = 64;
  std::size_t replay_capacity = 50'000;
  int target_sync_interval = 500;  // learner steps between hard target copies
  int train_every = 1;             // environment frames between learner steps
};

/// Hard copy of the online network into the target network.
template <class Scalar>
MlpParams<Scalar> sync_target(const MlpParams<Scalar>& params) {
  return params;
}

/// Vanilla DQN agent: online and target networks, replay buffer, Adam.
template <class Scalar = float>
class DqnLearner {
 public:
  DqnLearner(int input_width, int output_width, DqnConfig config, std::uint64_t init_seed,
             std::uint64_t replay_seed)
      : config_(std::move(config)),
        online_(make_mlp<Scalar>(layer_widths(input_width, config_.hidden, output_width), init_seed)),
        target_(sync_target(online_)),
        adam_(AdamState<Scalar>::like(online_)),
        replay_(config_.replay_capacity, replay_seed) {
    if (!(config_.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
    if (!(config_.discount >= 0.0 && config_.discount < 1.0)) throw std::invalid_argument("discount must be in [0,1)");
    if (config_.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (config_.target_sync_interval < 1) throw std::invalid_argument("target sync interval must be >= 1");
  }

  const DqnConfig& config() const { return config_; }
  const MlpParams<Scalar>& online() const { return online_; }
  const MlpParams<Scalar>& target() const { return target_; }
  MlpParams<Scalar>& online_mut() { return online_; }
  const ReplayBuffer<Scalar>& replay() const { return replay_; }
  std::int64_t learner_steps() const { return learner_steps_; }
  std::int64_t target_syncs() const { return target_syncs_; }
  int input_width() const { return online_.input_width(); }
  int output_width() const { return online_.output_width(); }

  Vector<Scalar> q_values(std::span<const double> obs, MacCounter* counter = nullptr) const {
    return forward(online_, obs, counter);
  }

  int act(std::span<const double> obs, std::span<const std::uint8_t> mask, double epsilon, std::mt19937_64& rng,
          MacCounter* counter = nullptr) const {
    const Vector<Scalar> q = q_values(obs, counter);
    return act_epsilon_greedy(q, mask, epsilon, rng);
  }

  void remember(std::span<const double> obs, int action, double reward, std::span<const double> next_obs,
                std::span<const std::uint8_t> next_mask, bool terminal) {
    Transition<Scalar> t;
    t.state.assign(obs.begin(), obs.end());
    t.action = action;
    t.reward = static_cast<Scalar>(reward);
    t.next_state.assign(next_obs.begin(), next_obs.end());
    t.next_mask.assign(next_mask.begin(), next_mask.end());
    t.terminal = terminal;
    replay_.push(std::move(t));
  }

  /// One gradient step on a sampled batch; no-op (returns false) until the buffer holds a batch.
  bool train_step(MacCounter* counter = nullptr, Scalar* loss_out = nullptr) {
    const auto n = static_cast<std::size_t>(config_.batch_size);
    if (!replay_.can_sample(n)) return false;
    const auto batch = replay_.sample(n);
    LossResult<Scalar> r =
        td_loss<Scalar>(online_, target_, batch, static_cast<Scalar>(config_.discount), counter);
    adam_step(online_, r.gradients, adam_, config_.learning_rate);
    if (loss_out) *loss_out = r.loss;
    ++learner_steps_;
    if (learner_steps_ % config_.target_sync_interval == 0) {
      target_ = sync_target(online_);
      ++target_syncs_;
    }
    return true;
  }

  void save(std::ostream& os) const;
  void load(std::istream& is);

 private:
  DqnConfig config_;
  MlpParams<Scalar> online_;
  MlpParams<Scalar> target_;
  AdamState<Scalar> adam_;
  ReplayBuffer<Scalar> replay_;
  std::int64_t learner_steps_ = 0;
  std::int64_t target_syncs_ = 0;
};

// ---------------------------------------------------------------------------
// Textual checkpoint records. Reals are written as hexadecimal floating point so
// a save/load cycle is bit exact.

namespace io {

inline void write_real(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf;
}

inline std::string next_token(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("checkpoint truncated");
  return tok;
}

inline void expect(std::istream& is, const std::string& word) {
  const std::string tok = next_token(is);
  if (tok != word) throw std::runtime_error("checkpoint: expected '" + word + "', found '" + tok + "'");
}

inline double read_real(std::istream& is) {
  const std::string tok = next_token(is);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') throw std::runtime_error("checkpoint: bad real '" + tok + "'");
  return v;
}

inline long long read_int(std::istream& is) {
  const std::string tok = next_token(is);
  std::size_t pos = 0;
  const long long v = std::stoll(tok, &pos);
  if (pos != tok.size()) throw std::runtime_error("checkpoint: bad integer '" + tok + "'");
  return v;
}

template <class Derived>
void write_dense(std::ostream& os, const Eigen::DenseBase<Derived>& m) {
  os << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    os << ' ';
    write_real(os, static_cast<double>(m.derived().data()[i]));
  }
  os << '\n';
}

template <class M>
void read_dense(std::istream& is, M& m) {
  const auto rows = read_int(is), cols = read_int(is);
  m.resize(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<typename M::Scalar>(read_real(is));
}

template <class Scalar>
void write_mlp(std::ostream& os, const MlpParams<Scalar>& p) {
  os << "mlp " << p.num_layers() << '\n';
  for (int l = 0; l < p.num_layers(); ++l) {
    write_dense(os, p.weights[l]);
    write_dense(os, p.biases[l]);
  }
}

template <class Scalar>
MlpParams<Scalar> read_mlp(std::istream& is) {
  expect(is, "mlp");
  const auto layers = read_int(is);
  MlpParams<Scalar> p;
  p.weights.resize(static_cast<std::size_t>(layers));
  p.biases.resize(static_cast<std::size_t>(layers));
  for (long long l = 0; l < layers; ++l) {
    read_dense(is, p.weights[l]);
    read_dense(is, p.biases[l]);
  }
  return p;
}

template <class T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
  os << v.size();
  for (const T& x : v) {
    os << ' ';
    if constexpr (std::is_floating_point_v<T>)
      write_real(os, static_cast<double>(x));
    else
      os << static_cast<long long>(x);
  }
  os << '\n';
}

template <class T>
std::vector<T> read_vec(std::istream& is) {
  const auto n = read_int(is);
  std::vector<T> v(static_cast<std::size_t>(n));
  for (auto& x : v) {
    if constexpr (std::is_floating_point_v<T>)
      x = static_cast<T>(read_real(is));
    else
      x = static_cast<T>(read_int(is));
  }
  return v;
}

inline void write_rng(std::ostream& os, const std::mt19937_64& rng) {
  std::ostringstream ss;
  ss << rng;
  os << "rng " << ss.str() << '\n';
}

inline void read_rng(std::istream& is, std::mt19937_64& rng) {
  expect(is, "rng");
  // mt19937_64 state is 312 words plus the position index
  std::ostringstream ss;
  for (int i = 0; i < 313; ++i) ss << next_token(is) << ' ';
  std::istringstream in(ss.str());
  in >> rng;
  if (!in) throw std::runtime_error("checkpoint: bad rng state");
}

}  // namespace io

template <class Scalar>
void DqnLearner<Scalar>::save(std::ostream& os) const {
  os << "learner 1\n";
  os << "config ";
  io::write_vec(os, config_.hidden);
  io::write_real(os, config_.learning_rate);
  os << ' ';
  io::write_real(os, config_.discount);
  os << ' ' << config_.batch_size << ' ' << config_.replay_capacity << ' ' << config_.target_sync_interval << ' '
     << config_.train_every << '\n';
  os << "counters " << learner_steps_ << ' ' << target_syncs_ << ' ' << adam_.step << '\n';
  io::write_mlp(os, online_);
  io::write_mlp(os, target_);
  io::write_mlp(os, adam_.m);
  io::write_mlp(os, adam_.v);
  os << "replay " << replay_.items().size() << ' ' << replay_.next_slot() << '\n';
  for (const auto& t : replay_.items()) {
    io::write_vec(os, t.state);
    os << t.action << ' ';
    io::write_real(os, static_cast<double>(t.reward));
    os << ' ' << (t.terminal ? 1 : 0) << '\n';
    io::write_vec(os, t.next_state);
    io::write_vec(os, t.next_mask);
  }
  io::write_rng(os, replay_.rng());
}

template <class Scalar>
void DqnLearner<Scalar>::load(std::istream& is) {
  io::expect(is, "learner");
  if (io::read_int(is) != 1) throw std::runtime_error("unsupported learner checkpoint version");
  io::expect(is, "config");
  DqnConfig cfg;
  cfg.hidden = io::read_vec<int>(is);
  cfg.learning_rate = io::read_real(is);
  cfg.discount = io::read_real(is);
  cfg.batch_size = static_cast<int>(io::read_int(is));
  cfg.replay_capacity = static_cast<std::size_t>(io::read_int(is));
  cfg.target_sync_interval = static_cast<int>(io::read_int(is));
  cfg.train_every = static_cast<int>(io::read_int(is));
  io::expect(is, "counters");
  const auto steps = io::read_int(is), syncs = io::read_int(is), adam_steps = io::read_int(is);
  MlpParams<Scalar> online = io::read_mlp<Scalar>(is);
  MlpParams<Scalar> target = io::read_mlp<Scalar>(is);
  AdamState<Scalar> adam{io::read_mlp<Scalar>(is), io::read_mlp<Scalar>(is), adam_steps};
  if (online.widths() != online_.widths() || target.widths() != online_.widths())
    throw std::runtime_error("checkpoint network shape does not match this learner");
  io::expect(is, "replay");
  const auto count = io::read_int(is), next = io::read_int(is);
  std::vector<Transition<Scalar>> items(static_cast<std::size_t>(count));
  for (auto& t : items) {
    t.state = io::read_vec<Scalar>(is);
    t.action = static_cast<int>(io::read_int(is));
    t.reward = static_cast<Scalar>(io::read_real(is));
    t.terminal = io::read_int(is) != 0;
    t.next_state = io::read_vec<Scalar>(is);
    t.next_mask = io::read_vec<std::uint8_t>(is);
  }
  ReplayBuffer<Scalar> replay(cfg.replay_capacity, 0);
  replay.restore(std::move(items), static_cast<std::size_t>(next));
  io::read_rng(is, replay.rng());

  config_ = std::move(cfg);
  online_ = std::move(online);
  target_ = std::move(target);
  adam_ = std::move(adam);
  replay_ = std::move(replay);
  learner_steps_ = steps;
  target_syncs_ = syncs;
}

}  // namespace uavage::dqn
