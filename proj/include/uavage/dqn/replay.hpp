#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "uavage/dqn/td_loss.hpp"

namespace uavage::dqn {

/// Fixed-capacity ring of transitions with a seeded uniform sampler (with replacement).
template <class Scalar>
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw std::invalid_argument("replay capacity must be >= 1");
    items_.reserve(std::min<std::size_t>(capacity, 4096));
  }

  void push(Transition<Scalar> t) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(t));
    } else {
      items_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool can_sample(std::size_t batch) const { return batch > 0 && items_.size() >= batch; }

  std::vector<const Transition<Scalar>*> sample(std::size_t batch) {
    if (!can_sample(batch)) throw std::logic_error("replay buffer holds fewer transitions than the batch size");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition<Scalar>*> out(batch);
    for (auto& p : out) p = &items_[pick(rng_)];
    return out;
  }

  // Checkpoint access.
  const std::vector<Transition<Scalar>>& items() const { return items_; }
  std::size_t next_slot() const { return next_; }
  std::mt19937_64& rng() { return rng_; }
  const std::mt19937_64& rng() const { return rng_; }
  void restore(std::vector<Transition<Scalar>> items, std::size_t next) {
    if (items.size() > capacity_ || next >= capacity_) throw std::invalid_argument("replay restore out of range");
    items_ = std::move(items);
    next_ = next;
  }

 private:
  std::size_t capacity_;
  std::vector<Transition<Scalar>> items_;
  std::size_t next_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace uavage::dqn
