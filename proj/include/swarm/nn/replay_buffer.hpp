#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "swarm/core/rng.hpp"

namespace swarm::nn {

/// Fixed-capacity ring of transitions with its own sampling stream.
template <typename T>
class ReplayBuffer {
 public:
  ReplayBuffer() = default;
  ReplayBuffer(std::size_t capacity, std::uint64_t seed) : capacity_(capacity), rng_(seed) {}

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
    }
    head_ = (head_ + 1) % capacity_;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const T& operator[](std::size_t i) const { return items_[i]; }

  /// Distinct indices (partial Fisher-Yates); at most size() of them.
  std::vector<std::size_t> sample_indices(std::size_t batch) {
    const std::size_t n = items_.size();
    batch = std::min(batch, n);
    scratch_.resize(n);
    std::iota(scratch_.begin(), scratch_.end(), std::size_t{0});
    for (std::size_t k = 0; k < batch; ++k) {
      const std::size_t pick = k + rng_.index(n - k);
      std::swap(scratch_[k], scratch_[pick]);
    }
    return {scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(batch)};
  }

  std::vector<const T*> sample(std::size_t batch) {
    std::vector<const T*> out;
    for (std::size_t i : sample_indices(batch)) out.push_back(&items_[i]);
    return out;
  }

  /// Storage order and write head, for checkpoints.
  const std::vector<T>& items() const { return items_; }
  std::size_t head() const { return head_; }
  void restore(std::vector<T> items, std::size_t head) {
    items_ = std::move(items);
    head_ = head;
  }
  void clear() {
    items_.clear();
    head_ = 0;
  }

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

 private:
  std::size_t capacity_ = 1;
  std::size_t head_ = 0;
  std::vector<T> items_;
  std::vector<std::size_t> scratch_;
  Rng rng_;
};

}  // namespace swarm::nn
