#pragma once

#include <cstddef>
#include <vector>

namespace swarm {

/// Binary pursuer-to-evader assignment. Stored as one target index per
/// row, so a pursuer can never hold more than one evader.
class AllocationMatrix {
 public:
  AllocationMatrix() = default;
  AllocationMatrix(int n_pursuers, int n_evaders)
      : n_evaders_(n_evaders), target_(static_cast<std::size_t>(n_pursuers), -1) {}

  int rows() const { return static_cast<int>(target_.size()); }
  int cols() const { return n_evaders_; }

  bool at(int i, int j) const { return target_[static_cast<std::size_t>(i)] == j; }
  /// Assigned evader of pursuer i, or -1.
  int target_of(int i) const { return target_[static_cast<std::size_t>(i)]; }
  void assign(int i, int j) { target_[static_cast<std::size_t>(i)] = j; }
  void clear(int i) { target_[static_cast<std::size_t>(i)] = -1; }

  std::vector<int> pursuers_of(int j) const {
    std::vector<int> out;
    for (int i = 0; i < rows(); ++i)
      if (at(i, j)) out.push_back(i);
    return out;
  }
  int column_count(int j) const {
    int n = 0;
    for (int t : target_) n += (t == j);
    return n;
  }

  const std::vector<int>& targets() const { return target_; }
  friend bool operator==(const AllocationMatrix&, const AllocationMatrix&) = default;

 private:
  int n_evaders_ = 0;
  std::vector<int> target_;
};

}  // namespace swarm
