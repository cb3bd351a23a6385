#pragma once

#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

namespace curtail::rl {

struct Experience {
  std::vector<double> observation;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_observation;
  bool done = false;
};

/// Fixed-capacity ring; the oldest experience is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Experience e);
  /// Uniform with replacement over the current contents. Throws when fewer
  /// than batch_size experiences are stored.
  [[nodiscard]] std::vector<std::size_t> sample_slots(std::size_t batch_size, std::mt19937_64& rng) const;
  [[nodiscard]] std::vector<const Experience*> sample(std::size_t batch_size, std::mt19937_64& rng) const;

  [[nodiscard]] const Experience& slot(std::size_t i) const { return items_.at(i); }
  [[nodiscard]] std::size_t size() const { return items_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  [[nodiscard]] std::size_t insertions() const { return insertions_; }

 private:
  std::size_t capacity_;
  std::size_t insertions_ = 0;
  std::vector<Experience> items_;
};

}  // namespace curtail::rl
