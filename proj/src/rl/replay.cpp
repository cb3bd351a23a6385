#include "curtail/rl/replay.hpp"

#include <algorithm>
#include <string>

namespace curtail::rl {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Experience e) {
  if (items_.size() < capacity_)
    items_.push_back(std::move(e));
  else
    items_[insertions_ % capacity_] = std::move(e);
  ++insertions_;
}

std::vector<std::size_t> ReplayBuffer::sample_slots(std::size_t batch_size, std::mt19937_64& rng) const {
  if (batch_size == 0 || items_.size() < batch_size)
    throw std::logic_error("cannot sample " + std::to_string(batch_size) + " experiences from a buffer holding " +
                           std::to_string(items_.size()));
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(batch_size);
  for (auto& s : out) s = pick(rng);
  return out;
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t batch_size, std::mt19937_64& rng) const {
  std::vector<const Experience*> out;
  for (std::size_t s : sample_slots(batch_size, rng)) out.push_back(&items_[s]);
  return out;
}

}  // namespace curtail::rl
