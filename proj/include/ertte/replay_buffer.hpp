#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ertte/agent_state.hpp"

namespace ertte {

// Fixed-capacity experience store with strict FIFO eviction and a seeded
// uniform sampler. Single-writer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity, std::uint64_t seed);

  void push(Transition transition);

  struct Sample {
    std::vector<const Transition*> transitions;
    bool full_batch = true;  // false when fewer than batch_size were stored
  };
  // Uniform without replacement within one call; deterministic for a fixed
  // seed and call sequence. Returns everything (flagged) when the buffer
  // holds fewer than `batch_size` transitions.
  // Throws ConfigError when batch_size <= 0. Pointers are valid until the
  // next push.
  [[nodiscard]] Sample sample(long batch_size);

  [[nodiscard]] std::size_t size() const { return storage_.size(); }
  [[nodiscard]] std::size_t capacity() const { return capacity_; }
  // Transitions in insertion order, oldest first.
  [[nodiscard]] std::vector<const Transition*> in_insertion_order() const;

  // Length-prefixed binary records in insertion order, for crash-resume.
  void dump(const std::string& path) const;
  void restore(const std::string& path);

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t next_ = 0;  // ring head once storage_ reaches capacity
  std::mt19937_64 rng_;
};

}  // namespace ertte
