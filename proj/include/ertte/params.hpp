#pragma once

#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "ertte/tape.hpp"

namespace ertte::nn {

// Insertion-ordered collection of named parameters. Creation order defines
// both the initialization draw order and the checkpoint layout, so two
// networks built from the same architecture code line up exactly.
class ParamStore {
 public:
  Parameter& create(const std::string& name, long rows, long cols);
  [[nodiscard]] Parameter& get(const std::string& name);
  [[nodiscard]] const Parameter& get(const std::string& name) const;
  [[nodiscard]] bool has(const std::string& name) const { return index_.contains(name); }
  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] std::size_t scalar_count() const;

  [[nodiscard]] std::vector<Parameter*> all();
  [[nodiscard]] std::vector<const Parameter*> all() const;

  void init_normal(std::mt19937_64& rng, double stddev);
  void zero_grads();

  // Copies values from a store with identical structure (names and shapes).
  void copy_values_from(const ParamStore& other);
  [[nodiscard]] bool same_values(const ParamStore& other) const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Adaptive-moment gradient descent over a ParamStore.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the accumulated grads, then zeroes them.
  void step(ParamStore& store);
  void reset();
  [[nodiscard]] double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

 private:
  struct Moments {
    Mat m;
    Mat v;
  };
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

// Checkpoint archive: little-endian float32 arrays keyed by parameter name,
// with a sibling `<path>.manifest.json` recording shapes and a config hash.
void save_checkpoint(const ParamStore& store, const std::string& path,
                     const std::string& config_hash);
// Loads into an existing store; names and shapes must match exactly.
void load_checkpoint(ParamStore& store, const std::string& path);
// Config hash recorded in the manifest next to `path`.
std::string checkpoint_config_hash(const std::string& path);

// FNV-1a 64-bit content hash, hex-encoded. Used to fingerprint configs.
std::string content_hash(const std::string& text);

// Central finite-difference gradient check. `build` must construct the loss
// on the given tape from the current parameter values. Returns the largest
// relative error over every entry of every parameter.
struct GradientCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
};
GradientCheckResult check_gradients(ParamStore& store,
                                    const std::function<NodeRef(Tape&)>& build,
                                    double step = 1e-6);

}  // namespace ertte::nn
