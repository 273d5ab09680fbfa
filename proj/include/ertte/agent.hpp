#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "ertte/agent_state.hpp"
#include "ertte/decision_net.hpp"
#include "ertte/params.hpp"

namespace ertte {

inline constexpr int kActionLookup = 0;
inline constexpr int kActionRepredict = 1;

struct AgentConfig {
  double gamma = 0.9;
  double lr = 1e-4;
  long batch_size = 512;
  long epochs = 100;
  std::size_t buffer_capacity = 500000;
  long update_step = 2000;  // us: target sync cadence
  long train_step = 200;    // ts: gradient step every ts new transitions
  double lambda = 0.1;      // contrastive loss weight
  double huber_delta = 1.0;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 50000;
  // Prose form (main selects, target evaluates) when true; the printed
  // plain-max target form when false.
  bool double_dqn = true;
  // Interpret update_step as epochs instead of gradient steps.
  bool sync_per_epoch = false;
  double init_std = 0.02;
  std::uint64_t seed = 7;

  void validate() const;
};

// Elementwise Huber value, exposed for tests; the boundary belongs to the
// quadratic branch (both branches agree there).
double huber_td_loss(double q, double q_target, double delta);
double combined_loss(double td, double contrastive, double lambda);

// Double DQN Decision Maker: main and target DecisionNets over twin
// parameter stores, epsilon-greedy action selection, and TD updates with the
// contrastive alignment term.
class DqnAgent {
 public:
  DqnAgent(const nn::ModelConfig& model_config, const AgentConfig& agent_config);

  // Epsilon-greedy over the main net; a memory miss forces re-prediction.
  // Advances the exploration schedule by one step.
  int select_action(const AgentState& state, bool memory_miss);
  // Greedy action at epsilon = 0 without advancing the schedule.
  [[nodiscard]] int greedy_action(const AgentState& state, bool memory_miss) const;

  [[nodiscard]] Eigen::Vector2d q_main(const AgentState& state) const {
    return main_net_->q_values(state);
  }
  [[nodiscard]] Eigen::Vector2d q_target_net(const AgentState& state) const {
    return target_net_->q_values(state);
  }

  // Target value of one transition under the configured form.
  [[nodiscard]] double td_target(const Transition& transition) const;

  struct TrainStats {
    double td_loss = 0.0;
    double contrastive_loss = 0.0;
    double combined = 0.0;
  };
  // One gradient step over a batch; syncs the target every update_step
  // gradient steps unless sync_per_epoch is set.
  TrainStats train_step(std::span<const Transition* const> batch);

  void sync_target();
  void end_epoch();  // drives epoch-based target syncs

  [[nodiscard]] double epsilon() const;
  [[nodiscard]] long env_steps() const { return env_steps_; }
  [[nodiscard]] long gradient_steps() const { return gradient_steps_; }

  [[nodiscard]] nn::ParamStore& main_params() { return main_params_; }
  [[nodiscard]] const nn::ParamStore& main_params() const { return main_params_; }
  [[nodiscard]] const nn::ParamStore& target_params() const { return target_params_; }
  [[nodiscard]] const nn::DecisionNet& main_net() const { return *main_net_; }
  [[nodiscard]] const AgentConfig& config() const { return cfg_; }
  [[nodiscard]] const nn::ModelConfig& model_config() const { return model_cfg_; }

  // Checkpoint = parameter archive + JSON training state (step counters,
  // epsilon schedule position, rng state) for exact resume.
  void save(const std::string& path, const std::string& config_hash) const;
  void load(const std::string& path);

 private:
  nn::ModelConfig model_cfg_;
  AgentConfig cfg_;
  nn::ParamStore main_params_;
  nn::ParamStore target_params_;
  std::unique_ptr<nn::DecisionNet> main_net_;
  std::unique_ptr<nn::DecisionNet> target_net_;
  nn::AdamOptimizer optimizer_;
  std::mt19937_64 rng_;
  long env_steps_ = 0;
  long gradient_steps_ = 0;
  long epochs_seen_ = 0;
};

}  // namespace ertte
