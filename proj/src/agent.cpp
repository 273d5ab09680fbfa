#include "ertte/agent.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"

namespace ertte {

void AgentConfig::validate() const {
  if (gamma <= 0.0 || gamma > 1.0) throw ConfigError("gamma must be in (0, 1]");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 || epsilon_end > 1.0)
    throw ConfigError("epsilon bounds must be in [0, 1]");
  if (huber_delta <= 0.0) throw ConfigError("huber_delta must be positive");
  if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (train_step <= 0 || update_step <= 0) throw ConfigError("train/update steps must be positive");
}

double huber_td_loss(double q, double q_target, double delta) {
  if (delta <= 0.0) throw ConfigError("huber_delta must be positive");
  const double diff = q - q_target;
  return std::abs(diff) <= delta ? 0.5 * diff * diff : delta * (std::abs(diff) - 0.5 * delta);
}

double combined_loss(double td, double contrastive, double lambda) {
  return td + lambda * contrastive;
}

DqnAgent::DqnAgent(const nn::ModelConfig& model_config, const AgentConfig& agent_config)
    : model_cfg_(model_config), cfg_(agent_config), optimizer_(agent_config.lr),
      rng_(agent_config.seed) {
  cfg_.validate();
  main_net_ = std::make_unique<nn::DecisionNet>(model_cfg_, main_params_, "dm");
  target_net_ = std::make_unique<nn::DecisionNet>(model_cfg_, target_params_, "dm");
  main_params_.init_normal(rng_, cfg_.init_std);
  target_params_.copy_values_from(main_params_);
}

double DqnAgent::epsilon() const {
  if (cfg_.epsilon_decay_steps <= 0) return cfg_.epsilon_end;
  const double frac =
      std::min(1.0, static_cast<double>(env_steps_) / static_cast<double>(cfg_.epsilon_decay_steps));
  return cfg_.epsilon_start + frac * (cfg_.epsilon_end - cfg_.epsilon_start);
}

int DqnAgent::select_action(const AgentState& state, bool memory_miss) {
  const double eps = epsilon();
  ++env_steps_;
  if (memory_miss) return kActionRepredict;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng_) < eps) {
    std::uniform_int_distribution<int> coin(0, 1);
    return coin(rng_);
  }
  const Eigen::Vector2d q = main_net_->q_values(state);
  return q(1) > q(0) ? kActionRepredict : kActionLookup;
}

int DqnAgent::greedy_action(const AgentState& state, bool memory_miss) const {
  if (memory_miss) return kActionRepredict;
  const Eigen::Vector2d q = main_net_->q_values(state);
  return q(1) > q(0) ? kActionRepredict : kActionLookup;
}

double DqnAgent::td_target(const Transition& transition) const {
  if (!transition.next_state) return transition.reward;
  const AgentState& next = *transition.next_state;
  if (cfg_.double_dqn) {
    const Eigen::Vector2d q_next_main = main_net_->q_values(next);
    const int best = q_next_main(1) > q_next_main(0) ? 1 : 0;
    return transition.reward + cfg_.gamma * target_net_->q_values(next)(best);
  }
  return transition.reward + cfg_.gamma * target_net_->q_values(next).maxCoeff();
}

DqnAgent::TrainStats DqnAgent::train_step(std::span<const Transition* const> batch) {
  if (batch.empty()) throw StateError("train_step on an empty batch");

  // Targets are constants: computed on non-recording tapes.
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const Transition* t : batch) targets.push_back(td_target(*t));

  nn::Tape tape(true);
  std::vector<nn::NodeRef> residuals;
  std::vector<nn::NodeRef> online_pooled, offline_pooled;
  residuals.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    nn::DecisionNet::Forward fwd = main_net_->forward(tape, t.state);
    nn::NodeRef q = tape.pick(fwd.q, 0, t.action);
    residuals.push_back(tape.sub(q, tape.input(nn::Mat::Constant(1, 1, targets[i]))));
    online_pooled.push_back(main_net_->project_online(tape, tape.mean_rows(fwd.online_encoded)));
    offline_pooled.push_back(main_net_->project_offline(tape, tape.mean_rows(fwd.offline_encoded)));
  }
  nn::NodeRef td = tape.mean_all(tape.huber(tape.concat_rows(residuals), cfg_.huber_delta));
  nn::NodeRef contrastive = nn::info_nce_from_pooled(tape, tape.concat_rows(online_pooled),
                                                     tape.concat_rows(offline_pooled),
                                                     model_cfg_.temperature);
  nn::NodeRef loss = tape.add(td, tape.scale(contrastive, cfg_.lambda));
  tape.backward(loss);
  optimizer_.step(main_params_);

  ++gradient_steps_;
  if (!cfg_.sync_per_epoch && gradient_steps_ % cfg_.update_step == 0) sync_target();

  TrainStats stats;
  stats.td_loss = tape.scalar(td);
  stats.contrastive_loss = tape.scalar(contrastive);
  stats.combined = tape.scalar(loss);
  return stats;
}

void DqnAgent::sync_target() { target_params_.copy_values_from(main_params_); }

void DqnAgent::end_epoch() {
  ++epochs_seen_;
  if (cfg_.sync_per_epoch && epochs_seen_ % cfg_.update_step == 0) sync_target();
}

void DqnAgent::save(const std::string& path, const std::string& config_hash) const {
  nn::save_checkpoint(main_params_, path, config_hash);
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json state;
  state["env_steps"] = env_steps_;
  state["gradient_steps"] = gradient_steps_;
  state["epochs_seen"] = epochs_seen_;
  state["epsilon"] = epsilon();
  state["rng"] = rng_state.str();
  std::ofstream out(path + ".train_state.json");
  if (!out) throw DataError("cannot open '" + path + ".train_state.json' for writing");
  out << state.dump(2) << '\n';
}

void DqnAgent::load(const std::string& path) {
  nn::load_checkpoint(main_params_, path);
  target_params_.copy_values_from(main_params_);
  std::ifstream in(path + ".train_state.json");
  if (!in) throw DataError("missing training state for checkpoint '" + path + "'");
  nlohmann::json state = nlohmann::json::parse(in);
  env_steps_ = state.value("env_steps", 0L);
  gradient_steps_ = state.value("gradient_steps", 0L);
  epochs_seen_ = state.value("epochs_seen", 0L);
  if (state.contains("rng")) {
    std::istringstream rng_state(state["rng"].get<std::string>());
    rng_state >> rng_;
  }
}

}  // namespace ertte
