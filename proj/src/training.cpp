#include "ertte/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "ertte/errors.hpp"

namespace ertte {

RequestFeatures materialize_features(const Request& request, const WorldContext& ctx,
                                     const std::vector<DecisionEvent>& history) {
  RequestFeatures out;
  out.offline = extract_offline(request, *ctx.network, *ctx.store, ctx.past_slots);
  out.online = extract_online(request, *ctx.network, history);
  return out;
}

double predict_remaining_total(const PredictorInterface& predictor, const RequestFeatures& features,
                               std::size_t split_index) {
  PredictionInput input{&features.offline, &features.online, split_index};
  double sum = 0.0;
  for (double y : predictor.predict(input)) sum += y;
  return sum;
}

namespace {

struct MaterializedSample {
  RequestFeatures features;
  PredictionInput input;
};

// Features for one training sample; predictor training has no decision
// events, so the history marks are all none.
RequestFeatures sample_features(const TrainingSample& sample,
                                const std::vector<TravelRoute>& routes,
                                const WorldContext& ctx) {
  const Request request{&routes[sample.route_index], sample.request_time_s, sample.split_index};
  return materialize_features(request, ctx);
}

double run_training_pass(NeuralTtePredictor& predictor, const std::vector<std::size_t>& order,
                         const std::vector<TrainingSample>& samples,
                         const std::vector<TravelRoute>& routes, const WorldContext& ctx,
                         long batch_size) {
  double loss_sum = 0.0;
  long batches = 0;
  for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch_size)) {
    const std::size_t end = std::min(order.size(), at + static_cast<std::size_t>(batch_size));
    std::vector<RequestFeatures> features;
    features.reserve(end - at);
    std::vector<PredictionInput> inputs;
    std::vector<const std::vector<double>*> targets;
    for (std::size_t k = at; k < end; ++k) {
      const TrainingSample& s = samples[order[k]];
      features.push_back(sample_features(s, routes, ctx));
      targets.push_back(&s.target);
    }
    inputs.reserve(features.size());
    for (std::size_t k = 0; k < features.size(); ++k)
      inputs.push_back({&features[k].offline, &features[k].online,
                        samples[order[at + k]].split_index});
    loss_sum += predictor.train_batch(inputs, targets);
    ++batches;
  }
  return batches == 0 ? 0.0 : loss_sum / static_cast<double>(batches);
}

}  // namespace

double validation_mape(const NeuralTtePredictor& predictor,
                       const std::vector<TrainingSample>& val_samples,
                       const std::vector<TravelRoute>& val_routes, const WorldContext& ctx,
                       std::size_t max_samples) {
  const std::size_t n = std::min(val_samples.size(), max_samples);
  if (n == 0) throw DataError("validation requires at least one sample");
  double mape_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const TrainingSample& s = val_samples[k];
    double truth = 0.0;
    for (double y : s.target) truth += y;
    if (truth < 1.0) continue;
    const RequestFeatures features = sample_features(s, val_routes, ctx);
    PredictionInput input{&features.offline, &features.online, s.split_index};
    double predicted = 0.0;
    for (double y : predictor.predict(input)) predicted += y;
    mape_sum += 100.0 * std::abs(predicted - truth) / truth;
    ++used;
  }
  return used == 0 ? 0.0 : mape_sum / static_cast<double>(used);
}

PredictorTrainResult train_predictor_uniform(NeuralTtePredictor& predictor,
                                             const std::vector<TrainingSample>& samples,
                                             const std::vector<TravelRoute>& routes,
                                             const std::vector<TrainingSample>& val_samples,
                                             const std::vector<TravelRoute>& val_routes,
                                             const WorldContext& ctx,
                                             const PredictorTrainConfig& cfg, std::uint64_t seed,
                                             std::ostream* log) {
  if (samples.empty()) throw DataError("predictor training requires samples");
  predictor.mark_trained();
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  PredictorTrainResult result;
  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double train_loss =
        run_training_pass(predictor, order, samples, routes, ctx, cfg.batch_size);
    const double val = validation_mape(predictor, val_samples, val_routes, ctx);
    result.epoch_train_loss.push_back(train_loss);
    result.epoch_val_mape.push_back(val);
    result.epochs_run = epoch;
    if (log)
      (*log) << "predictor epoch " << epoch << " train_mae " << train_loss << " val_mape " << val
             << "\n";
    const auto k = result.epoch_val_mape.size();
    if (k >= 2 && std::abs(result.epoch_val_mape[k - 1] - result.epoch_val_mape[k - 2]) <
                      cfg.early_stop_tolerance) {
      result.early_stopped = true;
      break;
    }
  }
  return result;
}

PredictorTrainResult train_predictor_curriculum(NeuralTtePredictor& predictor,
                                                const std::vector<TrainingSample>& samples,
                                                const std::vector<TravelRoute>& routes,
                                                const std::vector<TrainingSample>& val_samples,
                                                const std::vector<TravelRoute>& val_routes,
                                                const MetasetGrid& grid,
                                                const SchedulerConfig& scheduler_cfg,
                                                const WorldContext& ctx,
                                                const PredictorTrainConfig& cfg,
                                                std::uint64_t seed, std::ostream* log,
                                                std::ostream* manifest_out) {
  if (!grid.scored()) throw StateError("curriculum training requires a scored grid");
  predictor.mark_trained();
  TrainingScheduler scheduler(grid, scheduler_cfg);
  std::mt19937_64 rng(seed);

  PredictorTrainResult result;
  for (int circle = 1; circle <= scheduler_cfg.circles; ++circle) {
    double previous_val = std::numeric_limits<double>::quiet_NaN();
    for (int epoch = 1; epoch <= scheduler_cfg.epochs_per_circle; ++epoch) {
      TrainingScheduler::EpochPool pool = scheduler.pool(circle, epoch);
      if (pool.sample_indices.empty()) throw StateError("curriculum produced an empty pool");
      if (manifest_out) (*manifest_out) << scheduler.pool_manifest_json(pool) << "\n";
      std::vector<std::size_t> order = pool.sample_indices;
      std::shuffle(order.begin(), order.end(), rng);
      const double train_loss =
          run_training_pass(predictor, order, samples, routes, ctx, cfg.batch_size);
      const double val = validation_mape(predictor, val_samples, val_routes, ctx);
      result.epoch_train_loss.push_back(train_loss);
      result.epoch_val_mape.push_back(val);
      ++result.epochs_run;
      if (log)
        (*log) << "curriculum circle " << circle << " epoch " << epoch << " pool "
               << pool.sample_indices.size() << " train_mae " << train_loss << " val_mape " << val
               << "\n";
      // Early stop ends the circle, but never before the pool covers the grid.
      if (!std::isnan(previous_val) && pool.coverage_complete &&
          std::abs(val - previous_val) < scheduler_cfg.tolerance) {
        result.early_stopped = true;
        break;
      }
      previous_val = val;
    }
  }
  return result;
}

NeuralTtePredictor train_expert(const std::vector<TrainingSample>& samples,
                                const std::vector<TravelRoute>& routes,
                                const std::vector<TrainingSample>& val_samples,
                                const std::vector<TravelRoute>& val_routes,
                                const WorldContext& ctx, const NeuralTtePredictor::Config& cfg,
                                const PredictorTrainConfig& train_cfg, std::ostream* log) {
  NeuralTtePredictor expert(cfg);
  train_predictor_uniform(expert, samples, routes, val_samples, val_routes, ctx, train_cfg,
                          cfg.seed, log);
  return expert;
}

EpisodeResult replay_route_as_episode(const TravelRoute& route, double interval_s, DqnAgent& agent,
                                      const PredictorInterface& predictor, InferenceMemory& memory,
                                      const RewardConfig& reward_cfg, const WorldContext& ctx) {
  if (memory.record(route.id()) != nullptr)
    throw ConsistencyError("episode replay requires an empty memory for route " +
                           std::to_string(route.id()));

  EpisodeResult result;
  std::vector<DecisionEvent> history;
  std::optional<double> last_repredict_t;
  std::vector<AgentState> states;
  std::vector<int> actions;
  std::vector<double> rewards;

  const double total = route.total_time_s();
  for (std::size_t k = 0; static_cast<double>(k) * interval_s < total; ++k) {
    const double t = static_cast<double>(k) * interval_s;
    const Request request = make_request(route, t);
    const RequestFeatures features = materialize_features(request, ctx, history);

    AgentState state;
    state.offline = features.offline;
    state.online = features.online;
    state.position = request.split_index;
    state.sigma_s = last_repredict_t ? t - *last_repredict_t : 0.0;

    const auto lookup = memory.lookup(route.id(), request.split_index);
    const bool miss = !lookup.has_value();
    const int action = agent.select_action(state, miss);

    // Training-time counterfactual: both branches are evaluated per request.
    PredictionInput input{&state.offline, &state.online, request.split_index};
    std::vector<double> predictions = predictor.predict(input);
    double y_repredict = 0.0;
    for (double y : predictions) y_repredict += y;
    const double y_lookup = lookup.value_or(y_repredict);
    const double y_true = request.remaining_time_s();

    const RewardBreakdown reward =
        compute_reward(y_repredict, y_lookup, action, state.sigma_s, y_true, reward_cfg);

    if (action == kActionRepredict) {
      memory.store(route.id(), std::move(predictions), t, request.split_index, route.size());
      last_repredict_t = t;
    }
    history.push_back({request.split_index,
                       action == kActionRepredict ? DecisionAction::kRepredict
                                                  : DecisionAction::kLookup});

    result.events.push_back({route.id(), t, action, miss, y_repredict, y_lookup, y_true,
                             state.sigma_s, reward.total});
    states.push_back(std::move(state));
    actions.push_back(action);
    rewards.push_back(reward.total);
  }

  for (std::size_t k = 0; k < states.size(); ++k) {
    Transition transition;
    transition.action = actions[k];
    transition.reward = rewards[k];
    if (k + 1 < states.size()) transition.next_state = states[k + 1];
    transition.state = std::move(states[k]);
    result.transitions.push_back(std::move(transition));
  }

  memory.evict(route.id());
  return result;
}

AgentTrainResult train_agent(const std::vector<TravelRoute>& routes,
                             const PredictorInterface& predictor, DqnAgent& agent,
                             const RewardConfig& reward_cfg, const WorldContext& ctx,
                             double interval_s, std::ostream* log,
                             std::vector<EpisodeEvent>* event_log) {
  reward_cfg.validate();
  const AgentConfig& cfg = agent.config();
  ReplayBuffer buffer(cfg.buffer_capacity, cfg.seed ^ 0x9e3779b97f4a7c15ull);
  InferenceMemory memory;

  AgentTrainResult result;
  long since_train = 0;
  for (long epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double reward_sum = 0.0;
    long reward_count = 0;
    double loss_sum = 0.0;
    long loss_count = 0;
    for (const TravelRoute& route : routes) {
      EpisodeResult episode =
          replay_route_as_episode(route, interval_s, agent, predictor, memory, reward_cfg, ctx);
      for (const auto& event : episode.events) {
        reward_sum += event.reward;
        ++reward_count;
      }
      if (event_log)
        event_log->insert(event_log->end(), episode.events.begin(), episode.events.end());
      for (auto& transition : episode.transitions) {
        buffer.push(std::move(transition));
        ++result.transitions_seen;
        ++since_train;
        if (since_train >= cfg.train_step) {
          since_train = 0;
          auto sample = buffer.sample(cfg.batch_size);
          const auto stats = agent.train_step(sample.transitions);
          loss_sum += stats.combined;
          ++loss_count;
          ++result.gradient_steps;
        }
      }
    }
    agent.end_epoch();
    result.epoch_mean_reward.push_back(reward_count ? reward_sum / reward_count : 0.0);
    result.epoch_mean_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
    if (log)
      (*log) << "agent epoch " << epoch << " mean_reward "
             << result.epoch_mean_reward.back() << " mean_loss " << result.epoch_mean_loss.back()
             << " epsilon " << agent.epsilon() << "\n";
  }
  return result;
}

}  // namespace ertte
