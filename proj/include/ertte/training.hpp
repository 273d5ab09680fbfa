#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ertte/agent.hpp"
#include "ertte/config.hpp"
#include "ertte/curriculum.hpp"
#include "ertte/inference_memory.hpp"
#include "ertte/predictor.hpp"
#include "ertte/replay_buffer.hpp"

namespace ertte {

// Shared world handles needed to materialize features for a request.
struct WorldContext {
  const RoadNetwork* network = nullptr;
  const TrafficConditionStore* store = nullptr;
  int past_slots = 4;
};

struct RequestFeatures {
  OfflineFeatures offline;
  OnlineFeatures online;
};

RequestFeatures materialize_features(const Request& request, const WorldContext& ctx,
                                     const std::vector<DecisionEvent>& history = {});

// Sum of the predictor's per-segment estimates for the remaining route.
double predict_remaining_total(const PredictorInterface& predictor, const RequestFeatures& features,
                               std::size_t split_index);

// ---------------------------------------------------------------------------
// Predictor training

struct PredictorTrainResult {
  std::vector<double> epoch_train_loss;
  std::vector<double> epoch_val_mape;
  long epochs_run = 0;
  bool early_stopped = false;
};

// Uniformly shuffled training (the no-curriculum mode, and the expert's
// training regime). Deterministic for a fixed seed.
PredictorTrainResult train_predictor_uniform(NeuralTtePredictor& predictor,
                                             const std::vector<TrainingSample>& samples,
                                             const std::vector<TravelRoute>& routes,
                                             const std::vector<TrainingSample>& val_samples,
                                             const std::vector<TravelRoute>& val_routes,
                                             const WorldContext& ctx,
                                             const PredictorTrainConfig& cfg, std::uint64_t seed,
                                             std::ostream* log = nullptr);

// Dual-loop curriculum training over a scored grid (Training Scheduler).
// The per-epoch pool manifest is streamed to `manifest_out` when given.
PredictorTrainResult train_predictor_curriculum(NeuralTtePredictor& predictor,
                                                const std::vector<TrainingSample>& samples,
                                                const std::vector<TravelRoute>& routes,
                                                const std::vector<TrainingSample>& val_samples,
                                                const std::vector<TravelRoute>& val_routes,
                                                const MetasetGrid& grid,
                                                const SchedulerConfig& scheduler_cfg,
                                                const WorldContext& ctx,
                                                const PredictorTrainConfig& cfg,
                                                std::uint64_t seed, std::ostream* log = nullptr,
                                                std::ostream* manifest_out = nullptr);

// Expert for difficulty scoring: the same model trained on uniformly
// shuffled data with a fixed seed, returned frozen.
NeuralTtePredictor train_expert(const std::vector<TrainingSample>& samples,
                                const std::vector<TravelRoute>& routes,
                                const std::vector<TrainingSample>& val_samples,
                                const std::vector<TravelRoute>& val_routes,
                                const WorldContext& ctx, const NeuralTtePredictor::Config& cfg,
                                const PredictorTrainConfig& train_cfg, std::ostream* log = nullptr);

// Validation MAPE (%) of the predictor over remaining-time totals.
double validation_mape(const NeuralTtePredictor& predictor,
                       const std::vector<TrainingSample>& val_samples,
                       const std::vector<TravelRoute>& val_routes, const WorldContext& ctx,
                       std::size_t max_samples = 2048);

// ---------------------------------------------------------------------------
// Agent training (the model-learning loop against a frozen predictor)

struct EpisodeEvent {
  std::int64_t route_id = 0;
  double t = 0.0;
  int action = 0;
  bool forced = false;  // memory miss forced a re-prediction
  double y_repredict = 0.0;  // counterfactual, always computed while training
  double y_lookup = 0.0;
  double y_true = 0.0;
  double sigma = 0.0;
  double reward = 0.0;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<EpisodeEvent> events;
};

// Replays one route as a stream of requests at the given interval. The agent
// picks actions epsilon-greedily; the memory must hold no record for the
// route on entry and is left evicted on exit.
EpisodeResult replay_route_as_episode(const TravelRoute& route, double interval_s, DqnAgent& agent,
                                      const PredictorInterface& predictor, InferenceMemory& memory,
                                      const RewardConfig& reward_cfg, const WorldContext& ctx);

struct AgentTrainResult {
  long transitions_seen = 0;
  long gradient_steps = 0;
  std::vector<double> epoch_mean_reward;
  std::vector<double> epoch_mean_loss;
};

// Algorithm-1 style training: replay routes as request streams, push
// transitions, and take a gradient step every `train_step` new transitions.
AgentTrainResult train_agent(const std::vector<TravelRoute>& routes,
                             const PredictorInterface& predictor, DqnAgent& agent,
                             const RewardConfig& reward_cfg, const WorldContext& ctx,
                             double interval_s, std::ostream* log = nullptr,
                             std::vector<EpisodeEvent>* event_log = nullptr);

}  // namespace ertte
