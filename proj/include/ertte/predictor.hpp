#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ertte/decision_net.hpp"
#include "ertte/features.hpp"
#include "ertte/params.hpp"
#include "ertte/traffic_store.hpp"

namespace ertte {

// Everything a predictor may consume about one request: offline context of
// the whole route, realized online behavior, and the split position.
struct PredictionInput {
  const OfflineFeatures* offline = nullptr;
  const OnlineFeatures* online = nullptr;
  std::size_t split_index = 0;
};

// Travel-time estimator for the remaining segments of a request.
class PredictorInterface {
 public:
  virtual ~PredictorInterface() = default;
  // Returns one positive predicted time per remaining segment.
  [[nodiscard]] virtual std::vector<double> predict(const PredictionInput& input) const = 0;
  [[nodiscard]] virtual std::string name() const = 0;
};

// Historical-average baseline: time = length / v_avg at the request's slot,
// with the store fallback covering unobserved cells.
std::vector<double> avg_predict(const Request& request, const TrafficConditionStore& store,
                                const RoadNetwork& network);

class AvgPredictor final : public PredictorInterface {
 public:
  [[nodiscard]] std::vector<double> predict(const PredictionInput& input) const override;
  [[nodiscard]] std::string name() const override { return "avg"; }
};

// Compact attention TTE model: embeds the remaining segments together with a
// summary of observed driving behavior, runs encoder blocks, and emits
// per-segment times through an exponential link scaled by length/v_avg.
// With a zero-weight head every prediction equals exp(bias) * length / v_avg.
class NeuralTtePredictor final : public PredictorInterface {
 public:
  struct Config {
    nn::ModelConfig model;
    double lr = 1e-4;
    long batch_size = 512;
    long epochs = 100;
    double init_std = 0.02;
    std::uint64_t seed = 7;
  };

  explicit NeuralTtePredictor(const Config& config);

  [[nodiscard]] std::vector<double> predict(const PredictionInput& input) const override;
  [[nodiscard]] std::string name() const override { return "neural_tte"; }

  // Builds the mean-absolute-error training loss of one sample on the tape.
  // `target` holds the true per-segment times of the remaining segments.
  [[nodiscard]] nn::NodeRef sample_loss(nn::Tape& tape, const PredictionInput& input,
                                        const std::vector<double>& target) const;

  // One Adam step over a mini-batch; returns the mean sample loss.
  double train_batch(const std::vector<PredictionInput>& inputs,
                     const std::vector<const std::vector<double>*>& targets);

  void mark_trained() { trained_ = true; }
  [[nodiscard]] bool trained() const { return trained_; }

  [[nodiscard]] nn::ParamStore& params() { return params_; }
  [[nodiscard]] const nn::ParamStore& params() const { return params_; }
  [[nodiscard]] const Config& config() const { return cfg_; }

  void save(const std::string& path, const std::string& config_hash) const;
  void load(const std::string& path);

 private:
  [[nodiscard]] nn::NodeRef forward(nn::Tape& tape, const PredictionInput& input) const;

  Config cfg_;
  nn::ParamStore params_;
  nn::Parameter *segment_table_, *timeslot_table_, *traffic_proj_, *traffic_bias_;
  nn::Parameter *weekday_table_, *holiday_table_, *rush_table_, *weather_table_;
  nn::Parameter *fc_w_, *fc_b_;
  std::vector<nn::EncoderBlock> blocks_;
  nn::Parameter *head_w_, *head_b_;
  nn::AdamOptimizer optimizer_;
  bool trained_ = false;
};

}  // namespace ertte
