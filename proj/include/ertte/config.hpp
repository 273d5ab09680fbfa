#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ertte/agent.hpp"
#include "ertte/curriculum.hpp"
#include "ertte/decision_net.hpp"
#include "ertte/reward.hpp"
#include "ertte/synthetic.hpp"

namespace ertte {

struct DataConfig {
  int slot_minutes = 5;           // traffic-condition slot width
  int past_slots = 4;             // p
  SplitRatios split_ratios;       // 70/10/20
  double request_interval_s = 30.0;  // training request stream
  SyntheticConfig synth;
};

struct PredictorTrainConfig {
  double lr = 1e-4;
  long batch_size = 512;
  long epochs = 100;
  double early_stop_tolerance = 1e-3;  // on validation MAPE, percentage points
  double init_std = 0.02;
};

struct EvalConfig {
  double interval_s = 30.0;
  std::vector<double> sweep_intervals = {15.0, 30.0, 60.0, 120.0, 180.0};
  int case_study_k = 50;
  std::vector<double> scalability_fractions = {0.2, 0.4, 0.6, 0.8, 1.0};
  double mape_min_truth_s = 1.0;  // requests below this are excluded from MAPE
  int workers = 4;
};

struct CurriculumConfig {
  bool enabled = true;
  int subsets = 8;   // N
  int metasets = 4;  // M
  SchedulerConfig scheduler;
};

// The full run configuration, one section per concern. Every value is
// overridable from a JSON config file and `--set section.key=value` flags.
struct Config {
  std::uint64_t seed = 7;
  DataConfig data;
  nn::ModelConfig model;
  PredictorTrainConfig predictor_train;
  RewardConfig reward;
  AgentConfig agent;
  CurriculumConfig curriculum;
  EvalConfig eval;

  [[nodiscard]] std::string to_json(int indent = 2) const;
  [[nodiscard]] std::string hash() const;  // content hash of the resolved JSON

  static Config from_json_text(const std::string& text);
  static Config from_file(const std::string& path);
  // Applies one `section.key=value` override. Throws ConfigError on unknown
  // fields or malformed values, naming the field.
  void apply_override(const std::string& assignment);
  void validate() const;
};

}  // namespace ertte
