#pragma once

#include <optional>
#include <string>

namespace ertte {

enum class PerformanceMode {
  // Compare absolute errors against ground truth (default): re-prediction is
  // rewarded exactly when it is the more accurate estimate.
  kErrorDiff,
  // The literal branch form applied to the raw predicted values.
  kRawDiff,
};

struct RewardConfig {
  double omega_p = -0.5;  // re-prediction penalty, <= 0
  double alpha = 0.02;    // frequency slope per second, > 0
  double beta = -1.0;     // frequency intercept, < 0
  PerformanceMode performance_mode = PerformanceMode::kErrorDiff;

  void validate() const;
};

// r_p: prediction-quality component. `ground_truth` is the true remaining
// time; required in error-diff mode (training time), ignored in raw-diff
// mode. Throws StateError when error-diff mode lacks ground truth.
double performance_reward(double y_repredict, double y_lookup, int action,
                          std::optional<double> ground_truth, PerformanceMode mode);

// r_e: 0 for a lookup, omega_p for a re-prediction.
double efficiency_reward(int action, double omega_p);

// r_f: 0 for a lookup, alpha * sigma + beta for a re-prediction, where sigma
// is the time since the last re-prediction in seconds.
double frequency_reward(double sigma_s, int action, double alpha, double beta);

double total_reward(double r_p, double r_e, double r_f);

// Convenience: all four numbers at once.
struct RewardBreakdown {
  double performance = 0.0;
  double efficiency = 0.0;
  double frequency = 0.0;
  double total = 0.0;
};
RewardBreakdown compute_reward(double y_repredict, double y_lookup, int action, double sigma_s,
                               std::optional<double> ground_truth, const RewardConfig& config);

PerformanceMode parse_performance_mode(const std::string& name);
std::string to_string(PerformanceMode mode);

}  // namespace ertte
