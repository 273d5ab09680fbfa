#include "ertte/reward.hpp"

#include <cmath>

#include "ertte/errors.hpp"

namespace ertte {

void RewardConfig::validate() const {
  if (omega_p > 0.0) throw ConfigError("omega_p must be <= 0");
  if (alpha <= 0.0) throw ConfigError("alpha must be > 0");
  if (beta >= 0.0) throw ConfigError("beta must be < 0");
}

double performance_reward(double y_repredict, double y_lookup, int action,
                          std::optional<double> ground_truth, PerformanceMode mode) {
  if (mode == PerformanceMode::kErrorDiff) {
    if (!ground_truth)
      throw StateError("error-diff performance reward requires ground truth");
    const double e_rp = std::abs(y_repredict - *ground_truth);
    const double e_dl = std::abs(y_lookup - *ground_truth);
    return action == 1 ? e_dl - e_rp : e_rp - e_dl;
  }
  return action == 1 ? -(y_repredict - y_lookup) : -(y_lookup - y_repredict);
}

double efficiency_reward(int action, double omega_p) { return action == 1 ? omega_p : 0.0; }

double frequency_reward(double sigma_s, int action, double alpha, double beta) {
  return action == 1 ? alpha * sigma_s + beta : 0.0;
}

double total_reward(double r_p, double r_e, double r_f) { return r_p + r_e + r_f; }

RewardBreakdown compute_reward(double y_repredict, double y_lookup, int action, double sigma_s,
                               std::optional<double> ground_truth, const RewardConfig& config) {
  RewardBreakdown out;
  out.performance =
      performance_reward(y_repredict, y_lookup, action, ground_truth, config.performance_mode);
  out.efficiency = efficiency_reward(action, config.omega_p);
  out.frequency = frequency_reward(sigma_s, action, config.alpha, config.beta);
  out.total = total_reward(out.performance, out.efficiency, out.frequency);
  return out;
}

PerformanceMode parse_performance_mode(const std::string& name) {
  if (name == "error_diff") return PerformanceMode::kErrorDiff;
  if (name == "raw_diff") return PerformanceMode::kRawDiff;
  throw ConfigError("unknown performance mode '" + name + "'");
}

std::string to_string(PerformanceMode mode) {
  return mode == PerformanceMode::kErrorDiff ? "error_diff" : "raw_diff";
}

}  // namespace ertte
