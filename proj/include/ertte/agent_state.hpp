#pragma once

#include <optional>

#include "ertte/features.hpp"

namespace ertte {

// MDP state: offline route context, realized online behavior, the current
// split position, and the time since the last re-prediction on this trip.
struct AgentState {
  OfflineFeatures offline;
  OnlineFeatures online;
  std::size_t position = 0;
  double sigma_s = 0.0;
};

struct Transition {
  AgentState state;
  int action = 0;  // 0 = direct lookup, 1 = re-prediction
  double reward = 0.0;
  std::optional<AgentState> next_state;  // absent at trip end
};

}  // namespace ertte
