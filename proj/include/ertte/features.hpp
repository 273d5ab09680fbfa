#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ertte/road_network.hpp"
#include "ertte/route.hpp"
#include "ertte/traffic_store.hpp"

namespace ertte {

// Spatial, temporal and traffic context of every segment of a route, sampled
// at request time over the current slot and the p preceding ones.
struct OfflineFeatures {
  struct SpatialEntry {
    SegmentId segment = 0;
    SegmentAttrs attrs;
  };
  std::vector<SpatialEntry> spatial;                 // length n
  std::vector<std::vector<int>> temporal;            // n x (p+1) weekly slot ids
  std::vector<std::vector<SlotStats>> traffic;       // n x (p+1)
  BackgroundInfo background;
  int current_slot = 0;
  int past_slots = 0;  // p

  [[nodiscard]] std::size_t route_length() const { return spatial.size(); }
  [[nodiscard]] std::size_t slot_depth() const { return static_cast<std::size_t>(past_slots) + 1; }
};

enum class DecisionAction : int { kLookup = 0, kRepredict = 1 };

// Marker for traveled positions where no request was decided.
enum class HistoryMark : int { kNone = 0, kLookup = 1, kRepredict = 2 };

// A past decision, attached to the split position it was taken at.
struct DecisionEvent {
  std::size_t position = 0;
  DecisionAction action = DecisionAction::kRepredict;
};

// Realized speeds and decision history over the traveled prefix, both of
// length i_t and positionally aligned.
struct OnlineFeatures {
  std::vector<double> driving_speed_mps;   // F^D
  std::vector<HistoryMark> decision_history;  // F^H

  [[nodiscard]] std::size_t traveled_count() const { return driving_speed_mps.size(); }
};

// Pure function of (request, store): slots [t_c - p, t_c] for every route
// segment, with the store fallback covering unobserved cells.
// Throws DataError when a route segment is unknown to the network.
OfflineFeatures extract_offline(const Request& request, const RoadNetwork& network,
                                const TrafficConditionStore& store, int past_slots);

// Speeds are segment length / travel time over the traveled prefix; history
// marks are aligned per position with the latest event at a position winning.
// Events beyond the traveled prefix (position > i_t) are a ConsistencyError.
OnlineFeatures extract_online(const Request& request, const RoadNetwork& network,
                              const std::vector<DecisionEvent>& history);

}  // namespace ertte
