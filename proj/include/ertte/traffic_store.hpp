#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ertte/road_network.hpp"
#include "ertte/route.hpp"

namespace ertte {

// Historical speed statistics of one (segment, weekly slot) cell, in m/s.
struct SlotStats {
  double v_min = 0.0;
  double v_max = 0.0;
  double v_med = 0.0;
  double v_avg = 0.0;
};

// Per-(segment, weekly slot) speed statistics with a network-wide fallback
// for unobserved cells. Immutable after build.
class TrafficConditionStore {
 public:
  TrafficConditionStore() = default;

  [[nodiscard]] int slot_minutes() const { return slot_minutes_; }
  [[nodiscard]] const SlotStats& fallback() const { return fallback_; }
  [[nodiscard]] std::size_t observed_cells() const { return cells_.size(); }

  // Stats for (segment, slot); the fallback when the cell was never observed.
  [[nodiscard]] const SlotStats& lookup(SegmentId segment, int slot) const;
  [[nodiscard]] bool observed(SegmentId segment, int slot) const;

  // CSV `segment_id,slot,v_min,v_max,v_med,v_avg`; the fallback row uses
  // segment_id = -1.
  void save_csv(const std::string& path) const;
  static TrafficConditionStore load_csv(const std::string& path);

  friend TrafficConditionStore build_traffic_store(const std::vector<TravelRoute>& routes,
                                                   int slot_minutes, const RoadNetwork& network);

 private:
  [[nodiscard]] static std::int64_t key(SegmentId segment, int slot) {
    return (static_cast<std::int64_t>(segment) << 20) | static_cast<std::int64_t>(slot);
  }

  int slot_minutes_ = 5;
  SlotStats fallback_;
  std::unordered_map<std::int64_t, SlotStats> cells_;
};

// Aggregates min/max/median/mean observed speed per (segment, slot) over the
// given routes; the fallback is the network-wide mean speed.
// Throws ConfigError unless slot_minutes divides 60.
TrafficConditionStore build_traffic_store(const std::vector<TravelRoute>& routes,
                                          int slot_minutes, const RoadNetwork& network);

}  // namespace ertte
