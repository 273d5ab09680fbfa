#include "ertte/features.hpp"

#include <string>

#include "ertte/errors.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

OfflineFeatures extract_offline(const Request& request, const RoadNetwork& network,
                                const TrafficConditionStore& store, int past_slots) {
  if (past_slots < 0) throw ConfigError("past_slots must be non-negative");
  const TravelRoute& route = *request.route;

  OfflineFeatures out;
  out.background = route.background();
  out.past_slots = past_slots;
  out.current_slot = weekly_slot(request.wallclock_s(), store.slot_minutes());

  const std::size_t n = route.size();
  out.spatial.reserve(n);
  out.temporal.reserve(n);
  out.traffic.reserve(n);
  for (const auto& link : route.links()) {
    if (!network.has_segment(link.segment))
      throw DataError("route " + std::to_string(route.id()) + " references unknown segment " +
                      std::to_string(link.segment));
    out.spatial.push_back({link.segment, network.segment(link.segment)});
    std::vector<int> slots(static_cast<std::size_t>(past_slots) + 1);
    std::vector<SlotStats> stats(static_cast<std::size_t>(past_slots) + 1);
    for (int back = past_slots; back >= 0; --back) {
      const int slot = shifted_slot(out.current_slot, back, store.slot_minutes());
      const std::size_t idx = static_cast<std::size_t>(past_slots - back);
      slots[idx] = slot;
      stats[idx] = store.lookup(link.segment, slot);
    }
    out.temporal.push_back(std::move(slots));
    out.traffic.push_back(std::move(stats));
  }
  return out;
}

OnlineFeatures extract_online(const Request& request, const RoadNetwork& network,
                              const std::vector<DecisionEvent>& history) {
  const TravelRoute& route = *request.route;
  const std::size_t i_t = request.split_index;

  OnlineFeatures out;
  out.driving_speed_mps.reserve(i_t);
  for (std::size_t i = 0; i < i_t; ++i) {
    const auto& link = route.links()[i];
    out.driving_speed_mps.push_back(network.segment(link.segment).length_m / link.travel_time_s);
  }

  out.decision_history.assign(i_t, HistoryMark::kNone);
  for (const auto& event : history) {
    if (event.position > i_t)
      throw ConsistencyError("decision history at position " + std::to_string(event.position) +
                             " is beyond the traveled prefix (" + std::to_string(i_t) + ")");
    if (event.position == i_t) continue;  // current boundary, not yet traveled
    out.decision_history[event.position] = event.action == DecisionAction::kRepredict
                                               ? HistoryMark::kRepredict
                                               : HistoryMark::kLookup;
  }
  return out;
}

}  // namespace ertte
