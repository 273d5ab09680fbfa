#include "ertte/traffic_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ertte/errors.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

const SlotStats& TrafficConditionStore::lookup(SegmentId segment, int slot) const {
  auto it = cells_.find(key(segment, slot));
  return it == cells_.end() ? fallback_ : it->second;
}

bool TrafficConditionStore::observed(SegmentId segment, int slot) const {
  return cells_.contains(key(segment, slot));
}

TrafficConditionStore build_traffic_store(const std::vector<TravelRoute>& routes,
                                          int slot_minutes, const RoadNetwork& network) {
  if (slot_minutes <= 0 || 60 % slot_minutes != 0)
    throw ConfigError("slot_minutes must divide 60, got " + std::to_string(slot_minutes));

  TrafficConditionStore store;
  store.slot_minutes_ = slot_minutes;

  std::unordered_map<std::int64_t, std::vector<double>> observations;
  double speed_sum = 0.0;
  std::size_t speed_count = 0;
  for (const auto& route : routes) {
    double elapsed = 0.0;
    for (const auto& link : route.links()) {
      const auto& attrs = network.segment(link.segment);
      const double speed = attrs.length_m / link.travel_time_s;
      const int slot =
          weekly_slot(route.departure() + static_cast<std::int64_t>(elapsed), slot_minutes);
      observations[TrafficConditionStore::key(link.segment, slot)].push_back(speed);
      speed_sum += speed;
      ++speed_count;
      elapsed += link.travel_time_s;
    }
  }

  const double network_mean = speed_count == 0 ? 10.0 : speed_sum / static_cast<double>(speed_count);
  store.fallback_ = SlotStats{network_mean, network_mean, network_mean, network_mean};

  for (auto& [k, speeds] : observations) {
    std::sort(speeds.begin(), speeds.end());
    SlotStats stats;
    stats.v_min = speeds.front();
    stats.v_max = speeds.back();
    const std::size_t n = speeds.size();
    stats.v_med = n % 2 == 1 ? speeds[n / 2] : 0.5 * (speeds[n / 2 - 1] + speeds[n / 2]);
    double sum = 0.0;
    for (double s : speeds) sum += s;
    stats.v_avg = sum / static_cast<double>(n);
    store.cells_.emplace(k, stats);
  }
  return store;
}

void TrafficConditionStore::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "segment_id,slot,v_min,v_max,v_med,v_avg\n";
  char buf[160];
  auto emit = [&](std::int64_t segment, std::int64_t slot, const SlotStats& s) {
    std::snprintf(buf, sizeof(buf), "%lld,%lld,%.9g,%.9g,%.9g,%.9g\n",
                  static_cast<long long>(segment), static_cast<long long>(slot), s.v_min, s.v_max,
                  s.v_med, s.v_avg);
    out << buf;
  };
  emit(-1, 0, fallback_);
  std::vector<std::int64_t> keys;
  keys.reserve(cells_.size());
  for (const auto& [k, _] : cells_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  for (std::int64_t k : keys) emit(k >> 20, k & ((1 << 20) - 1), cells_.at(k));
  if (!out) throw DataError("write failed for '" + path + "'");
}

TrafficConditionStore TrafficConditionStore::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++line_no;
  if (line != "segment_id,slot,v_min,v_max,v_med,v_avg")
    throw DataError(path + ":1: unexpected header '" + line + "'");

  TrafficConditionStore store;
  bool fallback_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[6];
    for (int i = 0; i < 6; ++i) {
      if (!std::getline(ls, f[i], ','))
        throw DataError(path + ":" + std::to_string(line_no) + ": expected 6 fields");
    }
    try {
      const long long segment = std::stoll(f[0]);
      const int slot = std::stoi(f[1]);
      const SlotStats stats{std::stod(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
      if (segment == -1) {
        store.fallback_ = stats;
        fallback_seen = true;
      } else {
        store.cells_.emplace(key(static_cast<SegmentId>(segment), slot), stats);
      }
    } catch (const std::exception&) {
      throw DataError(path + ":" + std::to_string(line_no) + ": invalid numeric field");
    }
  }
  if (!fallback_seen) throw DataError(path + ": missing fallback row (segment_id = -1)");
  return store;
}

}  // namespace ertte
