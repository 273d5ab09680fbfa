#pragma once

#include <cstdint>
#include <vector>

#include "ertte/road_network.hpp"
#include "ertte/route.hpp"

namespace ertte {

// Desk-scale stand-in for the proprietary trajectory datasets: a 4-connected
// grid road network plus random-walk routes with time-of-week congestion and
// per-driver speed profiles.
struct SyntheticConfig {
  std::uint64_t seed = 7;
  int grid_size = 8;  // grid_size x grid_size vertices, >= 2
  int n_routes = 5000;
  double mean_segments = 12.0;  // target mean links per route
  double segments_stddev = 4.0;
  // Fractions must sum to 1. Constant-speed drivers never deviate from their
  // base speed ratio; regime-shift drivers change it mid-trip and see
  // congestion plus per-segment jitter.
  double constant_fraction = 0.6;
  double regime_shift_fraction = 0.4;
  int span_days = 14;  // departures drawn uniformly over this many days
  std::int64_t start_epoch_s = 1704672000;  // Mon 2024-01-08 00:00:00 UTC
};

struct SyntheticWorld {
  RoadNetwork network;
  std::vector<TravelRoute> routes;
};

// Deterministic for a fixed config (including seed).
// Throws ConfigError on invalid grid/route counts or a profile mix that does
// not sum to 1.
SyntheticWorld generate_synthetic_world(const SyntheticConfig& config);

// Congestion speed factor for a weekly 5-minute-resolution timestamp;
// deterministic, in [0.55, 1.15]. Exposed for tests.
double congestion_factor(std::int64_t epoch_s);

}  // namespace ertte
