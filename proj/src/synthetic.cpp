#include "ertte/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ertte/errors.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

double congestion_factor(std::int64_t epoch_s) {
  const int minutes = weekly_slot(epoch_s, 1);
  const int weekday = minutes / (24 * 60);
  const int hour = (minutes % (24 * 60)) / 60;
  double base = 1.0;
  if (weekday < 5 && ((hour >= 7 && hour < 9) || (hour >= 17 && hour < 19)))
    base = 0.65;
  else if (hour >= 22 || hour < 5)
    base = 1.10;
  base += 0.05 * std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(minutes) / 180.0);
  return std::clamp(base, 0.55, 1.15);
}

namespace {

constexpr double kClassSpeedLimit[4] = {8.33, 11.11, 13.89, 16.67};  // 30..60 km/h

double quantize_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

}  // namespace

SyntheticWorld generate_synthetic_world(const SyntheticConfig& config) {
  if (config.grid_size < 2) throw ConfigError("grid_size must be >= 2");
  if (config.n_routes < 1) throw ConfigError("n_routes must be >= 1");
  if (std::abs(config.constant_fraction + config.regime_shift_fraction - 1.0) > 1e-9)
    throw ConfigError("profile mix fractions must sum to 1");
  if (config.constant_fraction < 0.0 || config.regime_shift_fraction < 0.0)
    throw ConfigError("profile mix fractions must be non-negative");

  std::mt19937_64 rng(config.seed);
  const int g = config.grid_size;

  SyntheticWorld world;
  for (int v = 0; v < g * g; ++v) world.network.add_vertex(v);

  // 4-connected grid, both directions, dense segment ids.
  std::uniform_real_distribution<double> length_dist(80.0, 400.0);
  std::uniform_int_distribution<int> class_dist(0, 3);
  auto add_edge = [&](int from, int to) {
    SegmentAttrs attrs;
    attrs.from_vertex = from;
    attrs.to_vertex = to;
    attrs.road_class = class_dist(rng);
    attrs.speed_limit_mps = kClassSpeedLimit[attrs.road_class];
    attrs.length_m = std::round(length_dist(rng) * 10.0) / 10.0;
    attrs.lanes = 1 + attrs.road_class / 2;
    world.network.add_segment(attrs);
  };
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      const int v = r * g + c;
      if (c + 1 < g) {
        add_edge(v, v + 1);
        add_edge(v + 1, v);
      }
      if (r + 1 < g) {
        add_edge(v, v + g);
        add_edge(v + g, v);
      }
    }
  }

  // Outgoing segments per vertex for the random walk.
  std::vector<std::vector<SegmentId>> outgoing(static_cast<std::size_t>(g * g));
  for (std::size_t s = 0; s < world.network.segment_count(); ++s) {
    const auto& attrs = world.network.segment(static_cast<SegmentId>(s));
    outgoing[static_cast<std::size_t>(attrs.from_vertex)].push_back(static_cast<SegmentId>(s));
  }

  std::normal_distribution<double> len_dist(config.mean_segments, config.segments_stddev);
  std::uniform_int_distribution<std::int64_t> dep_dist(
      0, static_cast<std::int64_t>(config.span_days) * 86400 - 1);
  std::uniform_int_distribution<int> weather_dist(0, 15);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> ratio_dist(0.60, 0.95);
  std::uniform_real_distribution<double> shift_dist(0.55, 1.35);
  std::uniform_real_distribution<double> jitter_dist(0.90, 1.10);

  const int min_links = 3;
  const int max_links = std::max(min_links + 1, static_cast<int>(config.mean_segments * 2.5));

  world.routes.reserve(static_cast<std::size_t>(config.n_routes));
  for (int i = 0; i < config.n_routes; ++i) {
    const int n_links =
        std::clamp(static_cast<int>(std::lround(len_dist(rng))), min_links, max_links);
    const std::int64_t departure = config.start_epoch_s + dep_dist(rng);
    const int weather = weather_dist(rng);
    const bool constant_profile = unit(rng) < config.constant_fraction;
    const double base_ratio = ratio_dist(rng);
    const int shift_at = constant_profile
                             ? n_links
                             : 1 + static_cast<int>(unit(rng) * static_cast<double>(n_links - 1));
    const double shifted_ratio =
        std::clamp(base_ratio * shift_dist(rng), 0.40, 1.10);

    int vertex = static_cast<int>(unit(rng) * static_cast<double>(g * g)) % (g * g);
    SegmentId prev = -1;
    std::vector<RouteLink> links;
    links.reserve(static_cast<std::size_t>(n_links));
    double elapsed = 0.0;
    for (int k = 0; k < n_links; ++k) {
      const auto& options = outgoing[static_cast<std::size_t>(vertex)];
      // Avoid immediately reversing onto the opposite segment when possible.
      std::vector<SegmentId> viable;
      for (SegmentId s : options) {
        if (prev >= 0 && world.network.segment(s).to_vertex ==
                             world.network.segment(prev).from_vertex &&
            options.size() > 1)
          continue;
        viable.push_back(s);
      }
      if (viable.empty()) viable = options;
      const SegmentId seg = viable[static_cast<std::size_t>(unit(rng) * static_cast<double>(viable.size())) %
                                   viable.size()];
      const auto& attrs = world.network.segment(seg);
      const double ratio = k < shift_at ? base_ratio : shifted_ratio;
      double speed = ratio * attrs.speed_limit_mps;
      if (!constant_profile) {
        speed *= congestion_factor(departure + static_cast<std::int64_t>(elapsed));
        speed *= jitter_dist(rng);
      }
      RouteLink link;
      link.segment = seg;
      link.travel_time_s = std::max(0.001, quantize_ms(attrs.length_m / speed));
      elapsed += link.travel_time_s;
      links.push_back(link);
      vertex = attrs.to_vertex;
      prev = seg;
    }
    world.routes.emplace_back(i, departure, weather, std::move(links));
  }
  return world;
}

}  // namespace ertte
