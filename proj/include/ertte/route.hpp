#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ertte/road_network.hpp"

namespace ertte {

struct RouteLink {
  SegmentId segment = 0;
  double travel_time_s = 0.0;
};

// Per-trip categorical context. Weekday/holiday/rush are derived from the
// departure timestamp; weather is carried in the route file.
struct BackgroundInfo {
  int weekday = 0;       // 0 = Monday .. 6 = Sunday
  bool holiday = false;  // weekend at desk scale
  bool rush_hour = false;
  int weather = 0;  // category in [0, 16)
};

class TravelRoute {
 public:
  TravelRoute() = default;
  // Throws DataError on empty links or non-positive travel times.
  TravelRoute(std::int64_t route_id, std::int64_t departure_epoch_s, int weather,
              std::vector<RouteLink> links);

  [[nodiscard]] std::int64_t id() const { return id_; }
  [[nodiscard]] std::int64_t departure() const { return departure_; }
  [[nodiscard]] const std::vector<RouteLink>& links() const { return links_; }
  [[nodiscard]] std::size_t size() const { return links_.size(); }
  [[nodiscard]] double total_time_s() const { return total_time_s_; }
  [[nodiscard]] const BackgroundInfo& background() const { return background_; }

 private:
  std::int64_t id_ = 0;
  std::int64_t departure_ = 0;
  std::vector<RouteLink> links_;
  double total_time_s_ = 0.0;
  BackgroundInfo background_;
};

// An in-trip prediction request: `elapsed_s` seconds after departure, the
// first `split_index` links are fully traveled.
struct Request {
  const TravelRoute* route = nullptr;
  double elapsed_s = 0.0;
  std::size_t split_index = 0;

  [[nodiscard]] std::int64_t wallclock_s() const {
    return route->departure() + static_cast<std::int64_t>(elapsed_s);
  }
  [[nodiscard]] std::size_t remaining_count() const { return route->size() - split_index; }
  [[nodiscard]] double remaining_time_s() const;
};

struct RouteSplit {
  std::vector<RouteLink> traveled;
  std::vector<RouteLink> remaining;
  std::size_t split_index = 0;
};

// Links fully completed by elapsed time t count as traveled; a link whose
// cumulative time equals t exactly counts as traveled.
// Throws DataError if t is negative or exceeds the total travel time.
RouteSplit split_route(const TravelRoute& route, double t);

// split_route without materializing the link vectors.
std::size_t split_index_at(const TravelRoute& route, double t);

Request make_request(const TravelRoute& route, double t);

struct DatasetSplit {
  std::vector<TravelRoute> train;
  std::vector<TravelRoute> validation;
  std::vector<TravelRoute> test;
  // True when fewer than 3 distinct days forced a per-route fallback split.
  bool day_fallback = false;
};

struct SplitRatios {
  double train = 0.7;
  double validation = 0.1;
  double test = 0.2;
};

// Orders routes by departure day and assigns whole days to the three splits
// (earliest 70% of days -> train, next 10% -> validation, rest -> test).
// Routes sharing a day always land in the same split. Falls back to a
// per-route chronological split when there are fewer than 3 distinct days.
DatasetSplit chronological_split(std::vector<TravelRoute> routes,
                                 const SplitRatios& ratios = {});

// Route file: newline-delimited `route_id|departure_epoch|weather_code|seg:time,...`
// with times printed to 3 decimal places.
void save_routes(const std::vector<TravelRoute>& routes, const std::string& path);
std::vector<TravelRoute> load_routes(const std::string& path);

BackgroundInfo derive_background(std::int64_t epoch_s, int weather);

}  // namespace ertte
