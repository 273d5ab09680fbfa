#include "ertte/route.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ertte/errors.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

BackgroundInfo derive_background(std::int64_t epoch_s, int weather) {
  BackgroundInfo bg;
  const int minutes = weekly_slot(epoch_s, 1);  // minutes since Monday 00:00
  bg.weekday = minutes / (24 * 60);
  bg.holiday = bg.weekday >= 5;
  const int hour = (minutes % (24 * 60)) / 60;
  bg.rush_hour = (hour >= 7 && hour < 9) || (hour >= 17 && hour < 19);
  bg.weather = weather;
  return bg;
}

TravelRoute::TravelRoute(std::int64_t route_id, std::int64_t departure_epoch_s, int weather,
                         std::vector<RouteLink> links)
    : id_(route_id), departure_(departure_epoch_s), links_(std::move(links)) {
  if (links_.empty()) throw DataError("route " + std::to_string(route_id) + " has no links");
  for (const auto& l : links_) {
    if (l.travel_time_s <= 0.0)
      throw DataError("route " + std::to_string(route_id) + " has a non-positive link time");
    total_time_s_ += l.travel_time_s;
  }
  if (weather < 0 || weather >= 16)
    throw DataError("route " + std::to_string(route_id) + " has weather code out of [0,16)");
  background_ = derive_background(departure_, weather);
}

double Request::remaining_time_s() const {
  double sum = 0.0;
  for (std::size_t i = split_index; i < route->size(); ++i) sum += route->links()[i].travel_time_s;
  return sum;
}

std::size_t split_index_at(const TravelRoute& route, double t) {
  if (t < 0.0) throw DataError("split time is negative");
  if (t > route.total_time_s() + 1e-9)
    throw DataError("split time exceeds total travel time");
  double cum = 0.0;
  std::size_t i = 0;
  for (; i < route.size(); ++i) {
    const double next = cum + route.links()[i].travel_time_s;
    if (next > t) break;  // boundary (next == t) counts as traveled
    cum = next;
  }
  return i;
}

RouteSplit split_route(const TravelRoute& route, double t) {
  RouteSplit out;
  out.split_index = split_index_at(route, t);
  out.traveled.assign(route.links().begin(), route.links().begin() + static_cast<long>(out.split_index));
  out.remaining.assign(route.links().begin() + static_cast<long>(out.split_index), route.links().end());
  return out;
}

Request make_request(const TravelRoute& route, double t) {
  return Request{&route, t, split_index_at(route, t)};
}

namespace {

DatasetSplit split_by_buckets(std::vector<TravelRoute> sorted, std::size_t n_train, std::size_t n_val) {
  DatasetSplit out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i < n_train)
      out.train.push_back(std::move(sorted[i]));
    else if (i < n_train + n_val)
      out.validation.push_back(std::move(sorted[i]));
    else
      out.test.push_back(std::move(sorted[i]));
  }
  return out;
}

}  // namespace

DatasetSplit chronological_split(std::vector<TravelRoute> routes, const SplitRatios& ratios) {
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1");
  if (routes.empty()) throw DataError("no routes to split");

  std::stable_sort(routes.begin(), routes.end(), [](const TravelRoute& a, const TravelRoute& b) {
    return a.departure() < b.departure();
  });

  std::vector<std::int64_t> days;
  for (const auto& r : routes) {
    const std::int64_t day = r.departure() / 86400;
    if (days.empty() || days.back() != day) days.push_back(day);
  }

  if (days.size() < 3) {
    // Too few distinct days for a day-level split; fall back to route counts.
    const auto n = routes.size();
    auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
    auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(n)));
    n_train = std::min(n_train, n);
    n_val = std::min(n_val, n - n_train);
    DatasetSplit out = split_by_buckets(std::move(routes), n_train, n_val);
    out.day_fallback = true;
    return out;
  }

  const auto d = static_cast<double>(days.size());
  auto train_days = static_cast<std::size_t>(std::llround(ratios.train * d));
  auto val_days = static_cast<std::size_t>(std::llround(ratios.validation * d));
  train_days = std::clamp<std::size_t>(train_days, 1, days.size() - 2);
  val_days = std::clamp<std::size_t>(val_days, 1, days.size() - train_days - 1);
  const std::int64_t last_train_day = days[train_days - 1];
  const std::int64_t last_val_day = days[train_days + val_days - 1];

  DatasetSplit out;
  for (auto& r : routes) {
    const std::int64_t day = r.departure() / 86400;
    if (day <= last_train_day)
      out.train.push_back(std::move(r));
    else if (day <= last_val_day)
      out.validation.push_back(std::move(r));
    else
      out.test.push_back(std::move(r));
  }
  return out;
}

void save_routes(const std::vector<TravelRoute>& routes, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  char buf[64];
  for (const auto& r : routes) {
    out << r.id() << '|' << r.departure() << '|' << r.background().weather << '|';
    for (std::size_t i = 0; i < r.links().size(); ++i) {
      const auto& l = r.links()[i];
      std::snprintf(buf, sizeof(buf), "%s%d:%.3f", i == 0 ? "" : ",", l.segment, l.travel_time_s);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

std::vector<TravelRoute> load_routes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<TravelRoute> routes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto err = [&](const std::string& what) -> DataError {
      return DataError(path + ":" + std::to_string(line_no) + ": " + what);
    };
    std::istringstream ls(line);
    std::string id_s, dep_s, weather_s, links_s;
    if (!std::getline(ls, id_s, '|') || !std::getline(ls, dep_s, '|') ||
        !std::getline(ls, weather_s, '|') || !std::getline(ls, links_s))
      throw err("expected 'route_id|departure_epoch|weather_code|links'");
    std::int64_t id = 0, dep = 0;
    int weather = 0;
    try {
      id = std::stoll(id_s);
      dep = std::stoll(dep_s);
      weather = std::stoi(weather_s);
    } catch (const std::exception&) {
      throw err("invalid numeric header field");
    }
    std::vector<RouteLink> links;
    std::istringstream linkstream(links_s);
    std::string item;
    while (std::getline(linkstream, item, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw err("link '" + item + "' missing ':'");
      try {
        RouteLink l;
        l.segment = std::stoi(item.substr(0, colon));
        l.travel_time_s = std::stod(item.substr(colon + 1));
        links.push_back(l);
      } catch (const std::exception&) {
        throw err("invalid link '" + item + "'");
      }
    }
    if (links.empty()) throw err("route has no links");
    try {
      routes.emplace_back(id, dep, weather, std::move(links));
    } catch (const DataError& e) {
      throw err(e.what());
    }
  }
  return routes;
}

}  // namespace ertte
