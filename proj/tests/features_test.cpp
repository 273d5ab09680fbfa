#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <random>

#include "ertte/errors.hpp"
#include "ertte/features.hpp"
#include "ertte/synthetic.hpp"
#include "ertte/time_slots.hpp"
#include "ertte/traffic_store.hpp"

using namespace ertte;

namespace {

// Monday 1970-01-05 00:00:00 UTC.
constexpr std::int64_t kMondayEpoch = 4 * 86400;

RoadNetwork two_segment_network() {
  RoadNetwork net;
  for (int v = 0; v < 3; ++v) net.add_vertex(v);
  net.add_segment({0, 1, 100.0, 10.0, 1, 0});
  net.add_segment({1, 2, 200.0, 15.0, 2, 1});
  return net;
}

}  // namespace

TEST_CASE("weekly_slot basics") {
  CHECK(weekly_slot(kMondayEpoch + 7 * 60, 5) == 1);            // Monday 00:07
  CHECK(weekly_slot(kMondayEpoch + (7 * 24 * 60 - 1) * 60, 5) == 2015);  // Sunday 23:59
  CHECK(weekly_slot(kMondayEpoch, 5) == 0);
}

TEST_CASE("weekly_slot agrees with the civil calendar oracle") {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::int64_t> ts_dist(0, 4102444800LL);  // through 2100
  for (int i = 0; i < 10000; ++i) {
    const std::int64_t ts = ts_dist(rng);
    const int slot = weekly_slot(ts, 5);
    // Oracle: std::chrono civil weekday plus in-day minutes.
    using namespace std::chrono;
    const sys_seconds tp{seconds{ts}};
    const auto dp = floor<days>(tp);
    const weekday wd{dp};
    const auto tod = ts - dp.time_since_epoch().count() * 86400;
    const int monday_based = (static_cast<int>(wd.c_encoding()) + 6) % 7;  // Sunday=0 -> Monday=0
    const int oracle = (monday_based * 24 * 60 + static_cast<int>(tod / 60)) / 5;
    CHECK(slot == oracle);
  }
}

TEST_CASE("traffic store single observation fills all four stats") {
  RoadNetwork net = two_segment_network();
  // One traversal of segment 0 at 10 m/s (100 m in 10 s).
  std::vector<TravelRoute> routes{TravelRoute(1, kMondayEpoch, 0, {{0, 10.0}})};
  const auto store = build_traffic_store(routes, 5, net);
  const int slot = weekly_slot(kMondayEpoch, 5);
  const auto& stats = store.lookup(0, slot);
  CHECK(stats.v_min == doctest::Approx(10.0));
  CHECK(stats.v_max == doctest::Approx(10.0));
  CHECK(stats.v_med == doctest::Approx(10.0));
  CHECK(stats.v_avg == doctest::Approx(10.0));
}

TEST_CASE("traffic store arithmetic on three observations") {
  RoadNetwork net = two_segment_network();
  // Speeds 5, 10, 15 m/s within one slot on segment 0.
  std::vector<TravelRoute> routes{
      TravelRoute(1, kMondayEpoch, 0, {{0, 20.0}}),   // 5 m/s
      TravelRoute(2, kMondayEpoch + 60, 0, {{0, 10.0}}),   // 10 m/s
      TravelRoute(3, kMondayEpoch + 120, 0, {{0, 100.0 / 15.0}}),  // 15 m/s
  };
  const auto store = build_traffic_store(routes, 5, net);
  const auto& stats = store.lookup(0, 0);
  CHECK(stats.v_min == doctest::Approx(5.0));
  CHECK(stats.v_max == doctest::Approx(15.0));
  CHECK(stats.v_med == doctest::Approx(10.0));
  CHECK(stats.v_avg == doctest::Approx(10.0));
}

TEST_CASE("traffic store matches a brute-force aggregation oracle") {
  SyntheticConfig cfg;
  cfg.seed = 21;
  cfg.grid_size = 4;
  cfg.n_routes = 120;  // ~1k+ traversals
  const auto world = generate_synthetic_world(cfg);
  const auto store = build_traffic_store(world.routes, 5, world.network);

  std::map<std::pair<SegmentId, int>, std::vector<double>> oracle;
  for (const auto& route : world.routes) {
    double elapsed = 0.0;
    for (const auto& link : route.links()) {
      const int slot = weekly_slot(route.departure() + static_cast<std::int64_t>(elapsed), 5);
      oracle[{link.segment, slot}].push_back(
          world.network.segment(link.segment).length_m / link.travel_time_s);
      elapsed += link.travel_time_s;
    }
  }
  CHECK(store.observed_cells() == oracle.size());
  for (auto& [key, speeds] : oracle) {
    std::sort(speeds.begin(), speeds.end());
    const auto& stats = store.lookup(key.first, key.second);
    CHECK(stats.v_min == speeds.front());
    CHECK(stats.v_max == speeds.back());
    double sum = 0.0;
    for (double s : speeds) sum += s;
    CHECK(stats.v_avg == doctest::Approx(sum / speeds.size()).epsilon(1e-12));
    const std::size_t n = speeds.size();
    const double med = n % 2 == 1 ? speeds[n / 2] : 0.5 * (speeds[n / 2 - 1] + speeds[n / 2]);
    CHECK(stats.v_med == doctest::Approx(med).epsilon(1e-12));
    // Ordering invariant.
    CHECK(stats.v_min <= stats.v_med);
    CHECK(stats.v_med <= stats.v_max);
    CHECK(stats.v_min <= stats.v_avg);
    CHECK(stats.v_avg <= stats.v_max);
  }
}

TEST_CASE("traffic store divisor validation and CSV round trip") {
  RoadNetwork net = two_segment_network();
  std::vector<TravelRoute> routes{TravelRoute(1, kMondayEpoch, 0, {{0, 10.0}, {1, 20.0}})};
  CHECK_THROWS_AS(build_traffic_store(routes, 7, net), ConfigError);
  const auto store = build_traffic_store(routes, 5, net);
  const auto path = std::filesystem::temp_directory_path() / "ertte_traffic_test.csv";
  store.save_csv(path.string());
  const auto loaded = TrafficConditionStore::load_csv(path.string());
  CHECK(loaded.observed_cells() == store.observed_cells());
  CHECK(loaded.fallback().v_avg == doctest::Approx(store.fallback().v_avg));
  const int slot = weekly_slot(kMondayEpoch, 5);
  CHECK(loaded.lookup(0, slot).v_avg == doctest::Approx(store.lookup(0, slot).v_avg));
  std::filesystem::remove(path);
}

TEST_CASE("extract_offline depth and shapes") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(1, kMondayEpoch, 2, {{0, 10.0}, {1, 20.0}});
  std::vector<TravelRoute> routes{route};
  const auto store = build_traffic_store(routes, 5, net);
  const Request request = make_request(route, 0.0);

  const auto p0 = extract_offline(request, net, store, 0);
  CHECK(p0.route_length() == 2);
  CHECK(p0.slot_depth() == 1);

  const auto p2 = extract_offline(request, net, store, 2);
  CHECK(p2.slot_depth() == 3);
  REQUIRE(p2.temporal.size() == 2);
  CHECK(p2.temporal[0].size() == 3);
  CHECK(p2.traffic[0].size() == 3);
  // Slots run oldest to newest and end at the request's current slot.
  CHECK(p2.temporal[0][2] == p2.current_slot);
  CHECK(p2.temporal[0][1] == shifted_slot(p2.current_slot, 1, 5));
}

TEST_CASE("extract_offline values equal direct store lookups") {
  SyntheticConfig cfg;
  cfg.seed = 31;
  cfg.grid_size = 4;
  cfg.n_routes = 60;
  const auto world = generate_synthetic_world(cfg);
  const auto store = build_traffic_store(world.routes, 5, world.network);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto& route = world.routes[rng() % world.routes.size()];
    std::uniform_real_distribution<double> t_dist(0.0, route.total_time_s() * 0.999);
    const Request request = make_request(route, t_dist(rng));
    const auto features = extract_offline(request, world.network, store, 3);
    const int current = weekly_slot(request.wallclock_s(), 5);
    CHECK(features.current_slot == current);
    for (std::size_t i = 0; i < route.size(); ++i) {
      for (int back = 0; back <= 3; ++back) {
        const int slot = shifted_slot(current, back, 5);
        const auto& expected = store.lookup(route.links()[i].segment, slot);
        const auto& got = features.traffic[i][static_cast<std::size_t>(3 - back)];
        CHECK(got.v_avg == expected.v_avg);
        CHECK(got.v_min == expected.v_min);
      }
    }
  }
}

TEST_CASE("extract_offline is pure") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(1, kMondayEpoch, 2, {{0, 10.0}, {1, 20.0}});
  const auto store = build_traffic_store({route}, 5, net);
  const Request request = make_request(route, 5.0);
  const auto a = extract_offline(request, net, store, 2);
  const auto b = extract_offline(request, net, store, 2);
  CHECK(a.current_slot == b.current_slot);
  REQUIRE(a.traffic.size() == b.traffic.size());
  for (std::size_t i = 0; i < a.traffic.size(); ++i)
    for (std::size_t s = 0; s < a.traffic[i].size(); ++s)
      CHECK(a.traffic[i][s].v_avg == b.traffic[i][s].v_avg);
}

TEST_CASE("extract_offline rejects unknown segments by name") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(9, kMondayEpoch, 0, {{0, 10.0}, {7, 5.0}});
  const auto store = build_traffic_store({}, 5, net);
  const Request request = make_request(route, 0.0);
  try {
    extract_offline(request, net, store, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

TEST_CASE("extract_online at trip start is empty") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(1, kMondayEpoch, 0, {{0, 10.0}, {1, 20.0}});
  const auto online = extract_online(make_request(route, 0.0), net, {});
  CHECK(online.traveled_count() == 0);
  CHECK(online.decision_history.empty());
}

TEST_CASE("extract_online speeds are length over time") {
  RoadNetwork net = two_segment_network();
  // 100 m in 10 s and 200 m in 20 s are both 10 m/s.
  TravelRoute route(1, kMondayEpoch, 0, {{0, 10.0}, {1, 20.0}});
  const auto online = extract_online(make_request(route, 30.0), net, {});
  REQUIRE(online.traveled_count() == 2);
  CHECK(online.driving_speed_mps[0] == doctest::Approx(10.0));
  CHECK(online.driving_speed_mps[1] == doctest::Approx(10.0));
  CHECK(online.decision_history[0] == HistoryMark::kNone);
}

TEST_CASE("extract_online aligns decision events and keeps prefix consistency") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(1, kMondayEpoch, 0, {{0, 10.0}, {1, 20.0}});
  std::vector<DecisionEvent> history{{0, DecisionAction::kRepredict},
                                     {1, DecisionAction::kLookup}};

  const auto early = extract_online(make_request(route, 10.0), net, history);
  REQUIRE(early.traveled_count() == 1);
  CHECK(early.decision_history[0] == HistoryMark::kRepredict);

  const auto late = extract_online(make_request(route, 30.0), net, history);
  REQUIRE(late.traveled_count() == 2);
  // Re-splitting later preserves earlier positions (prefix consistency).
  CHECK(late.decision_history[0] == early.decision_history[0]);
  CHECK(late.decision_history[1] == HistoryMark::kLookup);
}

TEST_CASE("extract_online rejects history beyond the traveled prefix") {
  RoadNetwork net = two_segment_network();
  TravelRoute route(1, kMondayEpoch, 0, {{0, 10.0}, {1, 20.0}});
  std::vector<DecisionEvent> history{{2, DecisionAction::kLookup}};
  CHECK_THROWS_AS(extract_online(make_request(route, 10.0), net, history), ConsistencyError);
}

TEST_CASE("online feature lengths equal the split index") {
  SyntheticConfig cfg;
  cfg.seed = 41;
  cfg.grid_size = 4;
  cfg.n_routes = 30;
  const auto world = generate_synthetic_world(cfg);
  std::mt19937_64 rng(3);
  for (const auto& route : world.routes) {
    std::uniform_real_distribution<double> t_dist(0.0, route.total_time_s() * 0.999);
    const double t = t_dist(rng);
    const Request request = make_request(route, t);
    const auto online = extract_online(request, world.network, {});
    CHECK(online.traveled_count() == request.split_index);
    CHECK(online.decision_history.size() == request.split_index);
  }
}
