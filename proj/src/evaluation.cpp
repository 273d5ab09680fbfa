#include "ertte/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"

namespace ertte {

PolicyKind parse_policy(const std::string& name) {
  if (name == "learned") return PolicyKind::kLearned;
  if (name == "always") return PolicyKind::kAlwaysRepredict;
  if (name == "never-after-first") return PolicyKind::kLookupAfterFirst;
  throw ConfigError("unknown policy '" + name + "' (learned|always|never-after-first)");
}

std::string to_string(PolicyKind policy) {
  switch (policy) {
    case PolicyKind::kLearned: return "learned";
    case PolicyKind::kAlwaysRepredict: return "always";
    case PolicyKind::kLookupAfterFirst: return "never-after-first";
  }
  return "?";
}

Metrics compute_metrics(const std::vector<double>& truths, const std::vector<double>& predictions,
                        double mape_min_truth) {
  if (truths.size() != predictions.size())
    throw DataError("metric inputs differ in length");
  if (truths.empty()) throw DataError("metrics require at least one request");
  Metrics m;
  double se = 0.0, ae = 0.0, ape = 0.0;
  std::size_t mape_n = 0;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const double err = truths[i] - predictions[i];
    se += err * err;
    ae += std::abs(err);
    if (truths[i] >= mape_min_truth) {
      ape += std::abs(err / truths[i]);
      ++mape_n;
    } else {
      ++m.mape_excluded;
    }
  }
  const auto n = static_cast<double>(truths.size());
  m.rmse = std::sqrt(se / n);
  m.mae = ae / n;
  m.mape = mape_n == 0 ? 0.0 : 100.0 * ape / static_cast<double>(mape_n);
  return m;
}

namespace {

struct RouteOutcome {
  RouteMetrics metrics;
  std::vector<EvalEvent> events;
};

RouteOutcome evaluate_route(const TravelRoute& route, const DqnAgent* agent, PolicyKind policy,
                            const PredictorInterface& predictor, double interval_s,
                            const WorldContext& ctx, double mape_min_truth) {
  InferenceMemory memory;
  std::vector<DecisionEvent> history;
  std::optional<double> last_repredict_t;
  std::vector<double> truths, predictions;
  RouteOutcome out;
  out.metrics.route_id = route.id();

  const double total = route.total_time_s();
  for (std::size_t k = 0; static_cast<double>(k) * interval_s < total; ++k) {
    const double t = static_cast<double>(k) * interval_s;
    const Request request = make_request(route, t);
    const RequestFeatures features = materialize_features(request, ctx, history);
    const double sigma = last_repredict_t ? t - *last_repredict_t : 0.0;

    const auto lookup = memory.lookup(route.id(), request.split_index);
    const bool miss = !lookup.has_value();

    int action = kActionRepredict;
    if (!miss) {
      switch (policy) {
        case PolicyKind::kAlwaysRepredict:
          action = kActionRepredict;
          break;
        case PolicyKind::kLookupAfterFirst:
          action = kActionLookup;
          break;
        case PolicyKind::kLearned: {
          if (agent == nullptr) throw StateError("learned policy requires an agent");
          AgentState state;
          state.offline = features.offline;
          state.online = features.online;
          state.position = request.split_index;
          state.sigma_s = sigma;
          action = agent->greedy_action(state, false);
          break;
        }
      }
    }

    double y_hat = 0.0;
    if (action == kActionRepredict) {
      PredictionInput input{&features.offline, &features.online, request.split_index};
      std::vector<double> per_segment = predictor.predict(input);
      for (double y : per_segment) y_hat += y;
      memory.store(route.id(), std::move(per_segment), t, request.split_index, route.size());
      last_repredict_t = t;
      ++out.metrics.repredictions;
    } else {
      y_hat = *lookup;
    }
    const double y_true = request.remaining_time_s();
    history.push_back({request.split_index,
                       action == kActionRepredict ? DecisionAction::kRepredict
                                                  : DecisionAction::kLookup});
    truths.push_back(y_true);
    predictions.push_back(y_hat);
    out.events.push_back({route.id(), t, action, y_hat, y_true, sigma});
    ++out.metrics.requests;
  }

  const Metrics m = compute_metrics(truths, predictions, mape_min_truth);
  out.metrics.mae = m.mae;
  out.metrics.rmse = m.rmse;
  out.metrics.mape = m.mape;
  out.metrics.mape_excluded = m.mape_excluded;
  out.metrics.mur = 100.0 * static_cast<double>(out.metrics.repredictions) /
                    static_cast<double>(out.metrics.requests);
  return out;
}

EvalReport merge_outcomes(std::vector<RouteOutcome>& outcomes, std::vector<EvalEvent>* events) {
  EvalReport report;
  double mae = 0.0, rmse = 0.0, mape = 0.0, mur = 0.0;
  for (auto& outcome : outcomes) {
    mae += outcome.metrics.mae;
    rmse += outcome.metrics.rmse;
    mape += outcome.metrics.mape;
    mur += outcome.metrics.mur;
    report.total_requests += outcome.metrics.requests;
    report.total_repredictions += outcome.metrics.repredictions;
    report.total_mape_excluded += outcome.metrics.mape_excluded;
    report.per_route.push_back(outcome.metrics);
    if (events) events->insert(events->end(), outcome.events.begin(), outcome.events.end());
  }
  const auto n = static_cast<double>(outcomes.size());
  report.mae = mae / n;
  report.rmse = rmse / n;
  report.mape = mape / n;
  report.mur = mur / n;
  return report;
}

}  // namespace

SimulationResult simulate_online(const std::vector<TravelRoute>& routes, const DqnAgent* agent,
                                 PolicyKind policy, const PredictorInterface& predictor,
                                 double interval_s, const WorldContext& ctx, int workers,
                                 double mape_min_truth) {
  if (routes.empty()) throw DataError("simulation requires at least one route");
  if (interval_s <= 0.0) throw ConfigError("request interval must be positive");
  const auto start = std::chrono::steady_clock::now();

  std::vector<RouteOutcome> outcomes(routes.size());
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(routes.size())));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < routes.size(); ++i)
      outcomes[i] =
          evaluate_route(routes[i], agent, policy, predictor, interval_s, ctx, mape_min_truth);
  } else {
    std::vector<std::thread> threads;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w) {
      threads.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= routes.size()) break;
          outcomes[i] =
              evaluate_route(routes[i], agent, policy, predictor, interval_s, ctx, mape_min_truth);
        }
      });
    }
    for (auto& t : threads) t.join();
  }

  SimulationResult result;
  result.report = merge_outcomes(outcomes, &result.events);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

EvalReport predictor_only_eval(const std::vector<TravelRoute>& routes,
                               const PredictorInterface& predictor, double interval_s,
                               const WorldContext& ctx, int workers, double mape_min_truth) {
  if (routes.empty()) throw DataError("evaluation requires at least one route");
  std::vector<RouteOutcome> outcomes(routes.size());
  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(routes.size())));
  auto eval_one = [&](std::size_t i) {
    const TravelRoute& route = routes[i];
    std::vector<DecisionEvent> history;
    std::vector<double> truths, predictions;
    RouteOutcome out;
    out.metrics.route_id = route.id();
    const double total = route.total_time_s();
    for (std::size_t k = 0; static_cast<double>(k) * interval_s < total; ++k) {
      const double t = static_cast<double>(k) * interval_s;
      const Request request = make_request(route, t);
      const RequestFeatures features = materialize_features(request, ctx, history);
      PredictionInput input{&features.offline, &features.online, request.split_index};
      double y_hat = 0.0;
      for (double y : predictor.predict(input)) y_hat += y;
      history.push_back({request.split_index, DecisionAction::kRepredict});
      truths.push_back(request.remaining_time_s());
      predictions.push_back(y_hat);
      ++out.metrics.requests;
      ++out.metrics.repredictions;
    }
    const Metrics m = compute_metrics(truths, predictions, mape_min_truth);
    out.metrics.mae = m.mae;
    out.metrics.rmse = m.rmse;
    out.metrics.mape = m.mape;
    out.metrics.mape_excluded = m.mape_excluded;
    out.metrics.mur = 100.0;
    outcomes[i] = std::move(out);
  };
  if (n_workers == 1) {
    for (std::size_t i = 0; i < routes.size(); ++i) eval_one(i);
  } else {
    std::vector<std::thread> threads;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < n_workers; ++w)
      threads.emplace_back([&]() {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= routes.size()) break;
          eval_one(i);
        }
      });
    for (auto& t : threads) t.join();
  }
  return merge_outcomes(outcomes, nullptr);
}

std::vector<SweepRow> interval_sweep(const std::vector<TravelRoute>& routes, const DqnAgent* agent,
                                     PolicyKind policy, const PredictorInterface& predictor,
                                     std::vector<double> intervals, const WorldContext& ctx,
                                     int workers) {
  for (double dt : intervals)
    if (dt <= 0.0) throw ConfigError("sweep intervals must be positive");
  std::sort(intervals.begin(), intervals.end());
  std::vector<SweepRow> rows;
  for (double dt : intervals) {
    const SimulationResult sim =
        simulate_online(routes, agent, policy, predictor, dt, ctx, workers);
    rows.push_back({dt, sim.report.mape, sim.report.mur});
  }
  return rows;
}

std::string EvalReport::to_json(int indent) const {
  nlohmann::json j{{"mae_s", mae},
                   {"rmse_s", rmse},
                   {"mape_pct", mape},
                   {"mur_pct", mur},
                   {"routes", per_route.size()},
                   {"total_requests", total_requests},
                   {"total_repredictions", total_repredictions},
                   {"mape_excluded_requests", total_mape_excluded},
                   {"wall_seconds", wall_seconds}};
  return j.dump(indent);
}

void EvalReport::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "route_id,requests,repredictions,mae_s,rmse_s,mape_pct,mur_pct,mape_excluded\n";
  char buf[240];
  for (const auto& r : per_route) {
    std::snprintf(buf, sizeof(buf), "%lld,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%zu\n",
                  static_cast<long long>(r.route_id), r.requests, r.repredictions, r.mae, r.rmse,
                  r.mape, r.mur, r.mape_excluded);
    out << buf;
  }
}

void save_events(const std::vector<EvalEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const auto& e : events) {
    nlohmann::json j{{"route_id", e.route_id}, {"t", e.t},           {"action", e.action},
                     {"y_hat", e.y_hat},       {"y_true", e.y_true}, {"sigma", e.sigma}};
    out << j.dump() << "\n";
  }
}

std::vector<EvalEvent> load_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<EvalEvent> events;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      events.push_back({j.at("route_id").get<std::int64_t>(), j.at("t").get<double>(),
                        j.at("action").get<int>(), j.at("y_hat").get<double>(),
                        j.at("y_true").get<double>(), j.at("sigma").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return events;
}

CaseStudyResult export_case_study(const std::vector<EvalEvent>& events, int k, std::uint64_t seed,
                                  const std::string& random_routes_path,
                                  const std::string& worst_requests_path) {
  if (events.empty()) throw DataError("case study requires a non-empty event stream");
  if (k < 1) throw ConfigError("case study k must be >= 1");
  CaseStudyResult result;

  std::vector<std::int64_t> route_ids;
  for (const auto& e : events)
    if (route_ids.empty() || route_ids.back() != e.route_id) route_ids.push_back(e.route_id);
  std::sort(route_ids.begin(), route_ids.end());
  route_ids.erase(std::unique(route_ids.begin(), route_ids.end()), route_ids.end());

  auto clamped = static_cast<std::size_t>(k);
  if (clamped > route_ids.size()) {
    clamped = route_ids.size();
    result.truncated = true;
  }
  std::mt19937_64 rng(seed);
  std::shuffle(route_ids.begin(), route_ids.end(), rng);
  route_ids.resize(clamped);
  std::sort(route_ids.begin(), route_ids.end());

  std::ofstream out_a(random_routes_path);
  if (!out_a) throw DataError("cannot open '" + random_routes_path + "' for writing");
  out_a << "route_id,t,actual_s,estimated_s\n";
  char buf[160];
  for (const auto& e : events) {
    if (!std::binary_search(route_ids.begin(), route_ids.end(), e.route_id)) continue;
    std::snprintf(buf, sizeof(buf), "%lld,%.3f,%.6f,%.6f\n", static_cast<long long>(e.route_id),
                  e.t, e.y_true, e.y_hat);
    out_a << buf;
  }
  result.routes_written = route_ids.size();

  // Worst requests by absolute percentage error; near-zero truths are skipped
  // the same way the MAPE guard does.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (events[i].y_true >= 1.0) order.push_back(i);
  auto worst_n = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  if (worst_n < static_cast<std::size_t>(k)) result.truncated = true;
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(worst_n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double ea = std::abs(events[a].y_hat - events[a].y_true) / events[a].y_true;
                      const double eb = std::abs(events[b].y_hat - events[b].y_true) / events[b].y_true;
                      return ea > eb;
                    });
  std::ofstream out_b(worst_requests_path);
  if (!out_b) throw DataError("cannot open '" + worst_requests_path + "' for writing");
  out_b << "route_id,t,actual_s,estimated_s,ape_pct\n";
  for (std::size_t i = 0; i < worst_n; ++i) {
    const auto& e = events[order[i]];
    std::snprintf(buf, sizeof(buf), "%lld,%.3f,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(e.route_id), e.t, e.y_true, e.y_hat,
                  100.0 * std::abs(e.y_hat - e.y_true) / e.y_true);
    out_b << buf;
  }
  result.worst_written = worst_n;
  return result;
}

std::vector<ScalabilityRow> scalability_run(
    const std::vector<TravelRoute>& train_routes, const std::vector<double>& fractions,
    std::uint64_t seed,
    const std::function<double(const std::vector<TravelRoute>&)>& train_and_eval) {
  for (double f : fractions)
    if (f <= 0.0 || f > 1.0) throw ConfigError("scalability fractions must lie in (0, 1]");
  std::vector<std::size_t> order(train_routes.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<ScalabilityRow> rows;
  for (double f : fractions) {
    const auto n = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(f * static_cast<double>(train_routes.size()))));
    std::vector<TravelRoute> subset;
    subset.reserve(n);
    for (std::size_t i = 0; i < n; ++i) subset.push_back(train_routes[order[i]]);
    rows.push_back({f, train_and_eval(subset)});
  }
  return rows;
}

}  // namespace ertte
