#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ertte/agent.hpp"
#include "ertte/predictor.hpp"
#include "ertte/training.hpp"

namespace ertte {

enum class PolicyKind {
  kLearned,          // greedy agent decisions after the forced first request
  kAlwaysRepredict,  // every request invokes the predictor (baseline MUR 100%)
  kLookupAfterFirst, // only the forced first request re-predicts
};

PolicyKind parse_policy(const std::string& name);
std::string to_string(PolicyKind policy);

struct Metrics {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;  // percent
  std::size_t mape_excluded = 0;
};

// RMSE/MAE/MAPE over paired vectors; requests with truth below
// `mape_min_truth` are excluded from MAPE only, with the count reported.
Metrics compute_metrics(const std::vector<double>& truths, const std::vector<double>& predictions,
                        double mape_min_truth = 1.0);

struct RouteMetrics {
  std::int64_t route_id = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double mur = 0.0;  // percent
  std::size_t requests = 0;
  std::size_t repredictions = 0;
  std::size_t mape_excluded = 0;
};

struct EvalEvent {
  std::int64_t route_id = 0;
  double t = 0.0;
  int action = 0;
  double y_hat = 0.0;
  double y_true = 0.0;
  double sigma = 0.0;
};

// Aggregates are the plain means of the per-route values.
struct EvalReport {
  std::vector<RouteMetrics> per_route;
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double mur = 0.0;
  std::size_t total_requests = 0;
  std::size_t total_repredictions = 0;
  std::size_t total_mape_excluded = 0;
  double wall_seconds = 0.0;

  [[nodiscard]] std::string to_json(int indent = 2) const;
  void save_csv(const std::string& path) const;
};

struct SimulationResult {
  EvalReport report;
  std::vector<EvalEvent> events;  // grouped by route, in route order
};

// End-to-end online evaluation: requests at t in {0, interval, ...}, first
// request forced to re-predict (empty memory), later ones decided by the
// policy. Routes are independent; `workers` threads each own a private
// InferenceMemory. Deterministic for fixed inputs.
SimulationResult simulate_online(const std::vector<TravelRoute>& routes, const DqnAgent* agent,
                                 PolicyKind policy, const PredictorInterface& predictor,
                                 double interval_s, const WorldContext& ctx, int workers = 1,
                                 double mape_min_truth = 1.0);

// The predictor evaluated directly at every request, bypassing the memory
// and decision machinery; transparency oracle for the always-re-predict
// policy.
EvalReport predictor_only_eval(const std::vector<TravelRoute>& routes,
                               const PredictorInterface& predictor, double interval_s,
                               const WorldContext& ctx, int workers = 1,
                               double mape_min_truth = 1.0);

struct SweepRow {
  double interval_s = 0.0;
  double mape = 0.0;
  double mur = 0.0;
};

// One simulate_online run per interval; rows sorted by interval.
std::vector<SweepRow> interval_sweep(const std::vector<TravelRoute>& routes, const DqnAgent* agent,
                                     PolicyKind policy, const PredictorInterface& predictor,
                                     std::vector<double> intervals, const WorldContext& ctx,
                                     int workers = 1);

// File A: (actual, estimated) pairs of k seeded-random routes.
// File B: the k worst requests by absolute percentage error.
// k is truncated (with a warning on the returned struct) when too large.
struct CaseStudyResult {
  std::size_t routes_written = 0;
  std::size_t worst_written = 0;
  bool truncated = false;
};
CaseStudyResult export_case_study(const std::vector<EvalEvent>& events, int k, std::uint64_t seed,
                                  const std::string& random_routes_path,
                                  const std::string& worst_requests_path);

// Newline-delimited JSON records {route_id, t, action, y_hat, y_true, sigma}.
void save_events(const std::vector<EvalEvent>& events, const std::string& path);
std::vector<EvalEvent> load_events(const std::string& path);

// Retrains via `train_and_eval` on growing prefixes of a seeded shuffle of
// the training routes; returns (fraction, MAPE) rows.
struct ScalabilityRow {
  double fraction = 0.0;
  double mape = 0.0;
};
std::vector<ScalabilityRow> scalability_run(
    const std::vector<TravelRoute>& train_routes, const std::vector<double>& fractions,
    std::uint64_t seed,
    const std::function<double(const std::vector<TravelRoute>&)>& train_and_eval);

}  // namespace ertte
