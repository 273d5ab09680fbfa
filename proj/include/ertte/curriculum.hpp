#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ertte/features.hpp"
#include "ertte/predictor.hpp"
#include "ertte/route.hpp"

namespace ertte {

// One en-route request turned into a supervised example.
struct TrainingSample {
  std::size_t route_index = 0;
  double request_time_s = 0.0;
  std::size_t split_index = 0;
  double traveled_fraction = 0.0;  // distance ratio in [0, 1)
  std::size_t route_links = 0;     // subset key
  std::vector<double> target;      // remaining per-segment times
};

// Requests at t in {0, dt, 2dt, ...} strictly before the total travel time;
// ceil(total/dt) samples per route. The network supplies segment lengths for
// the traveled-fraction key.
std::vector<TrainingSample> enumerate_samples(const std::vector<TravelRoute>& routes,
                                              double interval_s, const RoadNetwork& network);

// N x M disjoint partition: equal-frequency quantiles of route link count
// crossed with equal-width traveled-fraction bins.
class MetasetGrid {
 public:
  [[nodiscard]] int subsets() const { return subsets_; }
  [[nodiscard]] int metasets() const { return metasets_; }
  [[nodiscard]] const std::vector<std::size_t>& cell(int i, int j) const {
    return cells_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  [[nodiscard]] std::size_t sample_count() const { return sample_count_; }
  [[nodiscard]] bool scored() const { return scored_; }
  [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }

  // Per-sample scores, indexed like the sample vector given to partition().
  [[nodiscard]] const std::vector<double>& difficulty() const { return difficulty_; }
  [[nodiscard]] const std::vector<double>& mae() const { return mae_; }
  [[nodiscard]] const std::vector<double>& mape() const { return mape_; }

  [[nodiscard]] std::pair<int, int> cell_of(const TrainingSample& sample) const;

  friend MetasetGrid partition(const std::vector<TrainingSample>& samples, int n, int m);
  friend void score_difficulty(MetasetGrid& grid, const std::vector<TrainingSample>& samples,
                               const std::function<double(const TrainingSample&)>& expert_estimate);

 private:
  int subsets_ = 1;
  int metasets_ = 1;
  std::vector<std::size_t> link_boundaries_;  // upper-inclusive quantile bounds
  std::vector<double> fraction_width_ = {1.0};
  std::size_t sample_count_ = 0;
  std::vector<std::vector<std::vector<std::size_t>>> cells_;
  bool scored_ = false;
  std::vector<double> difficulty_, mae_, mape_;
  std::vector<std::string> warnings_;
};

// Throws ConfigError for non-positive N/M; shrinks (with a recorded warning)
// when N or M exceeds the distinct strata.
MetasetGrid partition(const std::vector<TrainingSample>& samples, int n, int m);

// mu = MAE + MAPE of the expert on the scalar remaining time, MAE in seconds
// and MAPE in percentage points; sorts every cell ascending by mu.
// `expert_estimate` returns the predicted remaining total for a sample.
void score_difficulty(MetasetGrid& grid, const std::vector<TrainingSample>& samples,
                      const std::function<double(const TrainingSample&)>& expert_estimate);

// CSV `route_id,t,subset,metaset,mae,mape,mu`.
void export_difficulty_csv(const MetasetGrid& grid, const std::vector<TrainingSample>& samples,
                           const std::vector<TravelRoute>& routes, const std::string& path);

struct SchedulerConfig {
  double kappa_s = 0.5;  // start subset, as a fraction of N
  double kappa_m = 0.4;  // start metaset, as a fraction of M
  int circles = 3;       // cr
  int epochs_per_circle = 20;  // ep
  double tolerance = 1e-3;     // early-stop tolerance on validation loss
  bool eight_neighborhood = true;  // false: 4-neighborhood (no endorsement)

  void validate() const;
};

// Dual-loop training scheduler. The outer circle releases harder tranches of
// every cell; the inner epochs grow the active cell set from the start cell
// through its neighborhood until the grid is covered.
class TrainingScheduler {
 public:
  TrainingScheduler(const MetasetGrid& grid, const SchedulerConfig& config);

  struct EpochPool {
    int circle = 1;
    int epoch = 1;
    std::vector<std::size_t> sample_indices;
    std::vector<std::pair<int, int>> active_cells;
    double released_fraction = 0.0;
    bool coverage_complete = false;
  };

  // Pool for (circle, epoch), both 1-based. Pure: pools are a function of
  // the grid, the config, and the two indices.
  [[nodiscard]] EpochPool pool(int circle, int epoch) const;

  // Epochs after which every cell is active: the Alg. 2 guard
  // max(N - ks, ks - 1, M - km, km - 1) + 1.
  [[nodiscard]] int coverage_epochs() const;
  [[nodiscard]] std::pair<int, int> start_cell() const { return {start_i_, start_j_}; }

  [[nodiscard]] std::string pool_manifest_json(const EpochPool& pool) const;

 private:
  const MetasetGrid* grid_;
  SchedulerConfig cfg_;
  int start_i_ = 0;  // 0-based
  int start_j_ = 0;
};

}  // namespace ertte
