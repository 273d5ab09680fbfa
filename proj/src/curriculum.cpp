#include "ertte/curriculum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"

namespace ertte {

std::vector<TrainingSample> enumerate_samples(const std::vector<TravelRoute>& routes,
                                              double interval_s, const RoadNetwork& network) {
  if (interval_s <= 0.0) throw ConfigError("request interval must be positive");
  std::vector<TrainingSample> samples;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    const TravelRoute& route = routes[r];
    const double total = route.total_time_s();
    std::vector<double> cum_length(route.size() + 1, 0.0);
    for (std::size_t i = 0; i < route.size(); ++i)
      cum_length[i + 1] = cum_length[i] + network.segment(route.links()[i].segment).length_m;
    for (std::size_t k = 0; static_cast<double>(k) * interval_s < total; ++k) {
      TrainingSample s;
      s.route_index = r;
      s.request_time_s = static_cast<double>(k) * interval_s;
      s.split_index = split_index_at(route, s.request_time_s);
      s.traveled_fraction = cum_length[s.split_index] / cum_length.back();
      s.route_links = route.size();
      s.target.reserve(route.size() - s.split_index);
      for (std::size_t i = s.split_index; i < route.size(); ++i)
        s.target.push_back(route.links()[i].travel_time_s);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::pair<int, int> MetasetGrid::cell_of(const TrainingSample& sample) const {
  int i = static_cast<int>(
      std::lower_bound(link_boundaries_.begin(), link_boundaries_.end(), sample.route_links) -
      link_boundaries_.begin());
  i = std::min(i, subsets_ - 1);
  int j = static_cast<int>(sample.traveled_fraction * metasets_);
  j = std::clamp(j, 0, metasets_ - 1);
  return {i, j};
}

MetasetGrid partition(const std::vector<TrainingSample>& samples, int n, int m) {
  if (n < 1 || m < 1) throw ConfigError("partition requires N >= 1 and M >= 1");
  if (samples.empty()) throw DataError("partition requires a non-empty sample set");

  MetasetGrid grid;
  grid.sample_count_ = samples.size();

  // Equal-frequency quantile boundaries over the route link counts;
  // collapsing ties can shrink the subset count.
  std::vector<std::size_t> keys;
  keys.reserve(samples.size());
  for (const auto& s : samples) keys.push_back(s.route_links);
  std::sort(keys.begin(), keys.end());
  const std::size_t distinct_links =
      static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
  keys.assign(samples.size(), 0);
  for (std::size_t i = 0; i < samples.size(); ++i) keys[i] = samples[i].route_links;
  std::sort(keys.begin(), keys.end());

  int effective_n = n;
  if (static_cast<std::size_t>(n) > distinct_links) {
    effective_n = static_cast<int>(distinct_links);
    grid.warnings_.push_back("subset count shrunk from " + std::to_string(n) + " to " +
                             std::to_string(effective_n) + " (distinct route lengths)");
  }
  std::vector<std::size_t> boundaries;
  for (int i = 1; i < effective_n; ++i) {
    const std::size_t rank = samples.size() * static_cast<std::size_t>(i) /
                             static_cast<std::size_t>(effective_n);
    boundaries.push_back(keys[rank]);
  }
  boundaries.erase(std::unique(boundaries.begin(), boundaries.end()), boundaries.end());
  grid.link_boundaries_ = boundaries;
  grid.subsets_ = static_cast<int>(boundaries.size()) + 1;
  if (grid.subsets_ < effective_n)
    grid.warnings_.push_back("subset count shrunk to " + std::to_string(grid.subsets_) +
                             " after merging tied quantile boundaries");

  std::set<double> distinct_fractions;
  for (const auto& s : samples) distinct_fractions.insert(s.traveled_fraction);
  int effective_m = m;
  if (distinct_fractions.size() < static_cast<std::size_t>(m)) {
    effective_m = static_cast<int>(distinct_fractions.size());
    grid.warnings_.push_back("metaset count shrunk from " + std::to_string(m) + " to " +
                             std::to_string(effective_m) + " (distinct traveled fractions)");
  }
  grid.metasets_ = effective_m;

  grid.cells_.assign(static_cast<std::size_t>(grid.subsets_),
                     std::vector<std::vector<std::size_t>>(static_cast<std::size_t>(grid.metasets_)));
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [i, j] = grid.cell_of(samples[k]);
    grid.cells_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].push_back(k);
  }
  return grid;
}

void score_difficulty(MetasetGrid& grid, const std::vector<TrainingSample>& samples,
                      const std::function<double(const TrainingSample&)>& expert_estimate) {
  if (samples.size() != grid.sample_count_)
    throw ConsistencyError("sample set does not match the partitioned grid");
  grid.difficulty_.assign(samples.size(), 0.0);
  grid.mae_.assign(samples.size(), 0.0);
  grid.mape_.assign(samples.size(), 0.0);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    double truth = 0.0;
    for (double y : samples[k].target) truth += y;
    const double predicted = expert_estimate(samples[k]);
    const double mae = std::abs(predicted - truth);
    const double mape = truth > 0.0 ? 100.0 * mae / truth : 0.0;
    grid.mae_[k] = mae;
    grid.mape_[k] = mape;
    grid.difficulty_[k] = mae + mape;
  }
  for (auto& row : grid.cells_)
    for (auto& cell : row)
      std::stable_sort(cell.begin(), cell.end(), [&](std::size_t a, std::size_t b) {
        return grid.difficulty_[a] < grid.difficulty_[b];
      });
  grid.scored_ = true;
}

void export_difficulty_csv(const MetasetGrid& grid, const std::vector<TrainingSample>& samples,
                           const std::vector<TravelRoute>& routes, const std::string& path) {
  if (!grid.scored()) throw StateError("difficulty export requires a scored grid");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "route_id,t,subset,metaset,mae,mape,mu\n";
  char buf[160];
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto [i, j] = grid.cell_of(samples[k]);
    std::snprintf(buf, sizeof(buf), "%lld,%.3f,%d,%d,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(routes[samples[k].route_index].id()),
                  samples[k].request_time_s, i, j, grid.mae()[k], grid.mape()[k],
                  grid.difficulty()[k]);
    out << buf;
  }
}

void SchedulerConfig::validate() const {
  if (kappa_s <= 0.0 || kappa_s >= 1.0 || kappa_m <= 0.0 || kappa_m >= 1.0)
    throw ConfigError("start fractions kappa_s/kappa_m must lie in (0, 1)");
  if (circles < 1) throw ConfigError("training circles must be >= 1");
  if (epochs_per_circle < 1) throw ConfigError("epochs per circle must be >= 1");
  if (tolerance < 0.0) throw ConfigError("early-stop tolerance must be non-negative");
}

TrainingScheduler::TrainingScheduler(const MetasetGrid& grid, const SchedulerConfig& config)
    : grid_(&grid), cfg_(config) {
  cfg_.validate();
  if (!grid.scored()) throw StateError("the training scheduler requires a scored grid");
  // Paper indices are 1-based: cell (round(kappa_s * N), round(kappa_m * M)),
  // clamped into the grid.
  const int n = grid.subsets();
  const int m = grid.metasets();
  start_i_ = std::clamp(static_cast<int>(std::lround(cfg_.kappa_s * n)), 1, n) - 1;
  start_j_ = std::clamp(static_cast<int>(std::lround(cfg_.kappa_m * m)), 1, m) - 1;
}

int TrainingScheduler::coverage_epochs() const {
  const int n = grid_->subsets();
  const int m = grid_->metasets();
  const int ks = start_i_ + 1;
  const int km = start_j_ + 1;
  return std::max({n - ks, ks - 1, m - km, km - 1}) + 1;
}

TrainingScheduler::EpochPool TrainingScheduler::pool(int circle, int epoch) const {
  if (circle < 1 || circle > cfg_.circles) throw ConfigError("circle out of range");
  if (epoch < 1) throw ConfigError("epoch must be >= 1");
  const int n = grid_->subsets();
  const int m = grid_->metasets();

  EpochPool out;
  out.circle = circle;
  out.epoch = epoch;
  out.released_fraction = static_cast<double>(circle) / static_cast<double>(cfg_.circles);

  // Cells joined after (epoch - 1) neighborhood expansions from the start.
  const int radius = epoch - 1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const int di = std::abs(i - start_i_);
      const int dj = std::abs(j - start_j_);
      const int distance = cfg_.eight_neighborhood ? std::max(di, dj) : di + dj;
      if (distance <= radius) out.active_cells.emplace_back(i, j);
    }
  }
  out.coverage_complete = static_cast<int>(out.active_cells.size()) == n * m;

  for (const auto& [i, j] : out.active_cells) {
    const auto& cell = grid_->cell(i, j);
    const auto released = static_cast<std::size_t>(
        std::ceil(static_cast<double>(cell.size()) * out.released_fraction - 1e-12));
    for (std::size_t k = 0; k < std::min(released, cell.size()); ++k)
      out.sample_indices.push_back(cell[k]);
  }
  return out;
}

std::string TrainingScheduler::pool_manifest_json(const EpochPool& pool) const {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [i, j] : pool.active_cells) cells.push_back({i, j});
  nlohmann::json out{{"circle", pool.circle},
                     {"epoch", pool.epoch},
                     {"released_fraction", pool.released_fraction},
                     {"active_cells", cells},
                     {"pool_size", pool.sample_indices.size()},
                     {"coverage_complete", pool.coverage_complete}};
  return out.dump();
}

}  // namespace ertte
