#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace ertte {

// Per-segment predicted times stored at the last re-prediction of a route.
// `predicted[k]` covers route position stored_split + k.
struct PredictionRecord {
  std::int64_t route_id = 0;
  std::vector<double> predicted;
  double stored_at_s = 0.0;     // request elapsed time at storage
  std::size_t stored_split = 0;  // i_t at storage
};

// Most-recent prediction per active route. Single-writer per simulation.
class InferenceMemory {
 public:
  // Replaces any previous record for the route. `predictions` must cover
  // exactly the remaining positions [split_index, route_length).
  // Throws ConsistencyError on a length mismatch.
  void store(std::int64_t route_id, std::vector<double> predictions, double request_elapsed_s,
             std::size_t split_index, std::size_t route_length);

  // Sum of the stored per-segment times still untraveled at `split_index`.
  // Returns nullopt on a memory miss (no record for the route); the caller
  // must force a re-prediction. Throws ConsistencyError when `split_index`
  // precedes the stored split.
  [[nodiscard]] std::optional<double> lookup(std::int64_t route_id, std::size_t split_index) const;

  [[nodiscard]] const PredictionRecord* record(std::int64_t route_id) const;
  [[nodiscard]] std::size_t size() const { return records_.size(); }

  // Trip finished: the record is no longer needed.
  void evict(std::int64_t route_id) { records_.erase(route_id); }
  void clear() { records_.clear(); }

  // Debug dump of all records as JSON.
  [[nodiscard]] std::string dump_json() const;

 private:
  std::unordered_map<std::int64_t, PredictionRecord> records_;
};

}  // namespace ertte
