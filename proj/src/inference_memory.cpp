#include "ertte/inference_memory.hpp"

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"

namespace ertte {

void InferenceMemory::store(std::int64_t route_id, std::vector<double> predictions,
                            double request_elapsed_s, std::size_t split_index,
                            std::size_t route_length) {
  if (split_index + predictions.size() != route_length)
    throw ConsistencyError("prediction count " + std::to_string(predictions.size()) +
                           " does not cover positions [" + std::to_string(split_index) + ", " +
                           std::to_string(route_length) + ") of route " +
                           std::to_string(route_id));
  PredictionRecord record;
  record.route_id = route_id;
  record.predicted = std::move(predictions);
  record.stored_at_s = request_elapsed_s;
  record.stored_split = split_index;
  records_[route_id] = std::move(record);
}

std::optional<double> InferenceMemory::lookup(std::int64_t route_id,
                                              std::size_t split_index) const {
  auto it = records_.find(route_id);
  if (it == records_.end()) return std::nullopt;
  const PredictionRecord& record = it->second;
  if (split_index < record.stored_split)
    throw ConsistencyError("lookup at position " + std::to_string(split_index) +
                           " precedes stored split " + std::to_string(record.stored_split) +
                           " for route " + std::to_string(route_id));
  double sum = 0.0;
  for (std::size_t k = split_index - record.stored_split; k < record.predicted.size(); ++k)
    sum += record.predicted[k];
  return sum;
}

const PredictionRecord* InferenceMemory::record(std::int64_t route_id) const {
  auto it = records_.find(route_id);
  return it == records_.end() ? nullptr : &it->second;
}

std::string InferenceMemory::dump_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [id, record] : records_) {
    out.push_back({{"route_id", id},
                   {"stored_at_s", record.stored_at_s},
                   {"stored_split", record.stored_split},
                   {"predicted", record.predicted}});
  }
  return out.dump();
}

}  // namespace ertte
