#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ertte {

using VertexId = std::int32_t;
using SegmentId = std::int32_t;

struct SegmentAttrs {
  VertexId from_vertex = 0;
  VertexId to_vertex = 0;
  double length_m = 0.0;
  double speed_limit_mps = 0.0;
  int lanes = 1;
  int road_class = 0;
};

// Directed road graph. Segment ids are dense integers in [0, segment_count).
class RoadNetwork {
 public:
  RoadNetwork() = default;

  // Throws DataError if a segment references a missing vertex or attrs are
  // non-positive.
  SegmentId add_segment(const SegmentAttrs& attrs);
  void add_vertex(VertexId v);

  [[nodiscard]] std::size_t vertex_count() const { return vertex_present_.size(); }
  [[nodiscard]] std::size_t segment_count() const { return segments_.size(); }
  [[nodiscard]] bool has_segment(SegmentId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < segments_.size();
  }
  [[nodiscard]] const SegmentAttrs& segment(SegmentId id) const;
  [[nodiscard]] const std::vector<SegmentAttrs>& segments() const { return segments_; }

  [[nodiscard]] bool connected(SegmentId a, SegmentId b) const;

  // CSV with header `segment_id,from_vertex,to_vertex,length_m,speed_limit_mps,lanes,road_class`.
  // Readers reject malformed lines with line-numbered DataError messages.
  void save_csv(const std::string& path) const;
  static RoadNetwork load_csv(const std::string& path);

 private:
  std::vector<SegmentAttrs> segments_;
  std::vector<VertexId> vertex_present_;  // sorted unique vertex ids
};

}  // namespace ertte
