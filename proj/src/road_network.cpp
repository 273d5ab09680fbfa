#include "ertte/road_network.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "ertte/errors.hpp"

namespace ertte {

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void bad_line(const std::string& path, std::size_t line_no, const std::string& what) {
  throw DataError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& path, std::size_t line_no) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) bad_line(path, line_no, "trailing characters in number '" + s + "'");
    return v;
  } catch (const std::exception&) {
    bad_line(path, line_no, "invalid number '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& path, std::size_t line_no) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    bad_line(path, line_no, "invalid integer '" + s + "'");
  return v;
}

}  // namespace

void RoadNetwork::add_vertex(VertexId v) {
  auto it = std::lower_bound(vertex_present_.begin(), vertex_present_.end(), v);
  if (it == vertex_present_.end() || *it != v) vertex_present_.insert(it, v);
}

SegmentId RoadNetwork::add_segment(const SegmentAttrs& attrs) {
  if (attrs.length_m <= 0.0) throw DataError("segment length must be positive");
  if (attrs.speed_limit_mps <= 0.0) throw DataError("segment speed limit must be positive");
  if (attrs.lanes <= 0) throw DataError("segment lane count must be positive");
  const bool from_ok = std::binary_search(vertex_present_.begin(), vertex_present_.end(), attrs.from_vertex);
  const bool to_ok = std::binary_search(vertex_present_.begin(), vertex_present_.end(), attrs.to_vertex);
  if (!from_ok || !to_ok) throw DataError("segment references an unknown vertex");
  segments_.push_back(attrs);
  return static_cast<SegmentId>(segments_.size() - 1);
}

const SegmentAttrs& RoadNetwork::segment(SegmentId id) const {
  if (!has_segment(id)) throw DataError("unknown segment id " + std::to_string(id));
  return segments_[static_cast<std::size_t>(id)];
}

bool RoadNetwork::connected(SegmentId a, SegmentId b) const {
  return segment(a).to_vertex == segment(b).from_vertex;
}

void RoadNetwork::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "segment_id,from_vertex,to_vertex,length_m,speed_limit_mps,lanes,road_class\n";
  char buf[160];
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    std::snprintf(buf, sizeof(buf), "%zu,%d,%d,%.3f,%.3f,%d,%d\n", i, s.from_vertex, s.to_vertex,
                  s.length_m, s.speed_limit_mps, s.lanes, s.road_class);
    out << buf;
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

RoadNetwork RoadNetwork::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  ++line_no;
  if (line != "segment_id,from_vertex,to_vertex,length_m,speed_limit_mps,lanes,road_class")
    bad_line(path, line_no, "unexpected header '" + line + "'");

  struct Row {
    SegmentId id;
    SegmentAttrs attrs;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_fields(line, ',');
    if (f.size() != 7) bad_line(path, line_no, "expected 7 fields, got " + std::to_string(f.size()));
    Row r;
    r.id = static_cast<SegmentId>(parse_long(f[0], path, line_no));
    r.attrs.from_vertex = static_cast<VertexId>(parse_long(f[1], path, line_no));
    r.attrs.to_vertex = static_cast<VertexId>(parse_long(f[2], path, line_no));
    r.attrs.length_m = parse_double(f[3], path, line_no);
    r.attrs.speed_limit_mps = parse_double(f[4], path, line_no);
    r.attrs.lanes = static_cast<int>(parse_long(f[5], path, line_no));
    r.attrs.road_class = static_cast<int>(parse_long(f[6], path, line_no));
    if (r.attrs.length_m <= 0.0) bad_line(path, line_no, "non-positive length");
    if (r.attrs.speed_limit_mps <= 0.0) bad_line(path, line_no, "non-positive speed limit");
    rows.push_back(r);
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.id < b.id; });
  RoadNetwork net;
  for (const auto& r : rows) {
    net.add_vertex(r.attrs.from_vertex);
    net.add_vertex(r.attrs.to_vertex);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].id != static_cast<SegmentId>(i))
      throw DataError(path + ": segment ids are not dense in [0, " + std::to_string(rows.size()) +
                      "); missing id " + std::to_string(i));
    net.add_segment(rows[i].attrs);
  }
  return net;
}

}  // namespace ertte
