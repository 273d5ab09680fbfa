#include "ertte/replay_buffer.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "ertte/errors.hpp"

namespace ertte {

namespace {

// Minimal binary (de)serialization for buffer dump/restore.
class Writer {
 public:
  template <typename T>
  void raw(const T& v) {
    buf_.append(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u64(std::uint64_t v) { raw(v); }
  void f64(double v) { raw(v); }
  void i32(std::int32_t v) { raw(v); }
  [[nodiscard]] const std::string& str() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size) : data_(data), size_(size) {}
  template <typename T>
  T raw() {
    if (at_ + sizeof(T) > size_) throw DataError("truncated replay buffer record");
    T v;
    std::memcpy(&v, data_ + at_, sizeof(T));
    at_ += sizeof(T);
    return v;
  }
  std::uint64_t u64() { return raw<std::uint64_t>(); }
  double f64() { return raw<double>(); }
  std::int32_t i32() { return raw<std::int32_t>(); }

 private:
  const char* data_;
  std::size_t size_;
  std::size_t at_ = 0;
};

void write_state(Writer& w, const AgentState& s) {
  const auto& off = s.offline;
  w.u64(off.route_length());
  w.i32(off.past_slots);
  w.i32(off.current_slot);
  w.i32(off.background.weekday);
  w.i32(off.background.holiday ? 1 : 0);
  w.i32(off.background.rush_hour ? 1 : 0);
  w.i32(off.background.weather);
  for (std::size_t i = 0; i < off.route_length(); ++i) {
    const auto& sp = off.spatial[i];
    w.i32(sp.segment);
    w.i32(sp.attrs.from_vertex);
    w.i32(sp.attrs.to_vertex);
    w.f64(sp.attrs.length_m);
    w.f64(sp.attrs.speed_limit_mps);
    w.i32(sp.attrs.lanes);
    w.i32(sp.attrs.road_class);
    for (int d : off.temporal[i]) w.i32(d);
    for (const auto& st : off.traffic[i]) {
      w.f64(st.v_min);
      w.f64(st.v_max);
      w.f64(st.v_med);
      w.f64(st.v_avg);
    }
  }
  w.u64(s.online.traveled_count());
  for (double v : s.online.driving_speed_mps) w.f64(v);
  for (auto m : s.online.decision_history) w.i32(static_cast<int>(m));
  w.u64(s.position);
  w.f64(s.sigma_s);
}

AgentState read_state(Reader& r) {
  AgentState s;
  auto& off = s.offline;
  const auto n = static_cast<std::size_t>(r.u64());
  off.past_slots = r.i32();
  off.current_slot = r.i32();
  off.background.weekday = r.i32();
  off.background.holiday = r.i32() != 0;
  off.background.rush_hour = r.i32() != 0;
  off.background.weather = r.i32();
  const auto depth = static_cast<std::size_t>(off.past_slots) + 1;
  off.spatial.resize(n);
  off.temporal.assign(n, std::vector<int>(depth));
  off.traffic.assign(n, std::vector<SlotStats>(depth));
  for (std::size_t i = 0; i < n; ++i) {
    auto& sp = off.spatial[i];
    sp.segment = r.i32();
    sp.attrs.from_vertex = r.i32();
    sp.attrs.to_vertex = r.i32();
    sp.attrs.length_m = r.f64();
    sp.attrs.speed_limit_mps = r.f64();
    sp.attrs.lanes = r.i32();
    sp.attrs.road_class = r.i32();
    for (auto& d : off.temporal[i]) d = r.i32();
    for (auto& st : off.traffic[i]) {
      st.v_min = r.f64();
      st.v_max = r.f64();
      st.v_med = r.f64();
      st.v_avg = r.f64();
    }
  }
  const auto m = static_cast<std::size_t>(r.u64());
  s.online.driving_speed_mps.resize(m);
  s.online.decision_history.resize(m);
  for (auto& v : s.online.driving_speed_mps) v = r.f64();
  for (auto& mark : s.online.decision_history) mark = static_cast<HistoryMark>(r.i32());
  s.position = static_cast<std::size_t>(r.u64());
  s.sigma_s = r.f64();
  return s;
}

}  // namespace

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
  if (capacity_ == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition transition) {
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(transition));
  } else {
    storage_[next_] = std::move(transition);
    next_ = (next_ + 1) % capacity_;
  }
}

ReplayBuffer::Sample ReplayBuffer::sample(long batch_size) {
  if (batch_size <= 0) throw ConfigError("sample batch size must be positive");
  Sample out;
  const auto n = storage_.size();
  if (n <= static_cast<std::size_t>(batch_size)) {
    out.transitions = in_insertion_order();
    out.full_batch = n == static_cast<std::size_t>(batch_size);
    return out;
  }
  // Partial Fisher-Yates over an index array: uniform without replacement.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  out.transitions.reserve(static_cast<std::size_t>(batch_size));
  for (long k = 0; k < batch_size; ++k) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(k), n - 1);
    std::swap(idx[static_cast<std::size_t>(k)], idx[pick(rng_)]);
    out.transitions.push_back(&storage_[idx[static_cast<std::size_t>(k)]]);
  }
  return out;
}

std::vector<const Transition*> ReplayBuffer::in_insertion_order() const {
  std::vector<const Transition*> out;
  out.reserve(storage_.size());
  if (storage_.size() < capacity_) {
    for (const auto& t : storage_) out.push_back(&t);
  } else {
    for (std::size_t i = 0; i < storage_.size(); ++i)
      out.push_back(&storage_[(next_ + i) % capacity_]);
  }
  return out;
}

void ReplayBuffer::dump(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const Transition* t : in_insertion_order()) {
    Writer w;
    write_state(w, t->state);
    w.i32(t->action);
    w.f64(t->reward);
    w.i32(t->next_state ? 1 : 0);
    if (t->next_state) write_state(w, *t->next_state);
    const std::uint64_t len = w.str().size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(w.str().data(), static_cast<std::streamsize>(len));
  }
  if (!out) throw DataError("write failed for '" + path + "'");
}

void ReplayBuffer::restore(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  storage_.clear();
  next_ = 0;
  std::string payload;
  while (true) {
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    if (in.eof()) break;
    if (!in) throw DataError("truncated record length in '" + path + "'");
    payload.resize(len);
    in.read(payload.data(), static_cast<std::streamsize>(len));
    if (!in) throw DataError("truncated record payload in '" + path + "'");
    Reader r(payload.data(), payload.size());
    Transition t;
    t.state = read_state(r);
    t.action = r.i32();
    t.reward = r.f64();
    if (r.i32() != 0) t.next_state = read_state(r);
    push(std::move(t));
  }
}

}  // namespace ertte
