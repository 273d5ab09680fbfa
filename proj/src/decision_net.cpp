#include "ertte/decision_net.hpp"

#include <cmath>

#include "ertte/errors.hpp"

namespace ertte::nn {

void ModelConfig::validate() const {
  if (d_attention % heads != 0)
    throw ConfigError("d_attention (" + std::to_string(d_attention) +
                      ") must be divisible by the head count (" + std::to_string(heads) + ")");
  if (temperature <= 0.0) throw ConfigError("temperature must be positive");
  if (segment_vocab <= 0) throw ConfigError("segment_vocab must be set from the road network");
  if (past_slots < 0) throw ConfigError("past_slots must be non-negative");
  if (offline_depth < 1 || online_depth < 1) throw ConfigError("encoder depth must be >= 1");
}

EncoderBlock::EncoderBlock(const ModelConfig& cfg, ParamStore& store, const std::string& prefix)
    : cfg_(&cfg) {
  const long d = cfg.d_attention;
  w_q_ = &store.create(prefix + ".w_q", d, d);
  w_k_ = &store.create(prefix + ".w_k", d, d);
  w_v_ = &store.create(prefix + ".w_v", d, d);
  w_f_ = &store.create(prefix + ".w_f", d, d);
  b_f_ = &store.create(prefix + ".b_f", 1, d);
  ln1_gamma_ = &store.create(prefix + ".ln1_gamma", 1, d);
  ln1_beta_ = &store.create(prefix + ".ln1_beta", 1, d);
  ln2_gamma_ = &store.create(prefix + ".ln2_gamma", 1, d);
  ln2_beta_ = &store.create(prefix + ".ln2_beta", 1, d);
}

NodeRef EncoderBlock::self_attention(Tape& tape, NodeRef h) const {
  const int heads = cfg_->heads;
  const long dk = cfg_->d_attention / heads;
  NodeRef q = tape.matmul(h, tape.param(*w_q_));
  NodeRef k = tape.matmul(h, tape.param(*w_k_));
  NodeRef v = tape.matmul(h, tape.param(*w_v_));
  std::vector<NodeRef> head_outputs;
  head_outputs.reserve(static_cast<std::size_t>(heads));
  for (int head = 0; head < heads; ++head) {
    NodeRef qh = tape.slice_cols(q, head * dk, dk);
    NodeRef kh = tape.slice_cols(k, head * dk, dk);
    NodeRef vh = tape.slice_cols(v, head * dk, dk);
    NodeRef scores = tape.row_softmax(
        tape.scale(tape.matmul(qh, tape.transpose(kh)), 1.0 / std::sqrt(static_cast<double>(dk))));
    head_outputs.push_back(tape.matmul(scores, vh));
  }
  return heads == 1 ? head_outputs.front() : tape.concat_cols(head_outputs);
}

NodeRef EncoderBlock::forward(Tape& tape, NodeRef h) const {
  NodeRef z = self_attention(tape, h);
  NodeRef h_n = tape.layer_norm_rows(tape.add(h, z), cfg_->layer_norm_eps);
  h_n = tape.add_row(tape.mul_row(h_n, tape.param(*ln1_gamma_)), tape.param(*ln1_beta_));
  NodeRef z_f = tape.relu(tape.add_row(tape.matmul(h_n, tape.param(*w_f_)), tape.param(*b_f_)));
  NodeRef out = tape.layer_norm_rows(tape.add(h_n, z_f), cfg_->layer_norm_eps);
  return tape.add_row(tape.mul_row(out, tape.param(*ln2_gamma_)), tape.param(*ln2_beta_));
}

DecisionNet::DecisionNet(const ModelConfig& cfg, ParamStore& store, const std::string& prefix)
    : cfg_(cfg) {
  cfg_.validate();
  const long d = cfg_.d_attention;
  segment_table_ = &store.create(prefix + ".segment_table", cfg_.segment_vocab, cfg_.d_segment);
  timeslot_table_ = &store.create(prefix + ".timeslot_table", cfg_.timeslot_vocab, cfg_.d_timeslot);
  traffic_proj_ = &store.create(prefix + ".traffic_proj", 4, cfg_.d_traffic);
  traffic_bias_ = &store.create(prefix + ".traffic_bias", 1, cfg_.d_traffic);
  weekday_table_ = &store.create(prefix + ".weekday_table", 7, cfg_.d_background);
  holiday_table_ = &store.create(prefix + ".holiday_table", 2, cfg_.d_background);
  rush_table_ = &store.create(prefix + ".rush_table", 2, cfg_.d_background);
  weather_table_ = &store.create(prefix + ".weather_table", 16, cfg_.d_background);
  fc1_w_ = &store.create(prefix + ".fc1_w", cfg_.offline_input_dim(), d);
  fc1_b_ = &store.create(prefix + ".fc1_b", 1, d);
  drive_w_ = &store.create(prefix + ".drive_w", 1, cfg_.d_drive);
  drive_b_ = &store.create(prefix + ".drive_b", 1, cfg_.d_drive);
  history_table_ = &store.create(prefix + ".history_table", 3, cfg_.d_history);
  fc2_w_ = &store.create(prefix + ".fc2_w", cfg_.online_input_dim(), d);
  fc2_b_ = &store.create(prefix + ".fc2_b", 1, d);
  start_token_ = &store.create(prefix + ".start_token", 1, d);
  for (int i = 0; i < cfg_.offline_depth; ++i)
    offline_blocks_.emplace_back(cfg_, store, prefix + ".offline_block" + std::to_string(i));
  for (int i = 0; i < cfg_.online_depth; ++i)
    online_blocks_.emplace_back(cfg_, store, prefix + ".online_block" + std::to_string(i));
  const long proj = 2L * cfg_.d_hidden;
  g_online_w_ = &store.create(prefix + ".g_online_w", d, proj);
  g_online_b_ = &store.create(prefix + ".g_online_b", 1, proj);
  g_offline_w_ = &store.create(prefix + ".g_offline_w", d, proj);
  g_offline_b_ = &store.create(prefix + ".g_offline_b", 1, proj);
  head_w_ = &store.create(prefix + ".head_w", d, 2);
  head_b_ = &store.create(prefix + ".head_b", 1, 2);
}

DecisionNet::Embedded DecisionNet::embed_state(Tape& tape, const AgentState& state) const {
  const OfflineFeatures& off = state.offline;
  if (off.route_length() == 0) throw DataError("state has an empty offline feature sequence");
  const auto n = static_cast<long>(off.route_length());
  const int depth = cfg_.slot_depth();
  if (off.slot_depth() != static_cast<std::size_t>(depth))
    throw DataError("offline features carry slot depth " + std::to_string(off.slot_depth()) +
                    ", model expects " + std::to_string(depth));

  std::vector<int> seg_idx(static_cast<std::size_t>(n));
  Mat attrs(n, 4);
  for (long i = 0; i < n; ++i) {
    const auto& sp = off.spatial[static_cast<std::size_t>(i)];
    seg_idx[static_cast<std::size_t>(i)] = sp.segment;
    attrs(i, 0) = sp.attrs.length_m / 1000.0;
    attrs(i, 1) = sp.attrs.speed_limit_mps / 30.0;
    attrs(i, 2) = static_cast<double>(sp.attrs.lanes) / 4.0;
    attrs(i, 3) = static_cast<double>(sp.attrs.road_class) / 4.0;
  }

  std::vector<NodeRef> parts;
  parts.push_back(tape.rows(*segment_table_, seg_idx));
  parts.push_back(tape.input(std::move(attrs)));
  for (int s = 0; s < depth; ++s) {
    std::vector<int> slot_idx(static_cast<std::size_t>(n));
    Mat stats(n, 4);
    for (long i = 0; i < n; ++i) {
      slot_idx[static_cast<std::size_t>(i)] =
          off.temporal[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      const SlotStats& st = off.traffic[static_cast<std::size_t>(i)][static_cast<std::size_t>(s)];
      stats(i, 0) = st.v_min / 30.0;
      stats(i, 1) = st.v_max / 30.0;
      stats(i, 2) = st.v_med / 30.0;
      stats(i, 3) = st.v_avg / 30.0;
    }
    parts.push_back(tape.rows(*timeslot_table_, slot_idx));
    parts.push_back(tape.add_row(tape.matmul(tape.input(std::move(stats)), tape.param(*traffic_proj_)),
                                 tape.param(*traffic_bias_)));
  }
  auto broadcast_bg = [&](Parameter& table, int idx) {
    std::vector<int> v(static_cast<std::size_t>(n), idx);
    parts.push_back(tape.rows(table, std::move(v)));
  };
  broadcast_bg(*weekday_table_, off.background.weekday);
  broadcast_bg(*holiday_table_, off.background.holiday ? 1 : 0);
  broadcast_bg(*rush_table_, off.background.rush_hour ? 1 : 0);
  broadcast_bg(*weather_table_, off.background.weather);

  NodeRef h_x = tape.relu(
      tape.add_row(tape.matmul(tape.concat_cols(parts), tape.param(*fc1_w_)), tape.param(*fc1_b_)));

  const OnlineFeatures& on = state.online;
  NodeRef h_f;
  if (on.traveled_count() == 0) {
    h_f = tape.param(*start_token_);
  } else {
    const auto m = static_cast<long>(on.traveled_count());
    Mat speeds(m, 1);
    std::vector<int> marks(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i) {
      speeds(i, 0) = on.driving_speed_mps[static_cast<std::size_t>(i)] / 10.0;
      marks[static_cast<std::size_t>(i)] =
          static_cast<int>(on.decision_history[static_cast<std::size_t>(i)]);
    }
    NodeRef h_d = tape.add_row(tape.matmul(tape.input(std::move(speeds)), tape.param(*drive_w_)),
                               tape.param(*drive_b_));
    NodeRef h_h = tape.rows(*history_table_, std::move(marks));
    h_f = tape.add_row(tape.matmul(tape.concat_cols({h_d, h_h}), tape.param(*fc2_w_)),
                       tape.param(*fc2_b_));
  }
  return {h_x, h_f};
}

NodeRef DecisionNet::fuse(Tape& tape, NodeRef online, NodeRef offline) const {
  NodeRef scores = tape.row_softmax(tape.scale(
      tape.matmul(online, tape.transpose(offline)),
      1.0 / std::sqrt(static_cast<double>(cfg_.d_attention))));
  return tape.matmul(scores, offline);
}

NodeRef DecisionNet::project_online(Tape& tape, NodeRef pooled) const {
  return tape.row_normalize_l2(
      tape.add_row(tape.matmul(pooled, tape.param(*g_online_w_)), tape.param(*g_online_b_)));
}

NodeRef DecisionNet::project_offline(Tape& tape, NodeRef pooled) const {
  return tape.row_normalize_l2(
      tape.add_row(tape.matmul(pooled, tape.param(*g_offline_w_)), tape.param(*g_offline_b_)));
}

DecisionNet::Forward DecisionNet::forward(Tape& tape, const AgentState& state) const {
  Embedded embedded = embed_state(tape, state);
  NodeRef offline = embedded.offline;
  for (const auto& block : offline_blocks_) offline = block.forward(tape, offline);
  NodeRef online = embedded.online;
  for (const auto& block : online_blocks_) online = block.forward(tape, online);
  NodeRef fused = fuse(tape, online, offline);
  NodeRef pooled = tape.mean_rows(fused);
  NodeRef q = tape.add_row(tape.matmul(pooled, tape.param(*head_w_)), tape.param(*head_b_));
  return {q, offline, online, fused};
}

Eigen::Vector2d DecisionNet::q_values(const AgentState& state) const {
  Tape tape(false);
  Forward fwd = forward(tape, state);
  const Mat& q = tape.value(fwd.q);
  return {q(0, 0), q(0, 1)};
}

NodeRef info_nce_from_pooled(Tape& tape, NodeRef online_rows, NodeRef offline_rows, double tau) {
  NodeRef similarities = tape.matmul(online_rows, tape.transpose(offline_rows));
  return tape.info_nce(similarities, tau);
}

}  // namespace ertte::nn
