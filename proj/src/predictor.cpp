#include "ertte/predictor.hpp"

#include <cmath>

#include "ertte/errors.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

std::vector<double> avg_predict(const Request& request, const TrafficConditionStore& store,
                                const RoadNetwork& network) {
  const int slot = weekly_slot(request.wallclock_s(), store.slot_minutes());
  std::vector<double> out;
  out.reserve(request.remaining_count());
  for (std::size_t i = request.split_index; i < request.route->size(); ++i) {
    const SegmentId seg = request.route->links()[i].segment;
    out.push_back(network.segment(seg).length_m / store.lookup(seg, slot).v_avg);
  }
  return out;
}

std::vector<double> AvgPredictor::predict(const PredictionInput& input) const {
  const OfflineFeatures& off = *input.offline;
  const std::size_t depth_last = off.slot_depth() - 1;
  std::vector<double> out;
  out.reserve(off.route_length() - input.split_index);
  for (std::size_t i = input.split_index; i < off.route_length(); ++i)
    out.push_back(off.spatial[i].attrs.length_m / off.traffic[i][depth_last].v_avg);
  return out;
}

namespace {

// Summary of observed driving behavior fed to every remaining segment:
// mean realized speed over the store's expected speed, its presence flag,
// and the traveled distance fraction.
struct DriveSummary {
  double ratio_minus_one = 0.0;
  double has_history = 0.0;
  double traveled_fraction = 0.0;
};

DriveSummary summarize_drive(const PredictionInput& input) {
  const OfflineFeatures& off = *input.offline;
  const OnlineFeatures& on = *input.online;
  DriveSummary s;
  const std::size_t depth_last = off.slot_depth() - 1;
  if (on.traveled_count() > 0) {
    double ratio_sum = 0.0;
    for (std::size_t j = 0; j < on.traveled_count(); ++j)
      ratio_sum += on.driving_speed_mps[j] / std::max(off.traffic[j][depth_last].v_avg, 1e-9);
    s.ratio_minus_one = ratio_sum / static_cast<double>(on.traveled_count()) - 1.0;
    s.has_history = 1.0;
  }
  double total = 0.0, traveled = 0.0;
  for (std::size_t i = 0; i < off.route_length(); ++i) {
    total += off.spatial[i].attrs.length_m;
    if (i < input.split_index) traveled += off.spatial[i].attrs.length_m;
  }
  s.traveled_fraction = total > 0.0 ? traveled / total : 0.0;
  return s;
}

}  // namespace

NeuralTtePredictor::NeuralTtePredictor(const Config& config)
    : cfg_(config), optimizer_(config.lr) {
  cfg_.model.validate();
  const auto& m = cfg_.model;
  const long d = m.d_attention;
  segment_table_ = &params_.create("tte.segment_table", m.segment_vocab, m.d_segment);
  timeslot_table_ = &params_.create("tte.timeslot_table", m.timeslot_vocab, m.d_timeslot);
  traffic_proj_ = &params_.create("tte.traffic_proj", 4, m.d_traffic);
  traffic_bias_ = &params_.create("tte.traffic_bias", 1, m.d_traffic);
  weekday_table_ = &params_.create("tte.weekday_table", 7, m.d_background);
  holiday_table_ = &params_.create("tte.holiday_table", 2, m.d_background);
  rush_table_ = &params_.create("tte.rush_table", 2, m.d_background);
  weather_table_ = &params_.create("tte.weather_table", 16, m.d_background);
  fc_w_ = &params_.create("tte.fc_w", m.offline_input_dim() + 3, d);
  fc_b_ = &params_.create("tte.fc_b", 1, d);
  for (int i = 0; i < m.offline_depth; ++i)
    blocks_.emplace_back(cfg_.model, params_, "tte.block" + std::to_string(i));
  head_w_ = &params_.create("tte.head_w", d, 1);
  head_b_ = &params_.create("tte.head_b", 1, 1);
  std::mt19937_64 rng(cfg_.seed);
  params_.init_normal(rng, cfg_.init_std);
}

nn::NodeRef NeuralTtePredictor::forward(nn::Tape& tape, const PredictionInput& input) const {
  const OfflineFeatures& off = *input.offline;
  if (input.split_index >= off.route_length())
    throw DataError("prediction requested with no remaining segments");
  const auto n = static_cast<long>(off.route_length() - input.split_index);
  const int depth = cfg_.model.slot_depth();
  if (off.slot_depth() != static_cast<std::size_t>(depth))
    throw DataError("offline features carry slot depth " + std::to_string(off.slot_depth()) +
                    ", model expects " + std::to_string(depth));
  const DriveSummary drive = summarize_drive(input);

  std::vector<int> seg_idx(static_cast<std::size_t>(n));
  nn::Mat attrs(n, 4);
  nn::Mat drive_cols(n, 3);
  nn::Mat link_scale(n, 1);  // length / v_avg at the request slot
  for (long i = 0; i < n; ++i) {
    const auto& sp = off.spatial[input.split_index + static_cast<std::size_t>(i)];
    seg_idx[static_cast<std::size_t>(i)] = sp.segment;
    attrs(i, 0) = sp.attrs.length_m / 1000.0;
    attrs(i, 1) = sp.attrs.speed_limit_mps / 30.0;
    attrs(i, 2) = static_cast<double>(sp.attrs.lanes) / 4.0;
    attrs(i, 3) = static_cast<double>(sp.attrs.road_class) / 4.0;
    drive_cols(i, 0) = drive.ratio_minus_one;
    drive_cols(i, 1) = drive.has_history;
    drive_cols(i, 2) = drive.traveled_fraction;
    const auto& current = off.traffic[input.split_index + static_cast<std::size_t>(i)]
                                     [static_cast<std::size_t>(depth - 1)];
    link_scale(i, 0) = sp.attrs.length_m / std::max(current.v_avg, 1e-9);
  }

  std::vector<nn::NodeRef> parts;
  parts.push_back(tape.rows(*segment_table_, seg_idx));
  parts.push_back(tape.input(std::move(attrs)));
  for (int s = 0; s < depth; ++s) {
    std::vector<int> slot_idx(static_cast<std::size_t>(n));
    nn::Mat stats(n, 4);
    for (long i = 0; i < n; ++i) {
      const std::size_t pos = input.split_index + static_cast<std::size_t>(i);
      slot_idx[static_cast<std::size_t>(i)] = off.temporal[pos][static_cast<std::size_t>(s)];
      const SlotStats& st = off.traffic[pos][static_cast<std::size_t>(s)];
      stats(i, 0) = st.v_min / 30.0;
      stats(i, 1) = st.v_max / 30.0;
      stats(i, 2) = st.v_med / 30.0;
      stats(i, 3) = st.v_avg / 30.0;
    }
    parts.push_back(tape.rows(*timeslot_table_, slot_idx));
    parts.push_back(tape.add_row(
        tape.matmul(tape.input(std::move(stats)), tape.param(*traffic_proj_)),
        tape.param(*traffic_bias_)));
  }
  auto broadcast_bg = [&](nn::Parameter& table, int idx) {
    std::vector<int> v(static_cast<std::size_t>(n), idx);
    parts.push_back(tape.rows(table, std::move(v)));
  };
  broadcast_bg(*weekday_table_, off.background.weekday);
  broadcast_bg(*holiday_table_, off.background.holiday ? 1 : 0);
  broadcast_bg(*rush_table_, off.background.rush_hour ? 1 : 0);
  broadcast_bg(*weather_table_, off.background.weather);
  parts.push_back(tape.input(std::move(drive_cols)));

  nn::NodeRef h = tape.relu(tape.add_row(
      tape.matmul(tape.concat_cols(parts), tape.param(*fc_w_)), tape.param(*fc_b_)));
  for (const auto& block : blocks_) h = block.forward(tape, h);
  nn::NodeRef z = tape.add_row(tape.matmul(h, tape.param(*head_w_)), tape.param(*head_b_));
  return tape.cmul(tape.exp(z), tape.input(std::move(link_scale)));
}

std::vector<double> NeuralTtePredictor::predict(const PredictionInput& input) const {
  if (!trained_) throw StateError("neural predictor used before training");
  nn::Tape tape(false);
  const nn::Mat& y = tape.value(forward(tape, input));
  std::vector<double> out(static_cast<std::size_t>(y.rows()));
  for (long i = 0; i < y.rows(); ++i) out[static_cast<std::size_t>(i)] = y(i, 0);
  return out;
}

nn::NodeRef NeuralTtePredictor::sample_loss(nn::Tape& tape, const PredictionInput& input,
                                            const std::vector<double>& target) const {
  nn::NodeRef prediction = forward(tape, input);
  const auto n = static_cast<long>(target.size());
  if (tape.value(prediction).rows() != n)
    throw ConsistencyError("target length " + std::to_string(target.size()) +
                           " does not match remaining segment count");
  nn::Mat truth(n, 1);
  for (long i = 0; i < n; ++i) truth(i, 0) = target[static_cast<std::size_t>(i)];
  return tape.mean_all(tape.abs(tape.sub(prediction, tape.input(std::move(truth)))));
}

double NeuralTtePredictor::train_batch(const std::vector<PredictionInput>& inputs,
                                       const std::vector<const std::vector<double>*>& targets) {
  if (inputs.empty() || inputs.size() != targets.size())
    throw ConsistencyError("batch inputs and targets differ in length");
  nn::Tape tape(true);
  std::vector<nn::NodeRef> losses;
  losses.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i)
    losses.push_back(sample_loss(tape, inputs[i], *targets[i]));
  nn::NodeRef loss = losses.size() == 1 ? losses.front() : tape.mean_all(tape.concat_rows(losses));
  tape.backward(loss);
  optimizer_.step(params_);
  return tape.scalar(loss);
}

void NeuralTtePredictor::save(const std::string& path, const std::string& config_hash) const {
  nn::save_checkpoint(params_, path, config_hash);
}

void NeuralTtePredictor::load(const std::string& path) {
  nn::load_checkpoint(params_, path);
  trained_ = true;
}

}  // namespace ertte
