#include "ertte/config.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ertte/errors.hpp"
#include "ertte/params.hpp"
#include "ertte/time_slots.hpp"

namespace ertte {

namespace {

using nlohmann::json;

json config_to_json(const Config& c) {
  json j;
  j["seed"] = c.seed;
  j["data"] = {
      {"slot_minutes", c.data.slot_minutes},
      {"past_slots", c.data.past_slots},
      {"split_ratios", {c.data.split_ratios.train, c.data.split_ratios.validation,
                        c.data.split_ratios.test}},
      {"request_interval_s", c.data.request_interval_s},
      {"synth",
       {{"grid_size", c.data.synth.grid_size},
        {"n_routes", c.data.synth.n_routes},
        {"mean_segments", c.data.synth.mean_segments},
        {"segments_stddev", c.data.synth.segments_stddev},
        {"constant_fraction", c.data.synth.constant_fraction},
        {"regime_shift_fraction", c.data.synth.regime_shift_fraction},
        {"span_days", c.data.synth.span_days},
        {"start_epoch_s", c.data.synth.start_epoch_s}}},
  };
  j["model"] = {
      {"d_segment", c.model.d_segment},
      {"d_timeslot", c.model.d_timeslot},
      {"d_traffic", c.model.d_traffic},
      {"d_background", c.model.d_background},
      {"d_drive", c.model.d_drive},
      {"d_history", c.model.d_history},
      {"d_attention", c.model.d_attention},
      {"d_hidden", c.model.d_hidden},
      {"heads", c.model.heads},
      {"offline_depth", c.model.offline_depth},
      {"online_depth", c.model.online_depth},
      {"temperature", c.model.temperature},
      {"lr", c.predictor_train.lr},
      {"batch_size", c.predictor_train.batch_size},
      {"epochs", c.predictor_train.epochs},
      {"early_stop_tolerance", c.predictor_train.early_stop_tolerance},
      {"init_std", c.predictor_train.init_std},
  };
  j["reward"] = {
      {"omega_p", c.reward.omega_p},
      {"alpha", c.reward.alpha},
      {"beta", c.reward.beta},
      {"performance_mode", to_string(c.reward.performance_mode)},
  };
  j["agent"] = {
      {"gamma", c.agent.gamma},
      {"lr", c.agent.lr},
      {"batch_size", c.agent.batch_size},
      {"epochs", c.agent.epochs},
      {"buffer_capacity", c.agent.buffer_capacity},
      {"update_step", c.agent.update_step},
      {"train_step", c.agent.train_step},
      {"lambda", c.agent.lambda},
      {"huber_delta", c.agent.huber_delta},
      {"epsilon_start", c.agent.epsilon_start},
      {"epsilon_end", c.agent.epsilon_end},
      {"epsilon_decay_steps", c.agent.epsilon_decay_steps},
      {"double_dqn", c.agent.double_dqn},
      {"sync_per_epoch", c.agent.sync_per_epoch},
      {"init_std", c.agent.init_std},
  };
  j["curriculum"] = {
      {"enabled", c.curriculum.enabled},
      {"subsets", c.curriculum.subsets},
      {"metasets", c.curriculum.metasets},
      {"kappa_s", c.curriculum.scheduler.kappa_s},
      {"kappa_m", c.curriculum.scheduler.kappa_m},
      {"circles", c.curriculum.scheduler.circles},
      {"epochs_per_circle", c.curriculum.scheduler.epochs_per_circle},
      {"tolerance", c.curriculum.scheduler.tolerance},
      {"eight_neighborhood", c.curriculum.scheduler.eight_neighborhood},
  };
  j["eval"] = {
      {"interval_s", c.eval.interval_s},
      {"sweep_intervals", c.eval.sweep_intervals},
      {"case_study_k", c.eval.case_study_k},
      {"scalability_fractions", c.eval.scalability_fractions},
      {"mape_min_truth_s", c.eval.mape_min_truth_s},
      {"workers", c.eval.workers},
  };
  return j;
}

Config config_from_json(const json& j);

// Rejects keys that do not exist in the default layout, naming the field.
void check_known_keys(const json& defaults, const json& given, const std::string& prefix) {
  if (!given.is_object()) return;
  for (const auto& [key, value] : given.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw ConfigError("unknown config field '" + path + "'");
    if (defaults[key].is_object()) check_known_keys(defaults[key], value, path);
  }
}

template <typename T>
T field(const json& j, const std::string& section, const std::string& key, const T& fallback) {
  if (!j.contains(section) || !j[section].contains(key)) return fallback;
  try {
    return j[section][key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field '" + section + "." + key + "' has the wrong type");
  }
}

Config config_from_json(const json& j) {
  Config c;
  check_known_keys(config_to_json(c), j, "");
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();

  c.data.slot_minutes = field(j, "data", "slot_minutes", c.data.slot_minutes);
  c.data.past_slots = field(j, "data", "past_slots", c.data.past_slots);
  if (j.contains("data") && j["data"].contains("split_ratios")) {
    const auto r = j["data"]["split_ratios"].get<std::vector<double>>();
    if (r.size() != 3) throw ConfigError("data.split_ratios must have 3 entries");
    c.data.split_ratios = {r[0], r[1], r[2]};
  }
  c.data.request_interval_s = field(j, "data", "request_interval_s", c.data.request_interval_s);
  if (j.contains("data") && j["data"].contains("synth")) {
    const json& s = j["data"]["synth"];
    auto& sy = c.data.synth;
    sy.grid_size = s.value("grid_size", sy.grid_size);
    sy.n_routes = s.value("n_routes", sy.n_routes);
    sy.mean_segments = s.value("mean_segments", sy.mean_segments);
    sy.segments_stddev = s.value("segments_stddev", sy.segments_stddev);
    sy.constant_fraction = s.value("constant_fraction", sy.constant_fraction);
    sy.regime_shift_fraction = s.value("regime_shift_fraction", sy.regime_shift_fraction);
    sy.span_days = s.value("span_days", sy.span_days);
    sy.start_epoch_s = s.value("start_epoch_s", sy.start_epoch_s);
  }

  c.model.d_segment = field(j, "model", "d_segment", c.model.d_segment);
  c.model.d_timeslot = field(j, "model", "d_timeslot", c.model.d_timeslot);
  c.model.d_traffic = field(j, "model", "d_traffic", c.model.d_traffic);
  c.model.d_background = field(j, "model", "d_background", c.model.d_background);
  c.model.d_drive = field(j, "model", "d_drive", c.model.d_drive);
  c.model.d_history = field(j, "model", "d_history", c.model.d_history);
  c.model.d_attention = field(j, "model", "d_attention", c.model.d_attention);
  c.model.d_hidden = field(j, "model", "d_hidden", c.model.d_hidden);
  c.model.heads = field(j, "model", "heads", c.model.heads);
  c.model.offline_depth = field(j, "model", "offline_depth", c.model.offline_depth);
  c.model.online_depth = field(j, "model", "online_depth", c.model.online_depth);
  c.model.temperature = field(j, "model", "temperature", c.model.temperature);
  c.predictor_train.lr = field(j, "model", "lr", c.predictor_train.lr);
  c.predictor_train.batch_size = field(j, "model", "batch_size", c.predictor_train.batch_size);
  c.predictor_train.epochs = field(j, "model", "epochs", c.predictor_train.epochs);
  c.predictor_train.early_stop_tolerance =
      field(j, "model", "early_stop_tolerance", c.predictor_train.early_stop_tolerance);
  c.predictor_train.init_std = field(j, "model", "init_std", c.predictor_train.init_std);

  c.reward.omega_p = field(j, "reward", "omega_p", c.reward.omega_p);
  c.reward.alpha = field(j, "reward", "alpha", c.reward.alpha);
  c.reward.beta = field(j, "reward", "beta", c.reward.beta);
  if (j.contains("reward") && j["reward"].contains("performance_mode"))
    c.reward.performance_mode =
        parse_performance_mode(j["reward"]["performance_mode"].get<std::string>());

  c.agent.gamma = field(j, "agent", "gamma", c.agent.gamma);
  c.agent.lr = field(j, "agent", "lr", c.agent.lr);
  c.agent.batch_size = field(j, "agent", "batch_size", c.agent.batch_size);
  c.agent.epochs = field(j, "agent", "epochs", c.agent.epochs);
  c.agent.buffer_capacity = field(j, "agent", "buffer_capacity", c.agent.buffer_capacity);
  c.agent.update_step = field(j, "agent", "update_step", c.agent.update_step);
  c.agent.train_step = field(j, "agent", "train_step", c.agent.train_step);
  c.agent.lambda = field(j, "agent", "lambda", c.agent.lambda);
  c.agent.huber_delta = field(j, "agent", "huber_delta", c.agent.huber_delta);
  c.agent.epsilon_start = field(j, "agent", "epsilon_start", c.agent.epsilon_start);
  c.agent.epsilon_end = field(j, "agent", "epsilon_end", c.agent.epsilon_end);
  c.agent.epsilon_decay_steps =
      field(j, "agent", "epsilon_decay_steps", c.agent.epsilon_decay_steps);
  c.agent.double_dqn = field(j, "agent", "double_dqn", c.agent.double_dqn);
  c.agent.sync_per_epoch = field(j, "agent", "sync_per_epoch", c.agent.sync_per_epoch);
  c.agent.init_std = field(j, "agent", "init_std", c.agent.init_std);

  c.curriculum.enabled = field(j, "curriculum", "enabled", c.curriculum.enabled);
  c.curriculum.subsets = field(j, "curriculum", "subsets", c.curriculum.subsets);
  c.curriculum.metasets = field(j, "curriculum", "metasets", c.curriculum.metasets);
  c.curriculum.scheduler.kappa_s =
      field(j, "curriculum", "kappa_s", c.curriculum.scheduler.kappa_s);
  c.curriculum.scheduler.kappa_m =
      field(j, "curriculum", "kappa_m", c.curriculum.scheduler.kappa_m);
  c.curriculum.scheduler.circles =
      field(j, "curriculum", "circles", c.curriculum.scheduler.circles);
  c.curriculum.scheduler.epochs_per_circle =
      field(j, "curriculum", "epochs_per_circle", c.curriculum.scheduler.epochs_per_circle);
  c.curriculum.scheduler.tolerance =
      field(j, "curriculum", "tolerance", c.curriculum.scheduler.tolerance);
  c.curriculum.scheduler.eight_neighborhood =
      field(j, "curriculum", "eight_neighborhood", c.curriculum.scheduler.eight_neighborhood);

  c.eval.interval_s = field(j, "eval", "interval_s", c.eval.interval_s);
  c.eval.sweep_intervals = field(j, "eval", "sweep_intervals", c.eval.sweep_intervals);
  c.eval.case_study_k = field(j, "eval", "case_study_k", c.eval.case_study_k);
  c.eval.scalability_fractions =
      field(j, "eval", "scalability_fractions", c.eval.scalability_fractions);
  c.eval.mape_min_truth_s = field(j, "eval", "mape_min_truth_s", c.eval.mape_min_truth_s);
  c.eval.workers = field(j, "eval", "workers", c.eval.workers);
  return c;
}

}  // namespace

std::string Config::to_json(int indent) const { return config_to_json(*this).dump(indent); }

std::string Config::hash() const { return nn::content_hash(to_json(-1)); }

Config Config::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
  return config_from_json(j);
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json j = config_to_json(*this);
  std::string pointer = "/";
  for (char ch : path) pointer += ch == '.' ? '/' : ch;
  const json::json_pointer jp(pointer);
  if (!j.contains(jp)) throw ConfigError("unknown config field '" + path + "'");

  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::exception&) {
    parsed = value;  // plain string
  }
  if (j.at(jp).is_string() && !parsed.is_string()) parsed = value;
  if (j.at(jp).type() != parsed.type() && !(j.at(jp).is_number() && parsed.is_number()))
    throw ConfigError("config field '" + path + "' has the wrong type");
  j[jp] = parsed;
  *this = config_from_json(j);
}

void Config::validate() const {
  if (data.slot_minutes <= 0 || 60 % data.slot_minutes != 0)
    throw ConfigError("data.slot_minutes must divide 60");
  if (data.past_slots < 0) throw ConfigError("data.past_slots must be non-negative");
  if (std::abs(data.split_ratios.train + data.split_ratios.validation + data.split_ratios.test -
               1.0) > 1e-9)
    throw ConfigError("data.split_ratios must sum to 1");
  if (data.request_interval_s <= 0.0) throw ConfigError("data.request_interval_s must be positive");
  reward.validate();
  agent.validate();
  curriculum.scheduler.validate();
  if (curriculum.subsets < 1 || curriculum.metasets < 1)
    throw ConfigError("curriculum.subsets and curriculum.metasets must be >= 1");
  if (eval.interval_s <= 0.0) throw ConfigError("eval.interval_s must be positive");
  if (eval.workers < 1) throw ConfigError("eval.workers must be >= 1");
}

}  // namespace ertte
