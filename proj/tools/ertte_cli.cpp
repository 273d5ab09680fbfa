#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ertte/config.hpp"
#include "ertte/errors.hpp"
#include "ertte/evaluation.hpp"
#include "ertte/time_slots.hpp"
#include "ertte/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "Override a config field, section.key=value")
      ->take_all();
  cmd->add_option("--seed", args.seed, "Override the run seed");
  cmd->add_option("--out", args.out_dir, "Output directory (created if missing)");
}

ertte::Config resolve_config(const CommonArgs& args) {
  ertte::Config cfg =
      args.config_path.empty() ? ertte::Config{} : ertte::Config::from_file(args.config_path);
  for (const auto& o : args.overrides) cfg.apply_override(o);
  if (args.seed) cfg.seed = *args.seed;
  cfg.validate();
  return cfg;
}

fs::path out_root(const CommonArgs& args) {
  fs::path root = args.out_dir;
  if (const char* env = std::getenv("ERTTE_RUN_ROOT"); env != nullptr && args.out_dir == ".")
    root = env;
  fs::create_directories(root);
  return root;
}

void write_manifest(const fs::path& dir, const std::string& subcommand, const ertte::Config& cfg,
                    const CommonArgs& args, const json& inputs, const json& outputs) {
  json manifest{{"subcommand", subcommand},
                {"config_path", args.config_path},
                {"overrides", args.overrides},
                {"seed", cfg.seed},
                {"config_hash", cfg.hash()},
                {"inputs", inputs},
                {"outputs", outputs},
                {"config", json::parse(cfg.to_json())}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ertte::DataError("cannot write manifest in '" + dir.string() + "'");
  out << manifest.dump(2) << '\n';
}

struct World {
  ertte::RoadNetwork network;
  std::vector<ertte::TravelRoute> routes;
  ertte::DatasetSplit split;
  ertte::TrafficConditionStore store;
  ertte::WorldContext ctx;
};

World load_world(const ertte::Config& cfg, const std::string& network_path,
                 const std::string& routes_path, const std::string& traffic_path) {
  World w;
  w.network = ertte::RoadNetwork::load_csv(network_path);
  w.routes = ertte::load_routes(routes_path);
  w.split = ertte::chronological_split(w.routes, cfg.data.split_ratios);
  if (traffic_path.empty())
    w.store = ertte::build_traffic_store(w.split.train, cfg.data.slot_minutes, w.network);
  else
    w.store = ertte::TrafficConditionStore::load_csv(traffic_path);
  w.ctx = {&w.network, &w.store, cfg.data.past_slots};
  return w;
}

ertte::nn::ModelConfig resolve_model(const ertte::Config& cfg, const ertte::RoadNetwork& network) {
  ertte::nn::ModelConfig m = cfg.model;
  m.segment_vocab = static_cast<int>(network.segment_count());
  m.timeslot_vocab = ertte::slots_per_week(cfg.data.slot_minutes);
  m.past_slots = cfg.data.past_slots;
  return m;
}

ertte::NeuralTtePredictor::Config predictor_config(const ertte::Config& cfg,
                                                   const ertte::RoadNetwork& network,
                                                   std::uint64_t seed) {
  ertte::NeuralTtePredictor::Config pc;
  pc.model = resolve_model(cfg, network);
  pc.lr = cfg.predictor_train.lr;
  pc.batch_size = cfg.predictor_train.batch_size;
  pc.epochs = cfg.predictor_train.epochs;
  pc.init_std = cfg.predictor_train.init_std;
  pc.seed = seed;
  return pc;
}

constexpr std::uint64_t kExpertSeedSalt = 0x5851f42d4c957f2dull;
constexpr std::uint64_t kPredictorSeedSalt = 0x14057b7ef767814full;
constexpr std::uint64_t kAgentSeedSalt = 0x9e3779b97f4a7c15ull;

int run_synth_gen(const CommonArgs& args) {
  ertte::Config cfg = resolve_config(args);
  ertte::SyntheticConfig synth = cfg.data.synth;
  synth.seed = cfg.seed;
  const ertte::SyntheticWorld world = ertte::generate_synthetic_world(synth);
  const fs::path dir = out_root(args);
  world.network.save_csv((dir / "network.csv").string());
  ertte::save_routes(world.routes, (dir / "routes.txt").string());
  write_manifest(dir, "synth-gen", cfg, args, json::object(),
                 json{{"network", "network.csv"}, {"routes", "routes.txt"}});
  std::cout << "generated " << world.network.segment_count() << " segments, "
            << world.routes.size() << " routes\n";
  return 0;
}

int run_build_traffic(const CommonArgs& args, const std::string& network_path,
                      const std::string& routes_path) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, "");
  const fs::path dir = out_root(args);
  w.store.save_csv((dir / "traffic.csv").string());
  write_manifest(dir, "build-traffic", cfg, args,
                 json{{"network", network_path}, {"routes", routes_path}},
                 json{{"traffic", "traffic.csv"}});
  std::cout << "traffic store: " << w.store.observed_cells() << " observed cells, fallback "
            << w.store.fallback().v_avg << " m/s\n";
  return 0;
}

int run_train_expert(const CommonArgs& args, const std::string& network_path,
                     const std::string& routes_path, const std::string& traffic_path) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  const auto samples =
      ertte::enumerate_samples(w.split.train, cfg.data.request_interval_s, w.network);
  const auto val_samples =
      ertte::enumerate_samples(w.split.validation, cfg.data.request_interval_s, w.network);
  auto pc = predictor_config(cfg, w.network, cfg.seed ^ kExpertSeedSalt);
  ertte::NeuralTtePredictor expert =
      ertte::train_expert(samples, w.split.train, val_samples, w.split.validation, w.ctx, pc,
                          cfg.predictor_train, &std::cout);
  const fs::path dir = out_root(args);
  expert.save((dir / "expert.ckpt").string(), cfg.hash());
  write_manifest(dir, "train-expert", cfg, args,
                 json{{"network", network_path}, {"routes", routes_path}},
                 json{{"expert", "expert.ckpt"}});
  return 0;
}

int run_score_difficulty(const CommonArgs& args, const std::string& network_path,
                         const std::string& routes_path, const std::string& traffic_path,
                         const std::string& expert_path) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  const auto samples =
      ertte::enumerate_samples(w.split.train, cfg.data.request_interval_s, w.network);
  ertte::NeuralTtePredictor expert(predictor_config(cfg, w.network, cfg.seed ^ kExpertSeedSalt));
  expert.load(expert_path);
  ertte::MetasetGrid grid =
      ertte::partition(samples, cfg.curriculum.subsets, cfg.curriculum.metasets);
  for (const auto& warning : grid.warnings()) std::cerr << "warning: " << warning << "\n";
  ertte::score_difficulty(grid, samples, [&](const ertte::TrainingSample& s) {
    const ertte::Request request{&w.split.train[s.route_index], s.request_time_s, s.split_index};
    const auto features = ertte::materialize_features(request, w.ctx);
    return ertte::predict_remaining_total(expert, features, s.split_index);
  });
  const fs::path dir = out_root(args);
  ertte::export_difficulty_csv(grid, samples, w.split.train, (dir / "difficulty.csv").string());
  write_manifest(dir, "score-difficulty", cfg, args,
                 json{{"network", network_path}, {"routes", routes_path}, {"expert", expert_path}},
                 json{{"difficulty", "difficulty.csv"}});
  return 0;
}

int run_train_predictor(const CommonArgs& args, const std::string& network_path,
                        const std::string& routes_path, const std::string& traffic_path,
                        const std::string& expert_path, const std::string& curriculum_flag) {
  ertte::Config cfg = resolve_config(args);
  if (curriculum_flag == "on")
    cfg.curriculum.enabled = true;
  else if (curriculum_flag == "off")
    cfg.curriculum.enabled = false;
  else if (!curriculum_flag.empty())
    throw ertte::ConfigError("--curriculum must be 'on' or 'off'");

  World w = load_world(cfg, network_path, routes_path, traffic_path);
  const auto samples =
      ertte::enumerate_samples(w.split.train, cfg.data.request_interval_s, w.network);
  const auto val_samples =
      ertte::enumerate_samples(w.split.validation, cfg.data.request_interval_s, w.network);
  ertte::NeuralTtePredictor predictor(
      predictor_config(cfg, w.network, cfg.seed ^ kPredictorSeedSalt));
  const fs::path dir = out_root(args);

  ertte::PredictorTrainResult result;
  if (cfg.curriculum.enabled) {
    if (expert_path.empty())
      throw ertte::ConfigError("curriculum training requires --expert <checkpoint>");
    ertte::NeuralTtePredictor expert(predictor_config(cfg, w.network, cfg.seed ^ kExpertSeedSalt));
    expert.load(expert_path);
    ertte::MetasetGrid grid =
        ertte::partition(samples, cfg.curriculum.subsets, cfg.curriculum.metasets);
    for (const auto& warning : grid.warnings()) std::cerr << "warning: " << warning << "\n";
    ertte::score_difficulty(grid, samples, [&](const ertte::TrainingSample& s) {
      const ertte::Request request{&w.split.train[s.route_index], s.request_time_s, s.split_index};
      const auto features = ertte::materialize_features(request, w.ctx);
      return ertte::predict_remaining_total(expert, features, s.split_index);
    });
    std::ofstream manifest_out(dir / "pool_manifest.jsonl");
    result = ertte::train_predictor_curriculum(predictor, samples, w.split.train, val_samples,
                                               w.split.validation, grid, cfg.curriculum.scheduler,
                                               w.ctx, cfg.predictor_train,
                                               cfg.seed ^ kPredictorSeedSalt, &std::cout,
                                               &manifest_out);
  } else {
    result = ertte::train_predictor_uniform(predictor, samples, w.split.train, val_samples,
                                            w.split.validation, w.ctx, cfg.predictor_train,
                                            cfg.seed ^ kPredictorSeedSalt, &std::cout);
  }

  predictor.save((dir / "predictor.ckpt").string(), cfg.hash());
  std::ofstream metrics(dir / "train_metrics.csv");
  metrics << "epoch,train_mae_s,val_mape_pct\n";
  for (std::size_t i = 0; i < result.epoch_train_loss.size(); ++i)
    metrics << i + 1 << ',' << result.epoch_train_loss[i] << ',' << result.epoch_val_mape[i]
            << '\n';
  write_manifest(dir, "train-predictor", cfg, args,
                 json{{"network", network_path}, {"routes", routes_path}, {"expert", expert_path}},
                 json{{"predictor", "predictor.ckpt"}, {"metrics", "train_metrics.csv"}});
  return 0;
}

int run_train_agent(const CommonArgs& args, const std::string& network_path,
                    const std::string& routes_path, const std::string& traffic_path,
                    const std::string& predictor_path) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  ertte::NeuralTtePredictor predictor(
      predictor_config(cfg, w.network, cfg.seed ^ kPredictorSeedSalt));
  predictor.load(predictor_path);

  ertte::AgentConfig agent_cfg = cfg.agent;
  agent_cfg.seed = cfg.seed ^ kAgentSeedSalt;
  ertte::DqnAgent agent(resolve_model(cfg, w.network), agent_cfg);
  const auto result = ertte::train_agent(w.split.train, predictor, agent, cfg.reward, w.ctx,
                                         cfg.data.request_interval_s, &std::cout);
  const fs::path dir = out_root(args);
  agent.save((dir / "agent.ckpt").string(), cfg.hash());
  write_manifest(dir, "train-agent", cfg, args,
                 json{{"network", network_path},
                      {"routes", routes_path},
                      {"predictor", predictor_path}},
                 json{{"agent", "agent.ckpt"}});
  std::cout << "agent trained: " << result.transitions_seen << " transitions, "
            << result.gradient_steps << " gradient steps\n";
  return 0;
}

int run_evaluate(const CommonArgs& args, const std::string& network_path,
                 const std::string& routes_path, const std::string& traffic_path,
                 const std::string& predictor_path, const std::string& agent_path,
                 const std::string& policy_name, std::optional<double> interval) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  ertte::NeuralTtePredictor predictor(
      predictor_config(cfg, w.network, cfg.seed ^ kPredictorSeedSalt));
  predictor.load(predictor_path);

  const ertte::PolicyKind policy = ertte::parse_policy(policy_name);
  std::unique_ptr<ertte::DqnAgent> agent;
  if (policy == ertte::PolicyKind::kLearned) {
    if (agent_path.empty()) throw ertte::ConfigError("--policy learned requires --agent");
    ertte::AgentConfig agent_cfg = cfg.agent;
    agent_cfg.seed = cfg.seed ^ kAgentSeedSalt;
    agent = std::make_unique<ertte::DqnAgent>(resolve_model(cfg, w.network), agent_cfg);
    agent->load(agent_path);
  }

  const double dt = interval.value_or(cfg.eval.interval_s);
  const auto sim = ertte::simulate_online(w.split.test, agent.get(), policy, predictor, dt, w.ctx,
                                          cfg.eval.workers, cfg.eval.mape_min_truth_s);
  const fs::path dir = out_root(args);
  {
    std::ofstream report(dir / "report.json");
    report << sim.report.to_json() << '\n';
  }
  sim.report.save_csv((dir / "report.csv").string());
  ertte::save_events(sim.events, (dir / "events.ndjson").string());
  write_manifest(dir, "evaluate", cfg, args,
                 json{{"network", network_path},
                      {"routes", routes_path},
                      {"predictor", predictor_path},
                      {"agent", agent_path},
                      {"policy", policy_name},
                      {"interval_s", dt}},
                 json{{"report", "report.json"}, {"events", "events.ndjson"}});
  std::cout << sim.report.to_json() << '\n';
  return 0;
}

int run_sweep_interval(const CommonArgs& args, const std::string& network_path,
                       const std::string& routes_path, const std::string& traffic_path,
                       const std::string& predictor_path, const std::string& agent_path,
                       const std::string& policy_name) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  ertte::NeuralTtePredictor predictor(
      predictor_config(cfg, w.network, cfg.seed ^ kPredictorSeedSalt));
  predictor.load(predictor_path);
  const ertte::PolicyKind policy = ertte::parse_policy(policy_name);
  std::unique_ptr<ertte::DqnAgent> agent;
  if (policy == ertte::PolicyKind::kLearned) {
    if (agent_path.empty()) throw ertte::ConfigError("--policy learned requires --agent");
    ertte::AgentConfig agent_cfg = cfg.agent;
    agent_cfg.seed = cfg.seed ^ kAgentSeedSalt;
    agent = std::make_unique<ertte::DqnAgent>(resolve_model(cfg, w.network), agent_cfg);
    agent->load(agent_path);
  }
  const auto rows = ertte::interval_sweep(w.split.test, agent.get(), policy, predictor,
                                          cfg.eval.sweep_intervals, w.ctx, cfg.eval.workers);
  const fs::path dir = out_root(args);
  std::ofstream out(dir / "sweep.csv");
  out << "interval_s,mape_pct,mur_pct\n";
  for (const auto& row : rows) {
    out << row.interval_s << ',' << row.mape << ',' << row.mur << '\n';
    std::cout << "dt=" << row.interval_s << "s mape=" << row.mape << "% mur=" << row.mur << "%\n";
  }
  write_manifest(dir, "sweep-interval", cfg, args,
                 json{{"network", network_path},
                      {"routes", routes_path},
                      {"predictor", predictor_path},
                      {"agent", agent_path}},
                 json{{"sweep", "sweep.csv"}});
  return 0;
}

int run_scalability(const CommonArgs& args, const std::string& network_path,
                    const std::string& routes_path, const std::string& traffic_path) {
  ertte::Config cfg = resolve_config(args);
  World w = load_world(cfg, network_path, routes_path, traffic_path);
  const auto val_samples =
      ertte::enumerate_samples(w.split.validation, cfg.data.request_interval_s, w.network);

  auto train_and_eval = [&](const std::vector<ertte::TravelRoute>& subset) {
    const auto samples =
        ertte::enumerate_samples(subset, cfg.data.request_interval_s, w.network);
    ertte::NeuralTtePredictor predictor(
        predictor_config(cfg, w.network, cfg.seed ^ kPredictorSeedSalt));
    ertte::train_predictor_uniform(predictor, samples, subset, val_samples, w.split.validation,
                                   w.ctx, cfg.predictor_train, cfg.seed ^ kPredictorSeedSalt);
    return ertte::predictor_only_eval(w.split.test, predictor, cfg.eval.interval_s, w.ctx,
                                      cfg.eval.workers, cfg.eval.mape_min_truth_s)
        .mape;
  };
  const auto rows = ertte::scalability_run(w.split.train, cfg.eval.scalability_fractions, cfg.seed,
                                           train_and_eval);
  const fs::path dir = out_root(args);
  std::ofstream out(dir / "scalability.csv");
  out << "fraction,mape_pct\n";
  for (const auto& row : rows) {
    out << row.fraction << ',' << row.mape << '\n';
    std::cout << "fraction=" << row.fraction << " mape=" << row.mape << "%\n";
  }
  write_manifest(dir, "scalability", cfg, args,
                 json{{"network", network_path}, {"routes", routes_path}},
                 json{{"scalability", "scalability.csv"}});
  return 0;
}

int run_export_case_study(const CommonArgs& args, const std::string& events_path, int k) {
  ertte::Config cfg = resolve_config(args);
  const auto events = ertte::load_events(events_path);
  const fs::path dir = out_root(args);
  const auto result =
      ertte::export_case_study(events, k > 0 ? k : cfg.eval.case_study_k, cfg.seed,
                               (dir / "case_random_routes.csv").string(),
                               (dir / "case_worst_requests.csv").string());
  if (result.truncated) std::cerr << "warning: k exceeded available data, truncated\n";
  write_manifest(dir, "export-case-study", cfg, args, json{{"events", events_path}},
                 json{{"random_routes", "case_random_routes.csv"},
                      {"worst_requests", "case_worst_requests.csv"}});
  std::cout << "case study: " << result.routes_written << " routes, " << result.worst_written
            << " worst requests\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"En-route travel time estimation with learned re-prediction gating"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string network_path, routes_path, traffic_path;
  std::string expert_path, predictor_path, agent_path, events_path;
  std::string policy_name = "learned";
  std::string curriculum_flag;
  std::optional<double> interval;
  int case_k = 0;

  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic road network and routes");
  add_common(synth, args);

  auto* traffic = app.add_subcommand("build-traffic", "Aggregate the traffic-condition store");
  add_common(traffic, args);
  traffic->add_option("--network", network_path, "Road network CSV")->required();
  traffic->add_option("--routes", routes_path, "Route file")->required();

  auto* expert = app.add_subcommand("train-expert", "Train the difficulty-scoring expert");
  add_common(expert, args);
  expert->add_option("--network", network_path)->required();
  expert->add_option("--routes", routes_path)->required();
  expert->add_option("--traffic", traffic_path);

  auto* score = app.add_subcommand("score-difficulty", "Export per-sample difficulty scores");
  add_common(score, args);
  score->add_option("--network", network_path)->required();
  score->add_option("--routes", routes_path)->required();
  score->add_option("--traffic", traffic_path);
  score->add_option("--expert", expert_path)->required();

  auto* trainp = app.add_subcommand("train-predictor", "Train the travel-time predictor");
  add_common(trainp, args);
  trainp->add_option("--network", network_path)->required();
  trainp->add_option("--routes", routes_path)->required();
  trainp->add_option("--traffic", traffic_path);
  trainp->add_option("--expert", expert_path, "Expert checkpoint (required with curriculum)");
  trainp->add_option("--curriculum", curriculum_flag, "on|off (default: config)");

  auto* traina = app.add_subcommand("train-agent", "Train the decision-making agent");
  add_common(traina, args);
  traina->add_option("--network", network_path)->required();
  traina->add_option("--routes", routes_path)->required();
  traina->add_option("--traffic", traffic_path);
  traina->add_option("--predictor", predictor_path)->required();

  auto* evaluate = app.add_subcommand("evaluate", "End-to-end online evaluation");
  add_common(evaluate, args);
  evaluate->add_option("--network", network_path)->required();
  evaluate->add_option("--routes", routes_path)->required();
  evaluate->add_option("--traffic", traffic_path);
  evaluate->add_option("--predictor", predictor_path)->required();
  evaluate->add_option("--agent", agent_path);
  evaluate->add_option("--policy", policy_name, "learned|always|never-after-first");
  evaluate->add_option("--interval", interval, "Request interval in seconds");

  auto* sweep = app.add_subcommand("sweep-interval", "Evaluate across request intervals");
  add_common(sweep, args);
  sweep->add_option("--network", network_path)->required();
  sweep->add_option("--routes", routes_path)->required();
  sweep->add_option("--traffic", traffic_path);
  sweep->add_option("--predictor", predictor_path)->required();
  sweep->add_option("--agent", agent_path);
  sweep->add_option("--policy", policy_name);

  auto* scal = app.add_subcommand("scalability", "Retrain on training-set fractions");
  add_common(scal, args);
  scal->add_option("--network", network_path)->required();
  scal->add_option("--routes", routes_path)->required();
  scal->add_option("--traffic", traffic_path);

  auto* case_study = app.add_subcommand("export-case-study", "Export case-study CSVs");
  add_common(case_study, args);
  case_study->add_option("--events", events_path, "events.ndjson from evaluate")->required();
  case_study->add_option("-k", case_k, "Number of routes / worst requests");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth_gen(args);
    if (traffic->parsed()) return run_build_traffic(args, network_path, routes_path);
    if (expert->parsed()) return run_train_expert(args, network_path, routes_path, traffic_path);
    if (score->parsed())
      return run_score_difficulty(args, network_path, routes_path, traffic_path, expert_path);
    if (trainp->parsed())
      return run_train_predictor(args, network_path, routes_path, traffic_path, expert_path,
                                 curriculum_flag);
    if (traina->parsed())
      return run_train_agent(args, network_path, routes_path, traffic_path, predictor_path);
    if (evaluate->parsed())
      return run_evaluate(args, network_path, routes_path, traffic_path, predictor_path,
                          agent_path, policy_name, interval);
    if (sweep->parsed())
      return run_sweep_interval(args, network_path, routes_path, traffic_path, predictor_path,
                                agent_path, policy_name);
    if (scal->parsed()) return run_scalability(args, network_path, routes_path, traffic_path);
    if (case_study->parsed()) return run_export_case_study(args, events_path, case_k);
  } catch (const ertte::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ertte::StateError& e) {
    std::cerr << "state error: " << e.what() << '\n';
    return 4;
  } catch (const ertte::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
