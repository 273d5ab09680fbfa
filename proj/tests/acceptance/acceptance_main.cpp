// Acceptance suite: every criterion prints one [PASS]/[FAIL] line; the
// process exits non-zero if any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ertte/agent.hpp"
#include "ertte/config.hpp"
#include "ertte/curriculum.hpp"
#include "ertte/errors.hpp"
#include "ertte/evaluation.hpp"
#include "ertte/inference_memory.hpp"
#include "ertte/predictor.hpp"
#include "ertte/replay_buffer.hpp"
#include "ertte/reward.hpp"
#include "ertte/synthetic.hpp"
#include "ertte/training.hpp"

using namespace ertte;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

nn::ModelConfig toy_model(int d, int vocab = 6) {
  nn::ModelConfig m;
  m.d_segment = d;
  m.d_timeslot = d;
  m.d_traffic = d;
  m.d_background = 2;
  m.d_drive = d;
  m.d_history = 2;
  m.d_attention = d;
  m.d_hidden = d;
  m.heads = 2;
  m.offline_depth = 1;
  m.online_depth = 1;
  m.past_slots = 1;
  m.segment_vocab = vocab;
  m.timeslot_vocab = 12;
  return m;
}

AgentState toy_state(int n_segments, int traveled, std::uint64_t seed = 123) {
  AgentState state;
  auto& off = state.offline;
  off.past_slots = 1;
  off.current_slot = 5;
  off.background = {2, false, true, 7};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> speed(4.0, 16.0);
  for (int i = 0; i < n_segments; ++i) {
    off.spatial.push_back(
        {static_cast<SegmentId>(i % 6), {0, 1, 150.0 + 40.0 * i, 10.0 + i, 1 + i % 2, i % 3}});
    std::vector<int> slots{(4 + i) % 12, (5 + i) % 12};
    const double v = speed(rng);
    off.temporal.push_back(slots);
    off.traffic.push_back({SlotStats{v - 1.0, v + 2.0, v, v + 0.5},
                           SlotStats{v - 0.5, v + 2.5, v + 0.2, v + 0.7}});
  }
  for (int j = 0; j < traveled; ++j) {
    state.online.driving_speed_mps.push_back(speed(rng));
    state.online.decision_history.push_back(j % 2 == 0 ? HistoryMark::kRepredict
                                                       : HistoryMark::kNone);
  }
  state.position = static_cast<std::size_t>(traveled);
  state.sigma_s = 15.0;
  return state;
}

// --------------------------------------------------------------------------
// Criterion 1: gradient fidelity for every differentiable operation and the
// full combined objective at toy dims, under 60 seconds.
bool criterion_gradient_fidelity(std::string& detail) {
  const double start = now_seconds();
  double worst = 0.0;
  std::string worst_op;
  auto record = [&](const std::string& op, const nn::GradientCheckResult& r) {
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      worst_op = op + "/" + r.worst_param;
    }
  };

  {  // embedding + offline/online dense maps
    nn::ParamStore store;
    nn::DecisionNet net(toy_model(4), store, "dm");
    std::mt19937_64 rng(11);
    store.init_normal(rng, 0.4);
    const AgentState state = toy_state(3, 2);
    record("embed_state", nn::check_gradients(store, [&](nn::Tape& t) {
             const auto e = net.embed_state(t, state);
             return t.add(t.sum_all(e.offline), t.sum_all(e.online));
           }));
  }
  {  // self-attention and the full encoder block
    nn::ParamStore store;
    nn::EncoderBlock block(toy_model(4), store, "blk");
    auto& x = store.create("x", 3, 4);
    std::mt19937_64 rng(12);
    store.init_normal(rng, 0.5);
    record("self_attention", nn::check_gradients(store, [&](nn::Tape& t) {
             return t.mean_all(block.self_attention(t, t.param(x)));
           }));
    record("encoder_block", nn::check_gradients(store, [&](nn::Tape& t) {
             const auto out = block.forward(t, t.param(x));
             return t.mean_all(t.cmul(out, out));
           }));
  }
  {  // InfoNCE over projected pooled representations (batch 2)
    nn::ParamStore store;
    auto& on = store.create("on", 2, 4);
    auto& off = store.create("off", 2, 4);
    std::mt19937_64 rng(13);
    store.init_normal(rng, 0.8);
    record("info_nce", nn::check_gradients(store, [&](nn::Tape& t) {
             return nn::info_nce_from_pooled(t, t.param(on), t.param(off), 0.5);
           }));
  }
  {  // fusion attention
    nn::ParamStore store;
    nn::DecisionNet net(toy_model(4), store, "dm");
    auto& on = store.create("on", 2, 4);
    auto& off = store.create("off", 3, 4);
    std::mt19937_64 rng(14);
    store.init_normal(rng, 0.6);
    record("fuse", nn::check_gradients(store, [&](nn::Tape& t) {
             return t.mean_all(net.fuse(t, t.param(on), t.param(off)));
           }));
  }
  {  // q_values end to end
    nn::ParamStore store;
    nn::DecisionNet net(toy_model(4), store, "dm");
    std::mt19937_64 rng(15);
    store.init_normal(rng, 0.3);
    const AgentState state = toy_state(3, 2);
    record("q_values", nn::check_gradients(store, [&](nn::Tape& t) {
             return t.pick(net.forward(t, state).q, 0, 1);
           }));
  }
  {  // neural predictor MAE loss
    SyntheticConfig scfg;
    scfg.seed = 5;
    scfg.grid_size = 3;
    scfg.n_routes = 4;
    const auto world = generate_synthetic_world(scfg);
    const auto store = build_traffic_store(world.routes, 5, world.network);
    const WorldContext ctx{&world.network, &store, 1};
    NeuralTtePredictor::Config pcfg;
    pcfg.model = toy_model(4, static_cast<int>(world.network.segment_count()));
    pcfg.model.timeslot_vocab = 2016;
    pcfg.seed = 6;
    NeuralTtePredictor predictor(pcfg);
    std::mt19937_64 rng(16);
    predictor.params().init_normal(rng, 0.3);
    const auto& route = world.routes[0];
    const Request request = make_request(route, route.links()[0].travel_time_s + 0.5);
    const auto features = materialize_features(request, ctx);
    PredictionInput input{&features.offline, &features.online, request.split_index};
    std::vector<double> target;
    for (std::size_t i = request.split_index; i < route.size(); ++i)
      target.push_back(route.links()[i].travel_time_s);
    record("predictor_loss", nn::check_gradients(predictor.params(), [&](nn::Tape& t) {
             return predictor.sample_loss(t, input, target);
           }));
  }
  {  // full combined objective: Huber TD + lambda * InfoNCE over a batch of 2
    nn::ParamStore store;
    nn::DecisionNet net(toy_model(4), store, "dm");
    std::mt19937_64 rng(17);
    store.init_normal(rng, 0.3);
    const AgentState s0 = toy_state(3, 2, 1);
    const AgentState s1 = toy_state(3, 1, 2);
    const double targets[2] = {0.7, -0.4};
    const int actions[2] = {1, 0};
    const double lambda = 0.1, delta = 1.0, tau = 0.5;
    record("combined_loss", nn::check_gradients(store, [&](nn::Tape& t) {
             std::vector<nn::NodeRef> residuals, on_pool, off_pool;
             const AgentState* states[2] = {&s0, &s1};
             for (int i = 0; i < 2; ++i) {
               const auto fwd = net.forward(t, *states[i]);
               residuals.push_back(t.sub(t.pick(fwd.q, 0, actions[i]),
                                         t.input(nn::Mat::Constant(1, 1, targets[i]))));
               on_pool.push_back(net.project_online(t, t.mean_rows(fwd.online_encoded)));
               off_pool.push_back(net.project_offline(t, t.mean_rows(fwd.offline_encoded)));
             }
             nn::NodeRef td = t.mean_all(t.huber(t.concat_rows(residuals), delta));
             nn::NodeRef lc = nn::info_nce_from_pooled(t, t.concat_rows(on_pool),
                                                       t.concat_rows(off_pool), tau);
             return t.add(td, t.scale(lc, lambda));
           }));
  }

  const double elapsed = now_seconds() - start;
  std::ostringstream oss;
  oss << "max rel err " << worst << " (" << worst_op << "), " << elapsed << " s";
  detail = oss.str();
  return worst < 1e-3 && elapsed < 60.0;
}

// --------------------------------------------------------------------------
// Criterion 2: InfoNCE anchors.
bool criterion_infonce_anchors(std::string& detail) {
  nn::Tape t1(false);
  nn::Mat single(1, 1);
  single << 2.9;
  const double l1 = t1.scalar(t1.info_nce(t1.input(single), 0.4));
  if (l1 != 0.0) {
    detail = "N=1 loss " + std::to_string(l1);
    return false;
  }
  for (int n : {2, 4, 9}) {
    nn::Tape t(false);
    const double loss = t.scalar(t.info_nce(t.input(nn::Mat::Constant(n, n, 0.37)), 0.9));
    if (std::abs(loss - std::log(static_cast<double>(n))) > 1e-9) {
      detail = "uniform N=" + std::to_string(n) + " off by " +
               std::to_string(std::abs(loss - std::log(static_cast<double>(n))));
      return false;
    }
  }
  std::mt19937_64 rng(40);
  std::normal_distribution<double> dist(0.0, 1.0);
  nn::Mat s(4, 4);
  for (long i = 0; i < s.size(); ++i) s(i) = dist(rng);
  const double tau = 0.3;
  nn::Tape t(false);
  const double loss = t.scalar(t.info_nce(t.input(s), tau));
  double oracle = 0.0;
  for (int i = 0; i < 4; ++i) {
    double denom = 0.0;
    for (int j = 0; j < 4; ++j) denom += std::exp(s(i, j) / tau);
    oracle -= std::log(std::exp(s(i, i) / tau) / denom);
  }
  oracle /= 4.0;
  detail = "4x4 |loss - oracle| = " + std::to_string(std::abs(loss - oracle));
  return std::abs(loss - oracle) < 1e-10;
}

// --------------------------------------------------------------------------
// Criterion 3: reward algebra over 1e4 randomized cases.
bool criterion_reward_algebra(std::string& detail) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> value(1.0, 500.0);
  std::uniform_real_distribution<double> sigma(0.0, 400.0);
  RewardConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const double y_rp = value(rng), y_dl = value(rng), truth = value(rng), s = sigma(rng);
    for (auto mode : {PerformanceMode::kErrorDiff, PerformanceMode::kRawDiff}) {
      if (performance_reward(y_rp, y_dl, 1, truth, mode) !=
          -performance_reward(y_rp, y_dl, 0, truth, mode)) {
        detail = "antisymmetry broken at case " + std::to_string(i);
        return false;
      }
    }
    const double r1 = frequency_reward(s, 1, cfg.alpha, cfg.beta);
    if (r1 != cfg.alpha * s + cfg.beta) {
      detail = "frequency line broken";
      return false;
    }
    const auto b = compute_reward(y_rp, y_dl, i % 2, s, truth, cfg);
    if (b.total != b.performance + b.efficiency + b.frequency) {
      detail = "sum broken";
      return false;
    }
  }
  detail = "10000 cases exact";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 4: inference-memory suffix-sum oracle on 1000 random trips.
bool criterion_memory_oracle(std::string& detail) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> len_dist(1, 25);
  std::uniform_real_distribution<double> time_dist(0.5, 180.0);
  InferenceMemory memory;
  for (int trip = 0; trip < 1000; ++trip) {
    const int m = len_dist(rng);
    const int split = static_cast<int>(rng() % static_cast<std::uint64_t>(m));
    std::vector<double> predictions;
    for (int i = split; i < m; ++i) predictions.push_back(time_dist(rng));
    memory.store(trip, predictions, 0.0, static_cast<std::size_t>(split),
                 static_cast<std::size_t>(m));
    double previous = std::numeric_limits<double>::infinity();
    for (int pos = split; pos <= m; ++pos) {
      double oracle = 0.0;
      for (int i = pos; i < m; ++i)
        oracle += predictions[static_cast<std::size_t>(i - split)];
      const double got = memory.lookup(trip, static_cast<std::size_t>(pos)).value();
      if (got != oracle) {
        detail = "mismatch at trip " + std::to_string(trip);
        return false;
      }
      if (got > previous) {
        detail = "not monotone at trip " + std::to_string(trip);
        return false;
      }
      previous = got;
    }
  }
  detail = "1000 trips exact and monotone";
  return true;
}

// --------------------------------------------------------------------------
// Criterion 5: replay buffer FIFO, chi-square uniformity, determinism.
bool criterion_replay_buffer(std::string& detail) {
  auto tiny = [](int tag) {
    Transition t;
    t.state = toy_state(1, 0, static_cast<std::uint64_t>(tag));
    t.state.offline.current_slot = tag % 12;
    t.action = tag % 2;
    t.reward = static_cast<double>(tag);
    return t;
  };
  {  // strict FIFO
    ReplayBuffer buffer(3, 1);
    for (int i = 1; i <= 5; ++i) buffer.push(tiny(i));
    const auto ordered = buffer.in_insertion_order();
    if (ordered.size() != 3 || ordered[0]->reward != 3.0 || ordered[2]->reward != 5.0) {
      detail = "FIFO eviction broken";
      return false;
    }
  }
  {  // determinism
    ReplayBuffer a(64, 7), b(64, 7);
    for (int i = 0; i < 40; ++i) {
      a.push(tiny(i));
      b.push(tiny(i));
    }
    for (int round = 0; round < 3; ++round) {
      const auto sa = a.sample(8), sb = b.sample(8);
      for (std::size_t i = 0; i < sa.transitions.size(); ++i)
        if (sa.transitions[i]->reward != sb.transitions[i]->reward) {
          detail = "seeded sampling diverged";
          return false;
        }
    }
  }
  // chi-square at 3 sigma over 1e5 draws
  const std::size_t n = 20;
  ReplayBuffer buffer(n, 99);
  for (std::size_t i = 0; i < n; ++i) buffer.push(tiny(static_cast<int>(i)));
  std::map<double, long> counts;
  long drawn = 0;
  while (drawn < 100000) {
    for (const auto* t : buffer.sample(5).transitions) {
      ++counts[t->reward];
      ++drawn;
    }
  }
  const double expected = static_cast<double>(drawn) / static_cast<double>(n);
  double chi2 = 0.0;
  for (const auto& [_, c] : counts) {
    const double d = static_cast<double>(c) - expected;
    chi2 += d * d / expected;
  }
  const double df = static_cast<double>(n - 1);
  std::ostringstream oss;
  oss << "chi2 " << chi2 << " (df " << df << ", 3-sigma band "
      << df - 3.0 * std::sqrt(2.0 * df) << ".." << df + 3.0 * std::sqrt(2.0 * df) << ")";
  detail = oss.str();
  return chi2 > df - 3.0 * std::sqrt(2.0 * df) && chi2 < df + 3.0 * std::sqrt(2.0 * df);
}

// --------------------------------------------------------------------------
// Criterion 6: Double DQN convergence on a 2-state/2-action MDP.
bool criterion_dqn_convergence(std::string& detail) {
  const double start = now_seconds();
  const double gamma = 0.9;
  double qa[2] = {0, 0}, qb[2] = {0, 0};
  for (int iter = 0; iter < 3000; ++iter) {
    const double va = std::max(qa[0], qa[1]);
    const double vb = std::max(qb[0], qb[1]);
    qa[0] = 1.0 + gamma * va;
    qa[1] = 0.0 + gamma * vb;
    qb[0] = 2.0 + gamma * va;
    qb[1] = -1.0 + gamma * vb;
  }

  AgentConfig cfg;
  cfg.gamma = gamma;
  cfg.lr = 3e-3;
  cfg.batch_size = 32;
  cfg.buffer_capacity = 2048;
  cfg.update_step = 25;
  cfg.train_step = 1;
  cfg.lambda = 0.0;
  cfg.huber_delta = 10.0;
  cfg.epsilon_start = 1.0;
  cfg.epsilon_end = 1.0;
  cfg.seed = 123;
  nn::ModelConfig model = toy_model(8, 4);
  model.past_slots = 0;

  auto mdp_state = [](int id) {
    AgentState s;
    s.offline.past_slots = 0;
    s.offline.current_slot = id;
    s.offline.background = {id, false, false, id};
    s.offline.spatial.push_back(
        {static_cast<SegmentId>(id), {0, 1, 100.0 + 80.0 * id, 10.0, 1, id}});
    s.offline.temporal.push_back({id});
    s.offline.traffic.push_back({SlotStats{4.0 + id, 14.0 + id, 9.0 + id, 9.5 + id}});
    return s;
  };
  DqnAgent agent(model, cfg);
  const AgentState state_a = mdp_state(0);
  const AgentState state_b = mdp_state(1);
  ReplayBuffer buffer(2048, 31);
  std::mt19937_64 rng(17);

  int current = 0;
  long updates = 0;
  double err = 1e9;
  while (updates < 10000) {
    const int action = static_cast<int>(rng() % 2);
    Transition t;
    t.state = current == 0 ? state_a : state_b;
    t.action = action;
    if (current == 0) {
      t.reward = action == 0 ? 1.0 : 0.0;
    } else {
      t.reward = action == 0 ? 2.0 : -1.0;
    }
    current = action == 0 ? 0 : 1;
    t.next_state = current == 0 ? state_a : state_b;
    buffer.push(std::move(t));
    if (buffer.size() >= 64) {
      agent.train_step(buffer.sample(cfg.batch_size).transitions);
      ++updates;
      if (updates % 250 == 0) {
        const auto qa_net = agent.q_main(state_a);
        const auto qb_net = agent.q_main(state_b);
        err = std::max({std::abs(qa_net(0) - qa[0]), std::abs(qa_net(1) - qa[1]),
                        std::abs(qb_net(0) - qb[0]), std::abs(qb_net(1) - qb[1])});
        if (err < 1e-2) break;
      }
    }
  }
  const double elapsed = now_seconds() - start;
  std::ostringstream oss;
  oss << "max |Q - Q*| = " << err << " after " << updates << " updates, " << elapsed << " s";
  detail = oss.str();
  return err < 1e-2 && updates < 10000 && elapsed < 120.0;
}

// --------------------------------------------------------------------------
// Criterion 7: curriculum coverage bound and exact disjoint partition.
bool criterion_curriculum_coverage(std::string& detail) {
  for (int n = 1; n <= 10; ++n) {
    for (int m = 1; m <= 10; ++m) {
      std::vector<TrainingSample> samples;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
          TrainingSample s;
          s.route_index = samples.size();
          s.route_links = static_cast<std::size_t>(3 + i);
          s.traveled_fraction = (static_cast<double>(j) + 0.5) / static_cast<double>(m);
          s.target = {1.0};
          samples.push_back(s);
        }
      auto grid = partition(samples, n, m);
      if (grid.subsets() != n || grid.metasets() != m) {
        detail = "partition shrunk unexpectedly";
        return false;
      }
      score_difficulty(grid, samples, [](const TrainingSample&) { return 1.0; });
      for (int si = 1; si <= n; ++si) {
        for (int sj = 1; sj <= m; ++sj) {
          SchedulerConfig cfg;
          cfg.kappa_s = (static_cast<double>(si) - 0.4) / static_cast<double>(n);
          cfg.kappa_m = (static_cast<double>(sj) - 0.4) / static_cast<double>(m);
          TrainingScheduler scheduler(grid, cfg);
          if (scheduler.start_cell() != std::pair<int, int>{si - 1, sj - 1}) {
            detail = "start-cell derivation broken";
            return false;
          }
          const int bound = std::max({n - si, si - 1, m - sj, sj - 1}) + 1;
          if (scheduler.coverage_epochs() != bound) {
            detail = "coverage bound formula broken";
            return false;
          }
          // BFS oracle per epoch.
          std::set<std::pair<int, int>> ball{{si - 1, sj - 1}};
          for (int epoch = 1; epoch <= bound; ++epoch) {
            const auto pool = scheduler.pool(1, epoch);
            std::set<std::pair<int, int>> active(pool.active_cells.begin(),
                                                 pool.active_cells.end());
            if (active != ball) {
              detail = "scheduler expansion diverges from BFS at N=" + std::to_string(n) +
                       " M=" + std::to_string(m);
              return false;
            }
            std::set<std::pair<int, int>> next = ball;
            for (const auto& [ci, cj] : ball)
              for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                  const int ni = ci + di, nj = cj + dj;
                  if (ni >= 0 && ni < n && nj >= 0 && nj < m) next.insert({ni, nj});
                }
            ball = std::move(next);
          }
          if (!scheduler.pool(1, bound).coverage_complete) {
            detail = "grid not covered within the bound";
            return false;
          }
        }
      }
    }
  }

  // Exact disjoint cover of 1e4 random samples.
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> links(3, 30);
  std::uniform_real_distribution<double> frac(0.0, 0.999);
  std::vector<TrainingSample> samples(10000);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i].route_index = i;
    samples[i].route_links = static_cast<std::size_t>(links(rng));
    samples[i].traveled_fraction = frac(rng);
    samples[i].target = {1.0};
  }
  const auto grid = partition(samples, 8, 4);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (int i = 0; i < grid.subsets(); ++i)
    for (int j = 0; j < grid.metasets(); ++j)
      for (std::size_t k : grid.cell(i, j)) {
        if (seen.contains(k)) {
          detail = "duplicate sample in partition";
          return false;
        }
        seen.insert(k);
        ++total;
      }
  if (total != samples.size()) {
    detail = "partition dropped samples";
    return false;
  }
  detail = "all grids N,M <= 10, every start cell, within the Alg. 2 bound; 10k cover exact";
  return true;
}

// --------------------------------------------------------------------------
// Shared end-to-end scaffolding for criteria 8-10.
struct SeedRun {
  std::uint64_t seed = 0;
  double mur_learned = 0.0;
  double mape_learned = 0.0;
  double mape_always = 0.0;
  std::vector<SweepRow> sweep;
};

struct E2eWorld {
  RoadNetwork network;
  DatasetSplit split;
  TrafficConditionStore store;
  WorldContext ctx;
};

E2eWorld build_e2e_world(std::uint64_t seed, int n_routes) {
  SyntheticConfig scfg;
  scfg.seed = seed;
  scfg.grid_size = 8;  // 224 segments
  scfg.n_routes = n_routes;
  scfg.constant_fraction = 0.6;
  scfg.regime_shift_fraction = 0.4;
  auto world = generate_synthetic_world(scfg);
  E2eWorld out;
  out.network = std::move(world.network);
  out.split = chronological_split(std::move(world.routes));
  out.store = build_traffic_store(out.split.train, 5, out.network);
  out.ctx = {&out.network, &out.store, 2};
  return out;
}

nn::ModelConfig e2e_model(const RoadNetwork& network) {
  nn::ModelConfig m;
  m.d_segment = 4;
  m.d_timeslot = 4;
  m.d_traffic = 4;
  m.d_background = 2;
  m.d_drive = 4;
  m.d_history = 2;
  m.d_attention = 16;
  m.d_hidden = 8;
  m.heads = 2;
  m.offline_depth = 1;
  m.online_depth = 1;
  m.past_slots = 2;
  m.segment_vocab = static_cast<int>(network.segment_count());
  m.timeslot_vocab = 2016;
  return m;
}

SeedRun run_e2e_seed(std::uint64_t seed, std::ostream& log) {
  E2eWorld world = build_e2e_world(seed, 5000);
  const double interval = 30.0;
  const int workers = 2;

  // Predictor: short uniform training run; identical between both policies.
  const auto samples = enumerate_samples(world.split.train, interval, world.network);
  const auto val_samples = enumerate_samples(world.split.validation, interval, world.network);
  NeuralTtePredictor::Config pcfg;
  pcfg.model = e2e_model(world.network);
  pcfg.lr = 2e-3;
  pcfg.batch_size = 256;
  pcfg.seed = seed ^ 0x1234567;
  NeuralTtePredictor predictor(pcfg);
  PredictorTrainConfig tcfg;
  tcfg.lr = pcfg.lr;
  tcfg.batch_size = pcfg.batch_size;
  tcfg.epochs = 2;
  tcfg.early_stop_tolerance = 0.0;
  train_predictor_uniform(predictor, samples, world.split.train, val_samples,
                          world.split.validation, world.ctx, tcfg, seed ^ 0x777, &log);

  // Agent: two passes over the training routes, omega_p = -0.5.
  AgentConfig acfg;
  acfg.gamma = 0.9;
  acfg.lr = 3e-3;
  acfg.batch_size = 128;
  acfg.epochs = 2;
  acfg.buffer_capacity = 100000;
  acfg.update_step = 150;
  acfg.train_step = 40;
  acfg.lambda = 0.1;
  acfg.huber_delta = 2.0;
  acfg.epsilon_start = 1.0;
  acfg.epsilon_end = 0.05;
  acfg.epsilon_decay_steps = 12000;
  acfg.seed = seed ^ 0xabcdef;
  RewardConfig reward_cfg;
  reward_cfg.omega_p = -0.5;
  DqnAgent agent(e2e_model(world.network), acfg);
  train_agent(world.split.train, predictor, agent, reward_cfg, world.ctx, interval, &log);

  SeedRun run;
  run.seed = seed;
  const auto learned = simulate_online(world.split.test, &agent, PolicyKind::kLearned, predictor,
                                       interval, world.ctx, workers);
  const auto always = simulate_online(world.split.test, nullptr, PolicyKind::kAlwaysRepredict,
                                      predictor, interval, world.ctx, workers);
  run.mur_learned = learned.report.mur;
  run.mape_learned = learned.report.mape;
  run.mape_always = always.report.mape;
  run.sweep = interval_sweep(world.split.test, &agent, PolicyKind::kLearned, predictor,
                             {15.0, 30.0, 60.0, 120.0, 180.0}, world.ctx, workers);
  return run;
}

// Criterion 8: framework transparency on the synthetic world.
bool criterion_transparency(std::string& detail) {
  E2eWorld world = build_e2e_world(4242, 300);
  AvgPredictor avg;
  const auto sim = simulate_online(world.split.test, nullptr, PolicyKind::kAlwaysRepredict, avg,
                                   30.0, world.ctx, 2);
  const auto direct = predictor_only_eval(world.split.test, avg, 30.0, world.ctx, 2);
  const double gap = std::max({std::abs(sim.report.mae - direct.mae),
                               std::abs(sim.report.rmse - direct.rmse),
                               std::abs(sim.report.mape - direct.mape)});
  // The neural path must be transparent too.
  NeuralTtePredictor::Config pcfg;
  pcfg.model = e2e_model(world.network);
  pcfg.seed = 9;
  NeuralTtePredictor neural(pcfg);
  neural.mark_trained();
  const auto sim_n = simulate_online(world.split.test, nullptr, PolicyKind::kAlwaysRepredict,
                                     neural, 30.0, world.ctx, 2);
  const auto direct_n = predictor_only_eval(world.split.test, neural, 30.0, world.ctx, 2);
  const double gap_n = std::max({std::abs(sim_n.report.mae - direct_n.mae),
                                 std::abs(sim_n.report.rmse - direct_n.rmse),
                                 std::abs(sim_n.report.mape - direct_n.mape)});
  std::ostringstream oss;
  oss << "avg gap " << gap << ", neural gap " << gap_n << ", MUR " << sim.report.mur << "%";
  detail = oss.str();
  return gap < 1e-9 && gap_n < 1e-9 && sim.report.mur == 100.0 && sim_n.report.mur == 100.0;
}

// Criteria 9 and 10 share the three seeded end-to-end runs.
std::vector<SeedRun> g_seed_runs;
double g_e2e_seconds = 0.0;

void ensure_seed_runs(std::ostream& log) {
  if (!g_seed_runs.empty()) return;
  const double start = now_seconds();
  for (std::uint64_t seed : {101ull, 202ull, 303ull}) {
    log << "--- end-to-end seed " << seed << "\n";
    g_seed_runs.push_back(run_e2e_seed(seed, log));
  }
  g_e2e_seconds = now_seconds() - start;
}

bool criterion_e2e_gating(std::string& detail) {
  std::ostringstream log;
  ensure_seed_runs(log);
  int passes = 0;
  std::ostringstream oss;
  for (const auto& run : g_seed_runs) {
    const bool ok =
        run.mur_learned <= 60.0 && run.mape_learned <= run.mape_always + 2.0;
    passes += ok ? 1 : 0;
    oss << "[seed " << run.seed << ": MUR " << run.mur_learned << "%, MAPE "
        << run.mape_learned << "% vs always " << run.mape_always << "% -> "
        << (ok ? "ok" : "miss") << "] ";
  }
  oss << "runtime " << g_e2e_seconds << " s";
  detail = oss.str();
  return passes >= 2 && g_e2e_seconds <= 1800.0;
}

bool criterion_interval_trend(std::string& detail) {
  std::ostringstream log;
  ensure_seed_runs(log);
  int passes = 0;
  std::ostringstream oss;
  for (const auto& run : g_seed_runs) {
    bool monotone = true;
    for (std::size_t i = 1; i < run.sweep.size(); ++i)
      if (run.sweep[i].mur < run.sweep[i - 1].mur - 1e-9) monotone = false;
    passes += monotone ? 1 : 0;
    oss << "[seed " << run.seed << ": MUR";
    for (const auto& row : run.sweep) oss << " " << row.mur << "%";
    oss << " -> " << (monotone ? "monotone" : "not monotone") << "] ";
  }
  detail = oss.str();
  return passes >= 2;
}

// --------------------------------------------------------------------------
// Criterion 11: metric formulas.
bool criterion_metric_formulas(std::string& detail) {
  const auto hand = compute_metrics({100.0}, {110.0});
  if (std::abs(hand.mae - 10.0) > 1e-12 || std::abs(hand.rmse - 10.0) > 1e-12 ||
      std::abs(hand.mape - 10.0) > 1e-12) {
    detail = "hand case broken";
    return false;
  }
  std::mt19937_64 rng(60);
  std::uniform_real_distribution<double> truth_dist(5.0, 500.0);
  std::normal_distribution<double> noise(0.0, 30.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 60);
    std::vector<double> truths, predictions;
    for (int i = 0; i < n; ++i) {
      truths.push_back(truth_dist(rng));
      predictions.push_back(truths.back() + noise(rng));
    }
    const auto m = compute_metrics(truths, predictions);
    double se = 0.0, ae = 0.0, ape = 0.0;
    for (int i = 0; i < n; ++i) {
      se += (truths[i] - predictions[i]) * (truths[i] - predictions[i]);
      ae += std::abs(truths[i] - predictions[i]);
      ape += std::abs((truths[i] - predictions[i]) / truths[i]);
    }
    worst = std::max({worst, std::abs(m.rmse - std::sqrt(se / n)),
                      std::abs(m.mae - ae / n), std::abs(m.mape - 100.0 * ape / n)});
  }
  detail = "worst deviation " + std::to_string(worst);
  return worst < 1e-10;
}

// --------------------------------------------------------------------------
// Criterion 12: config defaults.
bool criterion_config_defaults(std::string& detail) {
  const Config cfg;
  struct Check {
    const char* name;
    bool ok;
  };
  const Check checks[] = {
      {"batch 512", cfg.agent.batch_size == 512 && cfg.predictor_train.batch_size == 512},
      {"lr 1e-4", cfg.agent.lr == 1e-4 && cfg.predictor_train.lr == 1e-4},
      {"epochs 100", cfg.agent.epochs == 100 && cfg.predictor_train.epochs == 100},
      {"buffer 500000", cfg.agent.buffer_capacity == 500000},
      {"target update 2000", cfg.agent.update_step == 2000},
      {"gamma 0.9", cfg.agent.gamma == 0.9},
      {"slot 5 min", cfg.data.slot_minutes == 5},
      {"split 70/10/20", cfg.data.split_ratios.train == 0.7 &&
                             cfg.data.split_ratios.validation == 0.1 &&
                             cfg.data.split_ratios.test == 0.2},
  };
  std::string missing;
  for (const auto& check : checks)
    if (!check.ok) missing += std::string(check.name) + "; ";
  detail = missing.empty() ? "all verbatim defaults present" : "missing: " + missing;
  return missing.empty();
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient fidelity", criterion_gradient_fidelity},
      {2, "InfoNCE anchors", criterion_infonce_anchors},
      {3, "reward algebra", criterion_reward_algebra},
      {4, "inference-memory oracle", criterion_memory_oracle},
      {5, "replay buffer", criterion_replay_buffer},
      {6, "double DQN convergence", criterion_dqn_convergence},
      {7, "curriculum coverage", criterion_curriculum_coverage},
      {8, "framework transparency", criterion_transparency},
      {9, "seeded synthetic end-to-end", criterion_e2e_gating},
      {10, "interval-sweep trend", criterion_interval_trend},
      {11, "metric formulas", criterion_metric_formulas},
      {12, "config defaults", criterion_config_defaults},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s - %s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
