#pragma once

#include <string>
#include <vector>

#include "ertte/agent_state.hpp"
#include "ertte/params.hpp"
#include "ertte/tape.hpp"

namespace ertte::nn {

struct ModelConfig {
  // Embedding widths.
  int d_segment = 8;     // d_s
  int d_timeslot = 8;    // d_t
  int d_traffic = 8;     // d_st, per-slot projection of the 4 speed stats
  int d_background = 4;  // per category
  int d_drive = 8;
  int d_history = 4;
  // Shared representation width of both encoders and the fusion attention.
  int d_attention = 128;  // d_a
  int d_hidden = 32;      // d_h; contrastive projections use 2*d_h
  int heads = 4;
  int offline_depth = 2;  // D_f
  int online_depth = 2;   // D_n
  double layer_norm_eps = 1e-5;
  double temperature = 0.1;  // InfoNCE tau
  // Vocabulary sizes.
  int segment_vocab = 0;
  int timeslot_vocab = 2016;
  int past_slots = 4;  // p; sizes the temporal/traffic input depth

  [[nodiscard]] int slot_depth() const { return past_slots + 1; }
  [[nodiscard]] int offline_input_dim() const {
    return d_segment + 4 + slot_depth() * (d_timeslot + d_traffic) + 4 * d_background;
  }
  [[nodiscard]] int online_input_dim() const { return d_drive + d_history; }

  void validate() const;
};

// One attention block: multi-head self-attention, residual + layer norm,
// a ReLU feed-forward layer, and a second residual + layer norm.
class EncoderBlock {
 public:
  EncoderBlock(const ModelConfig& cfg, ParamStore& store, const std::string& prefix);

  [[nodiscard]] NodeRef self_attention(Tape& tape, NodeRef h) const;
  [[nodiscard]] NodeRef forward(Tape& tape, NodeRef h) const;

 private:
  const ModelConfig* cfg_;
  Parameter *w_q_, *w_k_, *w_v_;
  Parameter *w_f_, *b_f_;
  Parameter *ln1_gamma_, *ln1_beta_, *ln2_gamma_, *ln2_beta_;
};

// The Decision Maker network: feature embedding, offline/online encoders,
// contrastive projections, online-offline attention fusion, and the
// two-action Q head. Parameters live in an external ParamStore so that main
// and target networks can share one architecture definition.
class DecisionNet {
 public:
  DecisionNet(const ModelConfig& cfg, ParamStore& store, const std::string& prefix);

  struct Embedded {
    NodeRef offline;  // H_X: n x d_a
    NodeRef online;   // H_F: max(i_t, 1) x d_a (start token when i_t = 0)
  };
  [[nodiscard]] Embedded embed_state(Tape& tape, const AgentState& state) const;

  struct Forward {
    NodeRef q;               // 1 x 2
    NodeRef offline_encoded; // \hat{H}_c
    NodeRef online_encoded;  // \bar{H}_c
    NodeRef fused;           // H_c
  };
  [[nodiscard]] Forward forward(Tape& tape, const AgentState& state) const;

  // Fusion attention: online representation queries the offline one.
  [[nodiscard]] NodeRef fuse(Tape& tape, NodeRef online, NodeRef offline) const;

  // Contrastive projections (linear map to 2*d_h, then L2 row normalization).
  [[nodiscard]] NodeRef project_online(Tape& tape, NodeRef pooled) const;
  [[nodiscard]] NodeRef project_offline(Tape& tape, NodeRef pooled) const;

  // Convenience: non-recording forward returning the two Q values.
  [[nodiscard]] Eigen::Vector2d q_values(const AgentState& state) const;

  [[nodiscard]] const ModelConfig& config() const { return cfg_; }
  [[nodiscard]] const std::vector<EncoderBlock>& offline_encoder() const { return offline_blocks_; }
  [[nodiscard]] const std::vector<EncoderBlock>& online_encoder() const { return online_blocks_; }

 private:
  ModelConfig cfg_;
  // Feature embedding tables and dense maps.
  Parameter *segment_table_, *timeslot_table_, *traffic_proj_, *traffic_bias_;
  Parameter *weekday_table_, *holiday_table_, *rush_table_, *weather_table_;
  Parameter *fc1_w_, *fc1_b_;  // offline dense (ReLU)
  Parameter *drive_w_, *drive_b_, *history_table_;
  Parameter *fc2_w_, *fc2_b_;  // online dense
  Parameter* start_token_;
  std::vector<EncoderBlock> offline_blocks_;
  std::vector<EncoderBlock> online_blocks_;
  Parameter *g_online_w_, *g_online_b_, *g_offline_w_, *g_offline_b_;
  Parameter *head_w_, *head_b_;
};

// InfoNCE loss over pooled batch representations (Eq. of the contrastive
// alignment): S_ij = online_i . offline_j.
NodeRef info_nce_from_pooled(Tape& tape, NodeRef online_rows, NodeRef offline_rows, double tau);

}  // namespace ertte::nn
