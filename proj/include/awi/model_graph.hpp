#pragma once

// Graph-building blocks shared by training, scoring, decoding and the
// gradient checks. Everything is templated on the float type so the same
// construction runs in 32-bit (training) and 64-bit (checking) mode.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/model_types.hpp"
#include "awi/tape.hpp"

namespace awi {

template <class T>
struct Staged {
  const AwiConfig* config = nullptr;
  NodeId embeddings = kNoNode;
  NodeId enc_w1 = kNoNode, enc_b1 = kNoNode, enc_w2 = kNoNode, enc_b2 = kNoNode;
  std::vector<NodeId> intent_rec, intent_in;
  std::vector<NodeId> dec_init, dec_rec, dec_layer_in;
  NodeId dec_token_in = kNoNode, dec_response_in = kNoNode;
  NodeId attn_query = kNoNode, attn_key = kNoNode, attn_score = kNoNode;
  std::vector<NodeId> gen_hidden;
  NodeId gen_context = kNoNode;
  NodeId sim_proj = kNoNode;
  std::vector<std::pair<std::string, NodeId>> order;  // matches AwiParams::named()
};

template <class T>
Staged<T> stage_params(Tape<T>& tape, const AwiParams& params) {
  Staged<T> s;
  s.config = &params.config;
  auto put = [&](const std::string& name, const Tensor<float>& t) {
    NodeId id = tape.input(t.template cast<T>());
    s.order.emplace_back(name, id);
    return id;
  };
  s.embeddings = put("embeddings", params.embeddings);
  s.enc_w1 = put("enc_w1", params.enc_w1);
  s.enc_b1 = put("enc_b1", params.enc_b1);
  s.enc_w2 = put("enc_w2", params.enc_w2);
  s.enc_b2 = put("enc_b2", params.enc_b2);
  for (size_t l = 0; l < params.intent_rec.size(); ++l) {
    s.intent_rec.push_back(put("intent_rec." + std::to_string(l), params.intent_rec[l]));
    s.intent_in.push_back(put("intent_in." + std::to_string(l), params.intent_in[l]));
  }
  for (size_t l = 0; l < params.dec_init.size(); ++l) {
    s.dec_init.push_back(put("dec_init." + std::to_string(l), params.dec_init[l]));
    s.dec_rec.push_back(put("dec_rec." + std::to_string(l), params.dec_rec[l]));
  }
  for (size_t l = 0; l < params.dec_layer_in.size(); ++l)
    s.dec_layer_in.push_back(put("dec_layer_in." + std::to_string(l), params.dec_layer_in[l]));
  s.dec_token_in = put("dec_token_in", params.dec_token_in);
  s.dec_response_in = put("dec_response_in", params.dec_response_in);
  s.attn_query = put("attn_query", params.attn_query);
  s.attn_key = put("attn_key", params.attn_key);
  s.attn_score = put("attn_score", params.attn_score);
  for (size_t l = 0; l < params.gen_hidden.size(); ++l)
    s.gen_hidden.push_back(put("gen_hidden." + std::to_string(l), params.gen_hidden[l]));
  s.gen_context = put("gen_context", params.gen_context);
  if (params.config.use_similarity_feature)
    s.sim_proj = put("sim_proj", params.sim_proj);
  return s;
}

// Stages externally supplied tensors in AwiParams::named() order, so the
// gradient checks can restage perturbed copies without a float round-trip.
template <class T>
Staged<T> stage_values(Tape<T>& tape, const AwiConfig& config,
                       const std::vector<Tensor<T>>& values) {
  Staged<T> s;
  s.config = &config;
  size_t next = 0;
  auto put = [&](const std::string& name) {
    if (next >= values.size())
      throw std::invalid_argument("stage_values: too few tensors at " + name);
    NodeId id = tape.input(values[next]);
    ++next;
    s.order.emplace_back(name, id);
    return id;
  };
  s.embeddings = put("embeddings");
  s.enc_w1 = put("enc_w1");
  s.enc_b1 = put("enc_b1");
  s.enc_w2 = put("enc_w2");
  s.enc_b2 = put("enc_b2");
  for (size_t l = 0; l < config.layers; ++l) {
    s.intent_rec.push_back(put("intent_rec." + std::to_string(l)));
    s.intent_in.push_back(put("intent_in." + std::to_string(l)));
  }
  for (size_t l = 0; l < config.layers; ++l) {
    s.dec_init.push_back(put("dec_init." + std::to_string(l)));
    s.dec_rec.push_back(put("dec_rec." + std::to_string(l)));
  }
  for (size_t l = 1; l < config.layers; ++l)
    s.dec_layer_in.push_back(put("dec_layer_in." + std::to_string(l - 1)));
  s.dec_token_in = put("dec_token_in");
  s.dec_response_in = put("dec_response_in");
  s.attn_query = put("attn_query");
  s.attn_key = put("attn_key");
  s.attn_score = put("attn_score");
  for (size_t l = 0; l < config.gen_layers(); ++l)
    s.gen_hidden.push_back(put("gen_hidden." + std::to_string(l)));
  s.gen_context = put("gen_context");
  if (config.use_similarity_feature) s.sim_proj = put("sim_proj");
  if (next != values.size())
    throw std::invalid_argument("stage_values: tensor count mismatch");
  return s;
}

// Per-turn context: encoder summary, updated intention stack, the source
// embedding rows and attention keys per dialogue, and the similarity bias.
template <class T>
struct TurnGraph {
  NodeId h_enc = kNoNode;     // B x d_x
  std::vector<NodeId> z;      // per layer, B x d_z
  NodeId sbar = kNoNode;      // B x V when the similarity feature is on
  std::vector<NodeId> x_rows;    // per dialogue, M_b x d_e
  std::vector<NodeId> att_keys;  // per dialogue, M_b x d_a
};

// mean source embedding per dialogue, stacked; empty token lists become
// zero rows (first-turn previous response)
template <class T>
NodeId build_unigram_rows(Tape<T>& tape, const Staged<T>& sp,
                          const std::vector<std::vector<int32_t>>& token_lists) {
  size_t d = sp.config->embed_dim;
  std::vector<NodeId> rows;
  rows.reserve(token_lists.size());
  for (const auto& ids : token_lists) {
    if (ids.empty()) {
      rows.push_back(tape.input(Tensor<T>::zeros({1, d})));
    } else {
      rows.push_back(tape.mean_rows(tape.embedding_lookup(sp.embeddings, ids)));
    }
  }
  return rows.size() == 1 ? rows[0] : tape.concat(rows, 0);
}

// encoder summary + attention inputs + similarity bias; no intention update
template <class T>
TurnGraph<T> build_encoder(Tape<T>& tape, const Staged<T>& sp,
                           const std::vector<std::vector<int32_t>>& user,
                           const std::vector<std::vector<int32_t>>& prev_agent) {
  for (const auto& ids : user)
    if (ids.empty()) throw std::invalid_argument("encode: empty source sequence");

  TurnGraph<T> g;
  NodeId u_cur = build_unigram_rows(tape, sp, user);
  NodeId u_prev = build_unigram_rows(tape, sp, prev_agent);
  NodeId joint = tape.concat({u_cur, u_prev}, 1);
  NodeId hidden = tape.tanh(tape.affine(joint, sp.enc_w1, sp.enc_b1));
  g.h_enc = tape.tanh(tape.affine(hidden, sp.enc_w2, sp.enc_b2));

  for (const auto& ids : user) {
    NodeId x = tape.embedding_lookup(sp.embeddings, ids);
    g.x_rows.push_back(x);
    g.att_keys.push_back(tape.affine(x, sp.attn_key));
  }

  if (sp.sim_proj != kNoNode) {
    std::vector<NodeId> rows;
    rows.reserve(user.size());
    for (const auto& ids : user)
      rows.push_back(tape.mean_rows(tape.embedding_lookup(sp.sim_proj, ids)));
    g.sbar = rows.size() == 1 ? rows[0] : tape.concat(rows, 0);
  }
  return g;
}

// stacked intention recurrence; empty z_prev stands for the zero state
template <class T>
std::vector<NodeId> build_intention(Tape<T>& tape, const Staged<T>& sp,
                                    const std::vector<NodeId>& z_prev, NodeId h_enc,
                                    size_t batch) {
  const AwiConfig& cfg = *sp.config;
  std::vector<NodeId> zp = z_prev;
  if (zp.empty())
    for (size_t l = 0; l < cfg.layers; ++l)
      zp.push_back(tape.input(Tensor<T>::zeros({batch, cfg.intention_dim})));
  std::vector<NodeId> z;
  NodeId below = h_enc;
  for (size_t l = 0; l < cfg.layers; ++l) {
    NodeId pre = tape.add(tape.affine(zp[l], sp.intent_rec[l]),
                          tape.affine(below, sp.intent_in[l]));
    NodeId zl = tape.tanh(pre);
    z.push_back(zl);
    below = zl;
  }
  return z;
}

template <class T>
TurnGraph<T> build_turn_context(Tape<T>& tape, const Staged<T>& sp,
                                const std::vector<std::vector<int32_t>>& user,
                                const std::vector<std::vector<int32_t>>& prev_agent,
                                const std::vector<NodeId>& z_prev) {
  TurnGraph<T> g = build_encoder(tape, sp, user, prev_agent);
  g.z = build_intention(tape, sp, z_prev, g.h_enc, user.size());
  return g;
}

template <class T>
std::vector<NodeId> build_decoder_init(Tape<T>& tape, const Staged<T>& sp, NodeId z_top) {
  std::vector<NodeId> h;
  for (size_t l = 0; l < sp.config->layers; ++l)
    h.push_back(tape.tanh(tape.affine(z_top, sp.dec_init[l])));
  return h;
}

// one attention read per dialogue, conditioned on that dialogue's row of
// the top-layer hidden state
template <class T>
NodeId build_attention_rows(Tape<T>& tape, const Staged<T>& sp, NodeId h_top,
                            const TurnGraph<T>& ctx, std::vector<NodeId>* weights_out) {
  size_t batch = ctx.x_rows.size();
  std::vector<NodeId> c_rows;
  c_rows.reserve(batch);
  for (size_t b = 0; b < batch; ++b) {
    NodeId q = tape.slice_rows(h_top, b, 1);
    NodeId qa = tape.affine(q, sp.attn_query);
    NodeId mix = tape.tanh(tape.add(ctx.att_keys[b], qa));
    NodeId scores = tape.affine(mix, sp.attn_score);
    size_t m = tape.value(scores).rows();
    NodeId w = tape.softmax_row(tape.reshape(scores, {1, m}));
    if (weights_out) weights_out->push_back(w);
    c_rows.push_back(tape.matmul(w, ctx.x_rows[b]));
  }
  return c_rows.size() == 1 ? c_rows[0] : tape.concat(c_rows, 0);
}

template <class T>
struct StepGraph {
  std::vector<NodeId> h;    // per layer, B x d_r
  NodeId r = kNoNode;       // top response vector, B x V
  NodeId probs = kNoNode;   // B x V
};

// One decoder step. y_prev holds the fed token per dialogue; r_prev is
// kNoNode at n=1 (r_0 = 0 contributes nothing and nothing flows back).
template <class T>
StepGraph<T> build_decoder_step(Tape<T>& tape, const Staged<T>& sp,
                                const std::vector<NodeId>& h_prev,
                                const std::vector<int32_t>& y_prev, NodeId r_prev,
                                const TurnGraph<T>& ctx) {
  const AwiConfig& cfg = *sp.config;
  StepGraph<T> out;

  NodeId token_in = tape.embedding_lookup(sp.dec_token_in, y_prev);
  NodeId pre = tape.add(tape.affine(h_prev[0], sp.dec_rec[0]), token_in);
  if (r_prev != kNoNode) pre = tape.add(pre, tape.affine(r_prev, sp.dec_response_in));
  out.h.push_back(tape.tanh(pre));
  for (size_t l = 1; l < cfg.layers; ++l) {
    NodeId p = tape.add(tape.affine(h_prev[l], sp.dec_rec[l]),
                        tape.affine(out.h[l - 1], sp.dec_layer_in[l - 1]));
    out.h.push_back(tape.tanh(p));
  }

  NodeId context = build_attention_rows(tape, sp, h_prev.back(), ctx, nullptr);

  NodeId g = tape.tanh(tape.add(tape.affine(out.h.back(), sp.gen_hidden[0]),
                                tape.affine(context, sp.gen_context)));
  for (size_t l = 1; l < cfg.gen_layers(); ++l)
    g = tape.tanh(tape.affine(g, sp.gen_hidden[l]));
  out.r = g;

  NodeId logits = ctx.sbar != kNoNode ? tape.add(out.r, ctx.sbar) : out.r;
  out.probs = tape.softmax_row(logits);
  return out;
}

// Teacher-forced loss over a whole batch of dialogues, intention state
// carried across turns inside the graph. turn_scale, when given, multiplies
// the padding mask per (turn, dialogue): the REINFORCE (r - b) factor and
// the ranking 1/length weights enter here.
template <class T>
struct BatchLossGraph {
  NodeId loss = kNoNode;
  double weighted_tokens = 0;  // sum of CE weights actually applied
  std::vector<std::vector<NodeId>> step_probs;  // [turn][step]
};

template <class T>
BatchLossGraph<T> build_batch_loss(Tape<T>& tape, const Staged<T>& sp, const Batch& batch,
                                   const std::vector<std::vector<double>>* turn_scale = nullptr) {
  BatchLossGraph<T> out;
  out.step_probs.resize(batch.turn_count);
  std::vector<NodeId> z;
  NodeId total = kNoNode;
  for (size_t t = 0; t < batch.turn_count; ++t) {
    const Batch::TurnSlice& slice = batch.turns[t];
    TurnGraph<T> ctx = build_turn_context(tape, sp, slice.user, slice.prev_agent, z);
    z = ctx.z;
    std::vector<NodeId> h = build_decoder_init(tape, sp, ctx.z.back());
    NodeId r_prev = kNoNode;
    size_t batch_n = batch.size();
    for (size_t n = 0; n < slice.max_target_len; ++n) {
      std::vector<int32_t> y_prev(batch_n);
      std::vector<int32_t> targets(batch_n);
      std::vector<double> weights(batch_n);
      for (size_t b = 0; b < batch_n; ++b) {
        y_prev[b] = n == 0 ? Vocabulary::kBos : slice.target_at(b, n - 1);
        targets[b] = slice.target_at(b, n);
        double w = slice.mask_at(b, n);
        if (turn_scale) w *= (*turn_scale)[t][b];
        weights[b] = w;
      }
      StepGraph<T> step = build_decoder_step(tape, sp, h, y_prev, r_prev, ctx);
      h = step.h;
      r_prev = step.r;
      out.step_probs[t].push_back(step.probs);
      for (double w : weights) out.weighted_tokens += w;
      NodeId ce = tape.cross_entropy_pick(step.probs, std::move(targets), std::move(weights));
      total = total == kNoNode ? ce : tape.add(total, ce);
    }
  }
  out.loss = total;
  return out;
}

}  // namespace awi
