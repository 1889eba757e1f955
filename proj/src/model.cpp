#include "awi/model.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "awi/rng.hpp"

namespace awi {

// ==== config and parameters ====

void AwiConfig::validate() const {
  if (vocab < 5) throw std::invalid_argument("config: vocab must cover reserved ids");
  if (!embed_dim || !encoder_dim || !intention_dim || !decoder_dim || !align_dim ||
      !layers)
    throw std::invalid_argument("config: zero dimension");
}

AwiConfig AwiConfig::desk(size_t vocab) {
  AwiConfig c;
  c.vocab = vocab;
  c.embed_dim = 24;
  c.encoder_dim = 48;
  c.intention_dim = 24;
  c.decoder_dim = 48;
  c.align_dim = 12;
  c.layers = 2;
  c.generation_layers = 1;
  c.use_similarity_feature = true;
  return c;
}

AwiConfig AwiConfig::tiny(size_t vocab) {
  AwiConfig c;
  c.vocab = vocab;
  c.embed_dim = 4;
  c.encoder_dim = 6;
  c.intention_dim = 3;
  c.decoder_dim = 5;
  c.align_dim = 2;
  c.layers = 2;
  c.generation_layers = 0;
  c.use_similarity_feature = true;
  return c;
}

static AwiParams make_shaped(const AwiConfig& cfg) {
  cfg.validate();
  size_t V = cfg.vocab, de = cfg.embed_dim, dx = cfg.encoder_dim;
  size_t dz = cfg.intention_dim, dr = cfg.decoder_dim, da = cfg.align_dim;
  AwiParams p;
  p.config = cfg;
  p.embeddings = Tensor<float>::zeros({V, de});
  p.enc_w1 = Tensor<float>::zeros({dx, 2 * de});
  p.enc_b1 = Tensor<float>::zeros({1, dx});
  p.enc_w2 = Tensor<float>::zeros({dx, dx});
  p.enc_b2 = Tensor<float>::zeros({1, dx});
  for (size_t l = 0; l < cfg.layers; ++l) {
    p.intent_rec.push_back(Tensor<float>::zeros({dz, dz}));
    p.intent_in.push_back(Tensor<float>::zeros({dz, l == 0 ? dx : dz}));
    p.dec_init.push_back(Tensor<float>::zeros({dr, dz}));
    p.dec_rec.push_back(Tensor<float>::zeros({dr, dr}));
  }
  for (size_t l = 1; l < cfg.layers; ++l)
    p.dec_layer_in.push_back(Tensor<float>::zeros({dr, dr}));
  p.dec_token_in = Tensor<float>::zeros({V, dr});
  p.dec_response_in = Tensor<float>::zeros({dr, V});
  p.attn_query = Tensor<float>::zeros({da, dr});
  p.attn_key = Tensor<float>::zeros({da, de});
  p.attn_score = Tensor<float>::zeros({1, da});
  for (size_t l = 0; l < cfg.gen_layers(); ++l)
    p.gen_hidden.push_back(Tensor<float>::zeros({V, l == 0 ? dr : V}));
  p.gen_context = Tensor<float>::zeros({V, de});
  if (cfg.use_similarity_feature) p.sim_proj = Tensor<float>::zeros({V, V});
  return p;
}

AwiParams AwiParams::init(const AwiConfig& cfg, uint64_t seed) {
  AwiParams p = make_shaped(cfg);
  Rng rng(seed);
  for (auto& [name, tensor] : p.named()) {
    if (name == "enc_b1" || name == "enc_b2") continue;  // biases stay zero
    double a = 1.0 / double(tensor->cols());
    for (float& v : tensor->data) v = float(rng.uniform(-a, a));
  }
  return p;
}

std::vector<std::pair<std::string, Tensor<float>*>> AwiParams::named() {
  std::vector<std::pair<std::string, Tensor<float>*>> out;
  out.emplace_back("embeddings", &embeddings);
  out.emplace_back("enc_w1", &enc_w1);
  out.emplace_back("enc_b1", &enc_b1);
  out.emplace_back("enc_w2", &enc_w2);
  out.emplace_back("enc_b2", &enc_b2);
  for (size_t l = 0; l < intent_rec.size(); ++l) {
    out.emplace_back("intent_rec." + std::to_string(l), &intent_rec[l]);
    out.emplace_back("intent_in." + std::to_string(l), &intent_in[l]);
  }
  for (size_t l = 0; l < dec_init.size(); ++l) {
    out.emplace_back("dec_init." + std::to_string(l), &dec_init[l]);
    out.emplace_back("dec_rec." + std::to_string(l), &dec_rec[l]);
  }
  for (size_t l = 0; l < dec_layer_in.size(); ++l)
    out.emplace_back("dec_layer_in." + std::to_string(l), &dec_layer_in[l]);
  out.emplace_back("dec_token_in", &dec_token_in);
  out.emplace_back("dec_response_in", &dec_response_in);
  out.emplace_back("attn_query", &attn_query);
  out.emplace_back("attn_key", &attn_key);
  out.emplace_back("attn_score", &attn_score);
  for (size_t l = 0; l < gen_hidden.size(); ++l)
    out.emplace_back("gen_hidden." + std::to_string(l), &gen_hidden[l]);
  out.emplace_back("gen_context", &gen_context);
  if (config.use_similarity_feature) out.emplace_back("sim_proj", &sim_proj);
  return out;
}

std::vector<std::pair<std::string, const Tensor<float>*>> AwiParams::named() const {
  auto mut = const_cast<AwiParams*>(this)->named();
  std::vector<std::pair<std::string, const Tensor<float>*>> out;
  out.reserve(mut.size());
  for (auto& [n, t] : mut) out.emplace_back(n, t);
  return out;
}

size_t AwiParams::weight_count() const {
  size_t n = 0;
  for (auto& [name, t] : named()) n += t->size();
  return n;
}

// ==== state and single-dialogue ops ====

AwiState AwiState::zero(const AwiConfig& cfg) {
  AwiState s;
  s.z.assign(cfg.layers, std::vector<float>(cfg.intention_dim, 0.0f));
  return s;
}

static std::vector<NodeId> stage_state(Tape<float>& tape, const AwiState& state) {
  std::vector<NodeId> z;
  z.reserve(state.z.size());
  for (const auto& layer : state.z)
    z.push_back(tape.input(Tensor<float>::from({1, layer.size()}, layer)));
  return z;
}

static std::vector<float> row_of(const Tensor<float>& t) {
  return std::vector<float>(t.data.begin(), t.data.end());
}

EncodedTurn encode_turn(const AwiParams& params, const std::vector<int32_t>& source,
                        const std::vector<int32_t>& prev_response) {
  Tape<float> tape;
  Staged<float> sp = stage_params(tape, params);
  TurnGraph<float> g = build_encoder(tape, sp, {source}, {prev_response});
  EncodedTurn out;
  out.h_enc = row_of(tape.value(g.h_enc));
  out.x_seq = tape.value(g.x_rows[0]);
  if (g.sbar != kNoNode) out.sbar = row_of(tape.value(g.sbar));
  return out;
}

AwiState intention_step(const AwiParams& params, const AwiState& state,
                        const EncodedTurn& encoded) {
  if (state.z.size() != params.config.layers)
    throw std::invalid_argument("intention_step: state layer count mismatch");
  Tape<float> tape;
  Staged<float> sp = stage_params(tape, params);
  NodeId h_enc = tape.input(Tensor<float>::from({1, encoded.h_enc.size()}, encoded.h_enc));
  std::vector<NodeId> z = build_intention(tape, sp, stage_state(tape, state), h_enc, 1);
  AwiState next;
  next.turn = state.turn + 1;
  for (NodeId zl : z) next.z.push_back(row_of(tape.value(zl)));
  return next;
}

std::vector<std::vector<float>> init_decoder(const AwiParams& params,
                                             const AwiState& state) {
  Tape<float> tape;
  Staged<float> sp = stage_params(tape, params);
  NodeId z_top = tape.input(Tensor<float>::from({1, state.z.back().size()}, state.z.back()));
  std::vector<std::vector<float>> h;
  for (NodeId hl : build_decoder_init(tape, sp, z_top)) h.push_back(row_of(tape.value(hl)));
  return h;
}

AttentionOut attention(const AwiParams& params, const std::vector<float>& h_prev,
                       const Tensor<float>& x_seq) {
  Tape<float> tape;
  Staged<float> sp = stage_params(tape, params);
  TurnGraph<float> ctx;
  ctx.x_rows.push_back(tape.input(x_seq));
  ctx.att_keys.push_back(tape.affine(ctx.x_rows[0], sp.attn_key));
  NodeId h = tape.input(Tensor<float>::from({1, h_prev.size()}, h_prev));
  std::vector<NodeId> weights;
  NodeId c = build_attention_rows(tape, sp, h, ctx, &weights);
  return {row_of(tape.value(weights[0])), row_of(tape.value(c))};
}

DecoderStepOut decoder_step(const AwiParams& params,
                            const std::vector<std::vector<float>>& h_prev,
                            int32_t y_prev, const std::vector<float>& r_prev,
                            const EncodedTurn& encoded) {
  Tape<float> tape;
  Staged<float> sp = stage_params(tape, params);
  TurnGraph<float> ctx;
  ctx.x_rows.push_back(tape.input(encoded.x_seq));
  ctx.att_keys.push_back(tape.affine(ctx.x_rows[0], sp.attn_key));
  if (!encoded.sbar.empty())
    ctx.sbar = tape.input(Tensor<float>::from({1, encoded.sbar.size()}, encoded.sbar));
  std::vector<NodeId> h;
  for (const auto& layer : h_prev)
    h.push_back(tape.input(Tensor<float>::from({1, layer.size()}, layer)));
  NodeId r = r_prev.empty()
                 ? kNoNode
                 : tape.input(Tensor<float>::from({1, r_prev.size()}, r_prev));
  StepGraph<float> step = build_decoder_step(tape, sp, h, {y_prev}, r, ctx);
  DecoderStepOut out;
  for (NodeId hl : step.h) out.h.push_back(row_of(tape.value(hl)));
  out.r = row_of(tape.value(step.r));
  out.p = row_of(tape.value(step.probs));
  return out;
}

// ==== turn context ====

TurnContext::TurnContext(const AwiParams& params, const AwiState& state,
                         const std::vector<int32_t>& source,
                         const std::vector<int32_t>& prev_response)
    : params_(&params) {
  if (state.z.size() != params.config.layers)
    throw std::invalid_argument("turn: state layer count mismatch");
  staged_ = stage_params(tape_, params);
  ctx_ = build_encoder(tape_, staged_, {source}, {prev_response});
  ctx_.z = build_intention(tape_, staged_, stage_state(tape_, state), ctx_.h_enc, 1);
  h0_ = build_decoder_init(tape_, staged_, ctx_.z.back());
  advanced_.turn = state.turn + 1;
  for (NodeId zl : ctx_.z) advanced_.z.push_back(row_of(tape_.value(zl)));
}

TurnContext::Cursor TurnContext::start() {
  Cursor c;
  c.h = h0_;
  c.r = kNoNode;
  return c;
}

std::pair<TurnContext::Cursor, std::vector<float>> TurnContext::step(const Cursor& at,
                                                                     int32_t y_prev) {
  StepGraph<float> step = build_decoder_step(tape_, staged_, at.h, {y_prev}, at.r, ctx_);
  Cursor next;
  next.h = step.h;
  next.r = step.r;
  return {next, row_of(tape_.value(step.probs))};
}

TurnScore TurnContext::score(const std::vector<int32_t>& target) {
  if (target.empty()) throw std::invalid_argument("score: empty target");
  TurnScore out;
  Cursor at = start();
  int32_t prev = Vocabulary::kBos;
  for (int32_t tok : target) {
    auto [next, probs] = step(at, prev);
    if (tok < 0 || size_t(tok) >= probs.size())
      throw std::out_of_range("score: target id outside vocabulary");
    double lp = std::log(double(probs[size_t(tok)]));
    out.per_token.push_back(lp);
    out.total += lp;
    at = next;
    prev = tok;
  }
  return out;
}

TurnScore turn_log_likelihood(const AwiParams& params, const AwiState& state,
                              const std::vector<int32_t>& source,
                              const std::vector<int32_t>& prev_response,
                              const std::vector<int32_t>& target, AwiState* advanced) {
  if (target.empty() || target.back() != Vocabulary::kEos)
    throw std::invalid_argument("turn_log_likelihood: target must end with eos");
  TurnContext turn(params, state, source, prev_response);
  if (advanced) *advanced = turn.advanced_state();
  return turn.score(target);
}

double normalized_llk(const AwiParams& params, const AwiState& state,
                      const std::vector<int32_t>& source,
                      const std::vector<int32_t>& prev_response,
                      const std::vector<int32_t>& candidate, AwiState* advanced) {
  if (candidate.empty()) throw std::invalid_argument("normalized_llk: empty candidate");
  TurnContext turn(params, state, source, prev_response);
  if (advanced) *advanced = turn.advanced_state();
  return turn.score(candidate).total / double(candidate.size());
}

// ==== corpus-level helpers ====

std::vector<std::string> export_intention(const AwiParams& params, const Corpus& corpus) {
  std::vector<std::string> lines;
  for (const Dialogue& d : corpus) {
    AwiState state = AwiState::zero(params.config);
    for (size_t t = 0; t < d.turns.size(); ++t) {
      const std::vector<int32_t>& prev =
          t == 0 ? std::vector<int32_t>{} : d.turns[t - 1].agent;
      EncodedTurn enc = encode_turn(params, d.turns[t].user, prev);
      state = intention_step(params, state, enc);
      std::string line = d.id + "\t" + std::to_string(t + 1) + "\t";
      char buf[32];
      const auto& top = state.z.back();
      for (size_t j = 0; j < top.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.6g", double(top[j]));
        if (j) line += ' ';
        line += buf;
      }
      lines.push_back(std::move(line));
    }
  }
  return lines;
}

CorpusXent corpus_xent(const AwiParams& params, const Corpus& corpus, size_t batch_size) {
  CorpusXent acc;
  for (const Batch& batch : batch_by_turns(corpus, batch_size, 0)) {
    Tape<float> tape;
    Staged<float> sp = stage_params(tape, params);
    BatchLossGraph<float> g = build_batch_loss(tape, sp, batch);
    acc.total_ce += double(tape.value(g.loss).data[0]);
    acc.tokens += g.weighted_tokens;
  }
  return acc;
}

}  // namespace awi
