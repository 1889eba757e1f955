#pragma once

#include <optional>
#include <string>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/model_graph.hpp"
#include "awi/model_types.hpp"

namespace awi {

// Per-dialogue intention state. Starts at zero, advances once per turn.
struct AwiState {
  std::vector<std::vector<float>> z;  // per layer, intention_dim wide
  size_t turn = 0;

  static AwiState zero(const AwiConfig& cfg);
};

struct EncodedTurn {
  std::vector<float> h_enc;   // encoder summary
  Tensor<float> x_seq;        // M x d_e source embeddings
  std::vector<float> sbar;    // V-wide similarity bias, empty when disabled
};

EncodedTurn encode_turn(const AwiParams& params, const std::vector<int32_t>& source,
                        const std::vector<int32_t>& prev_response);

AwiState intention_step(const AwiParams& params, const AwiState& state,
                        const EncodedTurn& encoded);

// decoder start hiddens for the current turn (state already advanced)
std::vector<std::vector<float>> init_decoder(const AwiParams& params,
                                             const AwiState& state);

struct AttentionOut {
  std::vector<float> weights;
  std::vector<float> context;
};
AttentionOut attention(const AwiParams& params, const std::vector<float>& h_prev,
                       const Tensor<float>& x_seq);

struct DecoderStepOut {
  std::vector<std::vector<float>> h;
  std::vector<float> r;
  std::vector<float> p;
};
// r_prev empty means the zero response vector of the first step
DecoderStepOut decoder_step(const AwiParams& params,
                            const std::vector<std::vector<float>>& h_prev,
                            int32_t y_prev, const std::vector<float>& r_prev,
                            const EncodedTurn& encoded);

struct TurnScore {
  double total = 0;                // sum of per-token log-probs, <= 0
  std::vector<double> per_token;
};

// Teacher-forced log-likelihood of `target` for the turn entered from
// `state` (state itself is not modified; `advanced` receives the
// post-turn intention state when non-null).
TurnScore turn_log_likelihood(const AwiParams& params, const AwiState& state,
                              const std::vector<int32_t>& source,
                              const std::vector<int32_t>& prev_response,
                              const std::vector<int32_t>& target,
                              AwiState* advanced = nullptr);

double normalized_llk(const AwiParams& params, const AwiState& state,
                      const std::vector<int32_t>& source,
                      const std::vector<int32_t>& prev_response,
                      const std::vector<int32_t>& candidate,
                      AwiState* advanced = nullptr);

// One turn pinned to a tape so decoders can branch cheaply: the encoder,
// intention update and attention precomputation are built once, then each
// hypothesis extends its own chain of step nodes.
class TurnContext {
 public:
  TurnContext(const AwiParams& params, const AwiState& state,
              const std::vector<int32_t>& source,
              const std::vector<int32_t>& prev_response);

  struct Cursor {
    std::vector<NodeId> h;
    NodeId r = kNoNode;
  };

  Cursor start();
  // feed the previous token, advance one step; returns the new cursor and
  // the full output distribution
  std::pair<Cursor, std::vector<float>> step(const Cursor& at, int32_t y_prev);

  TurnScore score(const std::vector<int32_t>& target);

  const AwiState& advanced_state() const { return advanced_; }
  size_t vocab() const { return params_->config.vocab; }

 private:
  const AwiParams* params_;
  Tape<float> tape_;
  Staged<float> staged_;
  TurnGraph<float> ctx_;
  std::vector<NodeId> h0_;
  AwiState advanced_;
};

// text lines "dialogue-id<TAB>turn<TAB>z1 z2 ...", one per turn
std::vector<std::string> export_intention(const AwiParams& params, const Corpus& corpus);

// total teacher-forced cross-entropy and token count over a corpus,
// batched; the perplexity metric and the lr schedule sit on top of this
struct CorpusXent {
  double total_ce = 0;
  double tokens = 0;
};
CorpusXent corpus_xent(const AwiParams& params, const Corpus& corpus, size_t batch_size);

// ==== checkpoints ====

void save_checkpoint(const std::string& path, const AwiParams& params,
                     uint64_t vocab_checksum);
AwiParams load_checkpoint(const std::string& path, uint64_t* vocab_checksum = nullptr);

}  // namespace awi
