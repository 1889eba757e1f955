#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "awi/tensor.hpp"

namespace awi {

struct AwiConfig {
  size_t vocab = 0;
  size_t embed_dim = 300;      // word embedding width
  size_t encoder_dim = 1000;   // encoder feed-forward output
  size_t intention_dim = 300;  // per-turn intention state
  size_t decoder_dim = 1000;   // decoder recurrent hidden
  size_t align_dim = 100;      // attention scoring space
  size_t layers = 2;           // stack depth for intention and decoder
  // 0 follows `layers`; desk preset uses 1 because extra generation layers
  // are vocab x vocab matrices and dominate cpu cost
  size_t generation_layers = 0;
  bool use_similarity_feature = true;

  size_t gen_layers() const { return generation_layers ? generation_layers : layers; }
  void validate() const;

  static AwiConfig desk(size_t vocab);
  static AwiConfig tiny(size_t vocab);  // unit-test scale
};

// Every weight matrix of the architecture. Stored row-major with row-vector
// activations; matrices that multiply one-hot vectors (token feedback, the
// similarity projection) are stored transposed so a row lookup does the
// multiply.
struct AwiParams {
  AwiConfig config;

  Tensor<float> embeddings;                      // V x d_e
  Tensor<float> enc_w1, enc_b1, enc_w2, enc_b2;  // encoder feed-forward
  std::vector<Tensor<float>> intent_rec;         // d_z x d_z per layer
  std::vector<Tensor<float>> intent_in;          // d_z x d_x, then d_z x d_z
  std::vector<Tensor<float>> dec_init;           // d_r x d_z per layer
  std::vector<Tensor<float>> dec_rec;            // d_r x d_r per layer
  std::vector<Tensor<float>> dec_layer_in;       // d_r x d_r, layers-1 of them
  Tensor<float> dec_token_in;                    // V x d_r (transposed token matrix)
  Tensor<float> dec_response_in;                 // d_r x V
  Tensor<float> attn_query;                      // d_a x d_r
  Tensor<float> attn_key;                        // d_a x d_e
  Tensor<float> attn_score;                      // 1 x d_a
  std::vector<Tensor<float>> gen_hidden;         // V x d_r, then V x V
  Tensor<float> gen_context;                     // V x d_e
  Tensor<float> sim_proj;                        // V x V (transposed), optional

  static AwiParams init(const AwiConfig& cfg, uint64_t seed);

  // fixed registration order shared with staging, the optimizer and the
  // checkpoint directory
  std::vector<std::pair<std::string, Tensor<float>*>> named();
  std::vector<std::pair<std::string, const Tensor<float>*>> named() const;
  size_t weight_count() const;
};

}  // namespace awi
