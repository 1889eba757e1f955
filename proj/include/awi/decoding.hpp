#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "awi/model.hpp"
#include "awi/specificity.hpp"

namespace awi {

struct Hypothesis {
  std::vector<int32_t> tokens;        // ends with eos unless cut at max_len
  std::vector<double> token_logps;    // raw model log-probs, one per token
  double total_logp = 0;
  std::map<std::string, double> aux;  // "idf", "backward-llk"

  size_t length() const { return tokens.size(); }
  double normalized() const {
    return tokens.empty() ? 0.0 : total_logp / double(tokens.size());
  }
};

struct NBestList {
  std::string turn_id;
  std::vector<Hypothesis> hyps;  // sorted by descending primary score
};

// The unknown token is never emitted: its probability is zeroed out of the
// selection distribution. Recorded log-probs stay the raw model values so
// hypothesis scores are comparable with normalized_llk.
Hypothesis greedy_decode(const AwiParams& params, const AwiState& state,
                         const std::vector<int32_t>& source,
                         const std::vector<int32_t>& prev_response, size_t max_len = 50);

NBestList beam_search(const AwiParams& params, const AwiState& state,
                      const std::vector<int32_t>& source,
                      const std::vector<int32_t>& prev_response, size_t width,
                      size_t max_len = 50);

Hypothesis sample_decode(const AwiParams& params, const AwiState& state,
                         const std::vector<int32_t>& source,
                         const std::vector<int32_t>& prev_response, size_t max_len,
                         Rng& rng);

// primary score becomes normalized llk + weight * aux[kind]; stable resort
NBestList rerank(const NBestList& nbest, double weight, const std::string& score_kind);

// length-normalized llk of `source_tokens` (plus eos) given the response,
// under a model trained on the swapped corpus
double backward_score(const AwiParams& backward_params,
                      const std::vector<int32_t>& response_surface,
                      const std::vector<int32_t>& source_tokens);

// grid search maximizing corpus BLEU of the reranked top-1s; ties toward
// the smaller weight
double mert_tune(const std::vector<NBestList>& dev_lists,
                 const std::vector<std::vector<std::string>>& references,
                 const std::vector<double>& grid, const std::string& score_kind,
                 const Vocabulary& vocab);

std::vector<double> mert_grid(double lo = 0.0, double hi = 0.5, double step = 0.005);

// "turn-id ||| tokens ||| llk ||| idf ||| backward-llk"
std::string nbest_dump_line(const NBestList& list, const Hypothesis& hyp,
                            const Vocabulary& vocab);

}  // namespace awi
