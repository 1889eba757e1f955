#include "awi/chat.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "awi/decoding.hpp"

namespace awi {

ChatSession::ChatSession(const AwiParams& params, const Vocabulary& vocab,
                         const IdfTable* idf, const DecodeConfig& decode,
                         uint64_t seed)
    : params_(params),
      vocab_(vocab),
      idf_(idf),
      decode_(decode),
      rng_(seed),
      state_(AwiState::zero(params.config)) {
  if (decode_.rerank_idf != 0.0 && !idf_)
    throw std::invalid_argument("chat: idf reranking requested without an idf table");
}

void ChatSession::reset() {
  state_ = AwiState::zero(params_.config);
  prev_agent_.clear();
  segment_open_ = false;
}

std::vector<int32_t> ChatSession::generate(const std::vector<int32_t>& source) {
  if (decode_.sample) {
    return sample_decode(params_, state_, source, prev_agent_, decode_.max_len, rng_)
        .tokens;
  }
  if (decode_.rerank_idf != 0.0) {
    size_t width = std::max<size_t>(decode_.beam_width, 8);
    NBestList nbest = beam_search(params_, state_, source, prev_agent_, width,
                                  decode_.max_len);
    for (Hypothesis& h : nbest.hyps)
      h.aux["idf"] = idf_sentence(vocab_.surface(h.tokens), *idf_);
    return rerank(nbest, decode_.rerank_idf, "idf").hyps.front().tokens;
  }
  if (decode_.beam_width > 1) {
    return beam_search(params_, state_, source, prev_agent_, decode_.beam_width,
                       decode_.max_len)
        .hyps.front()
        .tokens;
  }
  return greedy_decode(params_, state_, source, prev_agent_, decode_.max_len).tokens;
}

ChatSession::Reply ChatSession::respond(const std::string& line) {
  if (line == "/quit") return {"", false, true};
  if (line == "/reset") {
    reset();
    return {"", true, false};
  }

  std::vector<int32_t> source = vocab_.encode(tokenize(line));
  if (source.empty()) source.push_back(Vocabulary::kEos);

  std::vector<int32_t> response = generate(source);
  std::string text = detokenize(vocab_.surface(response));

  // state advances only after a successful decode
  EncodedTurn enc = encode_turn(params_, source, prev_agent_);
  state_ = intention_step(params_, state_, enc);
  prev_agent_ = response;
  // target-form convention: the fed-back response ends with eos even when
  // the decode was truncated, so transcripts replay identically
  if (prev_agent_.empty() || prev_agent_.back() != Vocabulary::kEos)
    prev_agent_.push_back(Vocabulary::kEos);

  if (!segment_open_) {
    char id[32];
    std::snprintf(id, sizeof id, "chat-%03zu", segment_);
    transcript_.push_back({id, {}});
    ++segment_;
    segment_open_ = true;
  }
  transcript_.back().turns.push_back({line, text});
  return {text, false, false};
}

}  // namespace awi
