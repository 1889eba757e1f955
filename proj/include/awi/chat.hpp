#pragma once

#include <string>
#include <vector>

#include "awi/config.hpp"
#include "awi/corpus.hpp"
#include "awi/model.hpp"
#include "awi/rng.hpp"
#include "awi/specificity.hpp"

namespace awi {

// One interactive conversation. Intention state advances turn by turn with
// the model's own responses fed back as the previous-response input, so a
// session transcript replays exactly through batch generation.
class ChatSession {
 public:
  ChatSession(const AwiParams& params, const Vocabulary& vocab, const IdfTable* idf,
              const DecodeConfig& decode, uint64_t seed);

  struct Reply {
    std::string text;
    bool reset = false;
    bool quit = false;
  };

  // Handles "/reset" and "/quit"; any other line is a user turn.
  Reply respond(const std::string& line);

  void reset();

  // All exchanges so far as a replayable corpus, one dialogue per reset
  // segment.
  const RawCorpus& transcript() const { return transcript_; }

 private:
  const AwiParams& params_;
  const Vocabulary& vocab_;
  const IdfTable* idf_;
  DecodeConfig decode_;
  Rng rng_;
  AwiState state_;
  std::vector<int32_t> prev_agent_;
  RawCorpus transcript_;
  size_t segment_ = 0;
  bool segment_open_ = false;

  std::vector<int32_t> generate(const std::vector<int32_t>& source);
};

}  // namespace awi
