#pragma once

#include <cstdint>

#include "awi/corpus.hpp"

namespace awi {

struct SynthConfig {
  size_t n_dialogues = 1000;
  uint64_t seed = 7;
  // chance that a resolution turn names the concrete fix (url + product)
  // instead of a filler acknowledgement
  double specific_prob = 0.55;
  size_t n_error_codes = 60;
  size_t n_kb_pages = 48;
};

// Deterministic scripted helpdesk dialogues, 1-8 turns. The turn-4 fix and
// the turn-5 follow-up depend on the product/issue/error-code slots named
// turns earlier while the immediately preceding user turn is contentless,
// which is what gives the intention state something to carry. Error codes
// and kb urls are rare single tokens, so response IDF spreads widely.
RawCorpus synth_generate(const SynthConfig& cfg);

// distinct agent-side template count (before slot filling)
size_t synth_template_count();

}  // namespace awi
