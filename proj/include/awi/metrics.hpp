#pragma once

#include <string>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/model.hpp"
#include "awi/specificity.hpp"

namespace awi {

// ==== generation metrics ====

// Corpus-level BLEU with n-grams up to 4, clipped counts, brevity penalty,
// no smoothing. Any n-gram order with zero matches makes the score 0.
double bleu4(const std::vector<std::vector<std::string>>& hypotheses,
             const std::vector<std::vector<std::string>>& references);

// exp(mean per-token cross entropy) over all agent responses in the corpus.
double perplexity(const AwiParams& params, const Corpus& corpus, size_t batch_size = 16);

// Mean sentence specificity of a set of responses.
double mean_sentence_idf(const std::vector<std::vector<std::string>>& responses,
                         const IdfTable& idf);

}  // namespace awi
