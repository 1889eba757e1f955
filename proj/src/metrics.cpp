#include "awi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace awi {

namespace {

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> gram(tokens.begin() + i, tokens.begin() + i + n);
    counts[gram] += 1;
  }
  return counts;
}

}  // namespace

double bleu4(const std::vector<std::vector<std::string>>& hypotheses,
             const std::vector<std::vector<std::string>>& references) {
  if (hypotheses.size() != references.size())
    throw std::invalid_argument("bleu4: hypothesis/reference count mismatch");
  if (hypotheses.empty()) throw std::invalid_argument("bleu4: empty corpus");

  size_t hyp_len = 0, ref_len = 0;
  size_t matched[4] = {0, 0, 0, 0};
  size_t total[4] = {0, 0, 0, 0};
  for (size_t s = 0; s < hypotheses.size(); ++s) {
    hyp_len += hypotheses[s].size();
    ref_len += references[s].size();
    for (size_t n = 1; n <= 4; ++n) {
      NgramCounts hyp = count_ngrams(hypotheses[s], n);
      NgramCounts ref = count_ngrams(references[s], n);
      for (const auto& [gram, count] : hyp) {
        total[n - 1] += count;
        auto it = ref.find(gram);
        if (it != ref.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_prec = 0.0;
  for (size_t n = 0; n < 4; ++n) {
    if (total[n] == 0 || matched[n] == 0) return 0.0;
    log_prec += std::log(double(matched[n]) / double(total[n]));
  }
  double bp = hyp_len >= ref_len
                  ? 1.0
                  : std::exp(1.0 - double(ref_len) / double(hyp_len));
  return bp * std::exp(0.25 * log_prec);
}

double perplexity(const AwiParams& params, const Corpus& corpus, size_t batch_size) {
  CorpusXent xent = corpus_xent(params, corpus, batch_size);
  if (xent.tokens == 0) throw std::invalid_argument("perplexity: corpus has no target tokens");
  return std::exp(xent.total_ce / double(xent.tokens));
}

double mean_sentence_idf(const std::vector<std::vector<std::string>>& responses,
                         const IdfTable& idf) {
  if (responses.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : responses) sum += idf_sentence(r, idf);
  return sum / double(responses.size());
}

}  // namespace awi
