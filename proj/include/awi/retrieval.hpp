#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/model.hpp"
#include "awi/specificity.hpp"

namespace awi {

// ==== candidate-set construction ====

struct RetrievalTurn {
  std::vector<std::string> user;
  std::vector<std::string> agent;  // empty on the final (query) turn
};

struct RetrievalInstance {
  std::string id;
  std::vector<std::string> context;  // all history tokens incl. current user input
  std::vector<std::vector<std::string>> candidates;
  size_t positive_index = 0;
  std::vector<RetrievalTurn> turns;  // structured history; may be empty when loaded
                                     // from a flat file, then context acts as a
                                     // single user turn
};

// One instance per agent turn: the true response plus uniformly sampled
// negatives from other dialogues, deduplicated against the positive text.
std::vector<RetrievalInstance> build_instances(const RawCorpus& corpus,
                                               size_t n_candidates = 10,
                                               uint64_t seed = 1);

void write_instances_file(const std::string& path,
                          const std::vector<RetrievalInstance>& instances);
std::vector<RetrievalInstance> read_instances_file(const std::string& path);

// ==== scoring and ranking ====

enum class RetrieveMode { tfidf, awi, interpolated };
RetrieveMode parse_retrieve_mode(const std::string& name);

// Cosine between the TF-IDF vectors of context and each candidate.
std::vector<double> candidate_cosines(const RetrievalInstance& instance,
                                      const IdfTable& idf);

// Length-normalized log-likelihood of each candidate as the next response,
// with intention state replayed over the structured history.
std::vector<double> candidate_llks(const RetrievalInstance& instance,
                                   const AwiParams& params, const Vocabulary& vocab);

// Candidate indices, best first. tfidf ranks by cosine, awi by llk,
// interpolated by llk + weight * cosine. Ties keep the smaller index.
std::vector<size_t> rank_candidates(RetrieveMode mode,
                                    const std::vector<double>& cosines,
                                    const std::vector<double>& llks, double weight);

std::vector<size_t> retrieve(const RetrievalInstance& instance, RetrieveMode mode,
                             const IdfTable& idf, const AwiParams* params,
                             const Vocabulary* vocab, double weight = 0.0);

// ==== evaluation ====

double recall_at_k(const std::vector<std::vector<size_t>>& rankings,
                   const std::vector<size_t>& positive_indices, size_t k);

std::map<size_t, double> recall_rates(const std::vector<RetrievalInstance>& instances,
                                      RetrieveMode mode, const IdfTable& idf,
                                      const AwiParams* params, const Vocabulary* vocab,
                                      double weight, const std::vector<size_t>& ks);

// Grid search maximizing dev R@1, breaking ties by R@5 and then by the
// smaller weight.
double tune_retrieval_weight(const std::vector<RetrievalInstance>& instances,
                             const AwiParams& params, const Vocabulary& vocab,
                             const IdfTable& idf, const std::vector<double>& grid);

}  // namespace awi
