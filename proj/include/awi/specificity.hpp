#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace awi {

// Token multiset of one sentence/response in surface form.
using Sentence = std::vector<std::string>;

// idf(w) = ln(N / df(w)); words never seen in a document fall back to
// df = 1, treating them as maximally specific.
class IdfTable {
 public:
  static IdfTable build(const std::vector<Sentence>& documents);

  size_t document_count() const { return n_; }
  int64_t df(const std::string& word) const;
  double idf(const std::string& word) const;

  void save(const std::string& path) const;
  static IdfTable load(const std::string& path);

 private:
  size_t n_ = 0;
  std::map<std::string, int64_t> df_;
};

// mean per-occurrence idf; empty sentence scores 0
double idf_sentence(const Sentence& tokens, const IdfTable& table);

// occurrence-weighted: total idf mass over total token occurrences
double idf_corpus(const std::vector<Sentence>& sentences, const IdfTable& table);

// sparse word -> count * idf, zero-weight entries dropped
using TfIdfVector = std::map<std::string, double>;

TfIdfVector tfidf_vector(const Sentence& context, const IdfTable& table);

double cosine(const TfIdfVector& u, const TfIdfVector& v);

}  // namespace awi
