#include "awi/specificity.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

namespace awi {

IdfTable IdfTable::build(const std::vector<Sentence>& documents) {
  if (documents.empty()) throw std::invalid_argument("build_idf: empty corpus");
  IdfTable t;
  t.n_ = documents.size();
  for (const Sentence& doc : documents) {
    std::set<std::string> seen(doc.begin(), doc.end());
    for (const std::string& w : seen) ++t.df_[w];
  }
  return t;
}

int64_t IdfTable::df(const std::string& word) const {
  auto it = df_.find(word);
  return it == df_.end() ? 1 : it->second;
}

double IdfTable::idf(const std::string& word) const {
  return std::log(double(n_) / double(df(word)));
}

void IdfTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write idf table: " + path);
  out << "N\t" << n_ << '\n';
  for (const auto& [word, df] : df_) out << word << '\t' << df << '\n';
}

IdfTable IdfTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open idf table: " + path);
  IdfTable t;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing tab");
    std::string key = line.substr(0, tab);
    int64_t value = std::stoll(line.substr(tab + 1));
    if (lineno == 1) {
      if (key != "N") throw std::runtime_error(path + ": first line must be the N header");
      t.n_ = size_t(value);
    } else {
      t.df_[key] = value;
    }
  }
  if (t.n_ == 0) throw std::runtime_error(path + ": empty or missing N header");
  return t;
}

double idf_sentence(const Sentence& tokens, const IdfTable& table) {
  if (tokens.empty()) return 0.0;
  double acc = 0.0;
  for (const std::string& w : tokens) acc += table.idf(w);
  return acc / double(tokens.size());
}

double idf_corpus(const std::vector<Sentence>& sentences, const IdfTable& table) {
  double acc = 0.0;
  size_t occurrences = 0;
  for (const Sentence& s : sentences)
    for (const std::string& w : s) {
      acc += table.idf(w);
      ++occurrences;
    }
  return occurrences == 0 ? 0.0 : acc / double(occurrences);
}

TfIdfVector tfidf_vector(const Sentence& context, const IdfTable& table) {
  std::map<std::string, double> counts;
  for (const std::string& w : context) counts[w] += 1.0;
  TfIdfVector v;
  for (const auto& [word, count] : counts) {
    double w = count * table.idf(word);
    if (w > 0.0) v[word] = w;
  }
  return v;
}

double cosine(const TfIdfVector& u, const TfIdfVector& v) {
  if (u.empty() || v.empty()) return 0.0;
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (const auto& [w, x] : u) {
    nu += x * x;
    auto it = v.find(w);
    if (it != v.end()) dot += x * it->second;
  }
  for (const auto& [w, x] : v) nv += x * x;
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

}  // namespace awi
