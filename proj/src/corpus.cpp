#include "awi/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "awi/rng.hpp"
#include "json.hpp"

namespace awi {

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// ==== tokenization ====

static bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string word;
  while (in >> word) {
    for (char& c : word) c = char(std::tolower(static_cast<unsigned char>(c)));
    std::vector<std::string> lead, trail;
    size_t b = 0, e = word.size();
    while (b < e && is_punct(word[b])) lead.push_back(std::string(1, word[b++]));
    while (e > b && is_punct(word[e - 1])) trail.push_back(std::string(1, word[--e]));
    for (auto& p : lead) out.push_back(std::move(p));
    if (e > b) out.push_back(word.substr(b, e - b));
    for (auto it = trail.rbegin(); it != trail.rend(); ++it) out.push_back(std::move(*it));
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// ==== corpus files ====

RawCorpus read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  RawCorpus corpus;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RawDialogue d;
    d.id = j.at("id").get<std::string>();
    for (const auto& t : j.at("turns")) {
      RawTurn turn;
      turn.user = t.at("user").get<std::string>();
      turn.agent = t.at("agent").get<std::string>();
      d.turns.push_back(std::move(turn));
    }
    if (d.turns.empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": dialogue without turns");
    corpus.push_back(std::move(d));
  }
  return corpus;
}

void write_corpus_file(const std::string& path, const RawCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus file: " + path);
  for (const RawDialogue& d : corpus) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["turns"] = nlohmann::ordered_json::array();
    for (const RawTurn& t : d.turns) {
      nlohmann::ordered_json jt;
      jt["user"] = t.user;
      jt["agent"] = t.agent;
      j["turns"].push_back(std::move(jt));
    }
    out << j.dump() << '\n';
  }
}

CorpusSplit split_corpus(const RawCorpus& corpus, double dev_frac, double test_frac,
                         uint64_t seed) {
  if (dev_frac < 0 || test_frac < 0 || dev_frac + test_frac >= 1.0)
    throw std::invalid_argument("split_corpus: bad fractions");
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  size_t n_dev = size_t(double(corpus.size()) * dev_frac);
  size_t n_test = size_t(double(corpus.size()) * test_frac);
  std::vector<int> bucket(corpus.size(), 0);
  for (size_t i = 0; i < n_dev; ++i) bucket[order[i]] = 1;
  for (size_t i = n_dev; i < n_dev + n_test; ++i) bucket[order[i]] = 2;
  CorpusSplit split;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (bucket[i] == 0) split.train.push_back(corpus[i]);
    else if (bucket[i] == 1) split.dev.push_back(corpus[i]);
    else split.test.push_back(corpus[i]);
  }
  return split;
}

// ==== vocabulary ====

Vocabulary::Vocabulary() {
  push("<bos>", 0);
  push("<eos>", 0);
  push("<unk>", 0);
  push("<pad>", 0);
}

void Vocabulary::push(const std::string& token, int64_t count) {
  index_[token] = int32_t(tokens_.size());
  tokens_.push_back(token);
  counts_.push_back(count);
}

Vocabulary Vocabulary::build(const RawCorpus& corpus, size_t min_count, size_t max_size) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, int64_t> counts;
  for (const RawDialogue& d : corpus)
    for (const RawTurn& t : d.turns) {
      for (const std::string& tok : tokenize(t.user)) ++counts[tok];
      for (const std::string& tok : tokenize(t.agent)) ++counts[tok];
    }
  std::vector<std::pair<std::string, int64_t>> order(counts.begin(), counts.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [token, count] : order) {
    if (count < int64_t(min_count)) break;
    if (v.size() - 4 >= max_size) break;
    v.push(token, count);
  }
  return v;
}

int32_t Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int32_t id) const {
  if (id < 0 || size_t(id) >= tokens_.size())
    throw std::out_of_range("vocabulary: bad token id " + std::to_string(id));
  return tokens_[size_t(id)];
}

std::vector<int32_t> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int32_t> ids;
  ids.reserve(tokens.size());
  for (const std::string& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int32_t>& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int32_t i : ids) out.push_back(token(i));
  return out;
}

std::vector<std::string> Vocabulary::surface(const std::vector<int32_t>& ids) const {
  std::vector<std::string> out;
  for (int32_t i : ids)
    if (i > kPad) out.push_back(token(i));
  return out;
}

static std::string vocab_serialized(const std::vector<std::string>& tokens,
                                    const std::vector<int64_t>& counts) {
  std::string blob;
  for (size_t i = 0; i < tokens.size(); ++i) {
    blob += tokens[i];
    blob += '\t';
    blob += std::to_string(counts[i]);
    blob += '\n';
  }
  return blob;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
  out << vocab_serialized(tokens_, counts_);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
  Vocabulary v;
  v.tokens_.clear();
  v.counts_.clear();
  v.index_.clear();
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing tab");
    v.push(line.substr(0, tab), std::stoll(line.substr(tab + 1)));
  }
  static const char* reserved[] = {"<bos>", "<eos>", "<unk>", "<pad>"};
  if (v.size() < 4) throw std::runtime_error(path + ": truncated vocabulary");
  for (int i = 0; i < 4; ++i)
    if (v.tokens_[size_t(i)] != reserved[i])
      throw std::runtime_error(path + ": reserved token " + std::to_string(i) + " is not " +
                               reserved[i]);
  return v;
}

uint64_t Vocabulary::checksum() const {
  return fnv1a64(vocab_serialized(tokens_, counts_));
}

// ==== tokenized corpus ====

Turn encode_turn_text(const RawTurn& raw, const Vocabulary& vocab) {
  Turn t;
  t.user = vocab.encode(tokenize(raw.user));
  if (t.user.empty()) t.user.push_back(Vocabulary::kEos);
  t.agent = vocab.encode(tokenize(raw.agent));
  t.agent.push_back(Vocabulary::kEos);
  return t;
}

Corpus encode_corpus(const RawCorpus& corpus, const Vocabulary& vocab) {
  Corpus out;
  out.reserve(corpus.size());
  for (const RawDialogue& d : corpus) {
    Dialogue dd;
    dd.id = d.id;
    for (const RawTurn& t : d.turns) dd.turns.push_back(encode_turn_text(t, vocab));
    out.push_back(std::move(dd));
  }
  return out;
}

// ==== batching ====

Batch Batch::make(const Corpus& corpus, const std::vector<size_t>& members) {
  if (members.empty()) throw std::invalid_argument("batch: no members");
  Batch b;
  b.members = members;
  b.turn_count = corpus[members[0]].turns.size();
  for (size_t m : members)
    if (corpus[m].turns.size() != b.turn_count)
      throw std::invalid_argument("batch: unequal turn counts");
  b.turns.resize(b.turn_count);
  for (size_t t = 0; t < b.turn_count; ++t) {
    TurnSlice& slice = b.turns[t];
    for (size_t m : members) {
      const Dialogue& d = corpus[m];
      slice.user.push_back(d.turns[t].user);
      slice.prev_agent.push_back(t == 0 ? std::vector<int32_t>{} : d.turns[t - 1].agent);
      slice.max_target_len = std::max(slice.max_target_len, d.turns[t].agent.size());
    }
    slice.targets.assign(members.size() * slice.max_target_len, Vocabulary::kPad);
    slice.mask.assign(members.size() * slice.max_target_len, 0.0);
    for (size_t i = 0; i < members.size(); ++i) {
      const auto& agent = corpus[members[i]].turns[t].agent;
      for (size_t n = 0; n < agent.size(); ++n) {
        slice.targets[i * slice.max_target_len + n] = agent[n];
        slice.mask[i * slice.max_target_len + n] = 1.0;
      }
    }
  }
  return b;
}

std::vector<Batch> batch_by_turns(const Corpus& corpus, size_t batch_size, uint64_t seed) {
  if (batch_size < 1) throw std::invalid_argument("batch_by_turns: batch_size < 1");
  std::map<size_t, std::vector<size_t>> groups;
  for (size_t i = 0; i < corpus.size(); ++i)
    groups[corpus[i].turns.size()].push_back(i);

  Rng rng(seed);
  std::vector<std::vector<size_t>> chunks;
  for (auto& [turns, members] : groups) {
    if (seed != 0) rng.shuffle(members);
    for (size_t at = 0; at < members.size(); at += batch_size) {
      size_t end = std::min(at + batch_size, members.size());
      chunks.emplace_back(members.begin() + long(at), members.begin() + long(end));
    }
  }
  if (seed != 0) rng.shuffle(chunks);

  std::vector<Batch> batches;
  batches.reserve(chunks.size());
  for (const auto& chunk : chunks) batches.push_back(Batch::make(corpus, chunk));
  return batches;
}

// ==== pretrained embeddings ====

double load_embeddings(const std::string& path, const Vocabulary& vocab,
                       std::vector<float>& matrix, size_t dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embedding file: " + path);
  if (matrix.size() != vocab.size() * dim)
    throw std::invalid_argument("load_embeddings: matrix size mismatch");
  std::vector<bool> covered(vocab.size(), false);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<float> vals;
    double v;
    while (ls >> v) vals.push_back(float(v));
    if (!ls.eof())
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed value");
    if (vals.size() != dim)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(dim) + " values, got " +
                               std::to_string(vals.size()));
    int32_t id = vocab.id(token);
    if (id == Vocabulary::kUnk && token != "<unk>") continue;
    for (size_t j = 0; j < dim; ++j) matrix[size_t(id) * dim + j] = vals[j];
    covered[size_t(id)] = true;
  }
  size_t hits = 0, total = 0;
  for (size_t i = 4; i < vocab.size(); ++i) {
    ++total;
    if (covered[i]) ++hits;
  }
  return total == 0 ? 0.0 : double(hits) / double(total);
}

}  // namespace awi
