#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace awi {

// ==== raw (text) corpus ====

struct RawTurn {
  std::string user;
  std::string agent;
};

struct RawDialogue {
  std::string id;
  std::vector<RawTurn> turns;
};

using RawCorpus = std::vector<RawDialogue>;

// lowercase, whitespace split, leading/trailing punctuation detached as
// separate tokens; interior punctuation kept so urls, error codes and
// contractions stay whole
std::vector<std::string> tokenize(const std::string& text);
std::string detokenize(const std::vector<std::string>& tokens);

RawCorpus read_corpus_file(const std::string& path);
void write_corpus_file(const std::string& path, const RawCorpus& corpus);

struct CorpusSplit {
  RawCorpus train, dev, test;
};
CorpusSplit split_corpus(const RawCorpus& corpus, double dev_frac, double test_frac,
                         uint64_t seed);

// ==== vocabulary ====

class Vocabulary {
 public:
  static constexpr int32_t kBos = 0;
  static constexpr int32_t kEos = 1;
  static constexpr int32_t kUnk = 2;
  static constexpr int32_t kPad = 3;

  Vocabulary();

  static Vocabulary build(const RawCorpus& corpus, size_t min_count = 1,
                          size_t max_size = SIZE_MAX);

  size_t size() const { return tokens_.size(); }
  int32_t id(const std::string& token) const;  // unknown id when absent
  const std::string& token(int32_t id) const;
  int64_t count(int32_t id) const { return counts_[size_t(id)]; }

  std::vector<int32_t> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int32_t>& ids) const;
  // decode with reserved tokens dropped; what metrics and idf operate on
  std::vector<std::string> surface(const std::vector<int32_t>& ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  uint64_t checksum() const;  // fnv-1a over the serialized table

 private:
  std::vector<std::string> tokens_;
  std::vector<int64_t> counts_;
  std::unordered_map<std::string, int32_t> index_;
  void push(const std::string& token, int64_t count);
};

// ==== tokenized corpus ====

struct Turn {
  std::vector<int32_t> user;   // source side, non-empty
  std::vector<int32_t> agent;  // target side, ends with eos
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
};

using Corpus = std::vector<Dialogue>;

Turn encode_turn_text(const RawTurn& raw, const Vocabulary& vocab);
Corpus encode_corpus(const RawCorpus& corpus, const Vocabulary& vocab);

// ==== batching ====

// Dialogues of identical turn count, with per-turn padded target matrices.
struct Batch {
  size_t turn_count = 0;
  std::vector<size_t> members;  // indices into the source corpus

  struct TurnSlice {
    std::vector<std::vector<int32_t>> user;        // per dialogue
    std::vector<std::vector<int32_t>> prev_agent;  // per dialogue, empty at turn 1
    size_t max_target_len = 0;
    std::vector<int32_t> targets;  // batch x max_target_len, row-major, pad-filled
    std::vector<double> mask;      // same layout, 1 for real positions
    int32_t target_at(size_t b, size_t n) const { return targets[b * max_target_len + n]; }
    double mask_at(size_t b, size_t n) const { return mask[b * max_target_len + n]; }
  };
  std::vector<TurnSlice> turns;

  size_t size() const { return members.size(); }
  static Batch make(const Corpus& corpus, const std::vector<size_t>& members);
};

// Groups by exact turn count then chunks; seed 0 keeps corpus order,
// otherwise dialogue order within groups and batch emission order are
// shuffled deterministically.
std::vector<Batch> batch_by_turns(const Corpus& corpus, size_t batch_size,
                                  uint64_t seed = 0);

// ==== pretrained embeddings ====

// Overwrites rows of `matrix` (vocab.size() x dim, row-major) for tokens
// found in the file; returns the covered fraction of non-reserved tokens.
double load_embeddings(const std::string& path, const Vocabulary& vocab,
                       std::vector<float>& matrix, size_t dim);

uint64_t fnv1a64(const std::string& bytes);

}  // namespace awi
