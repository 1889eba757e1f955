#include "awi/retrieval.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "awi/rng.hpp"
#include "vendor/json.hpp"

namespace awi {

namespace {

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<int32_t> encode_source(const Vocabulary& vocab,
                                   const std::vector<std::string>& words) {
  std::vector<int32_t> ids = vocab.encode(words);
  if (ids.empty()) ids.push_back(Vocabulary::kEos);
  return ids;
}

std::vector<int32_t> encode_target(const Vocabulary& vocab,
                                   const std::vector<std::string>& words) {
  std::vector<int32_t> ids = vocab.encode(words);
  ids.push_back(Vocabulary::kEos);
  return ids;
}

}  // namespace

// ==== candidate-set construction ====

std::vector<RetrievalInstance> build_instances(const RawCorpus& corpus,
                                               size_t n_candidates, uint64_t seed) {
  if (n_candidates < 2) throw std::invalid_argument("build_instances: need >= 2 candidates");

  struct PoolEntry {
    size_t dialogue;
    std::vector<std::string> tokens;
    std::string text;
  };
  std::vector<PoolEntry> pool;
  for (size_t d = 0; d < corpus.size(); ++d)
    for (const RawTurn& t : corpus[d].turns) {
      std::vector<std::string> toks = tokenize(t.agent);
      std::string text = join_tokens(toks);
      pool.push_back({d, std::move(toks), std::move(text)});
    }

  Rng rng(seed);
  std::vector<RetrievalInstance> out;
  for (size_t d = 0; d < corpus.size(); ++d) {
    const RawDialogue& dlg = corpus[d];
    std::vector<RetrievalTurn> history;
    for (size_t t = 0; t < dlg.turns.size(); ++t) {
      RetrievalInstance inst;
      inst.id = dlg.id + "#" + std::to_string(t);
      inst.turns = history;
      inst.turns.push_back({tokenize(dlg.turns[t].user), {}});
      for (const RetrievalTurn& h : inst.turns) {
        inst.context.insert(inst.context.end(), h.user.begin(), h.user.end());
        inst.context.insert(inst.context.end(), h.agent.begin(), h.agent.end());
      }

      std::vector<std::string> positive = tokenize(dlg.turns[t].agent);
      std::string positive_text = join_tokens(positive);
      inst.candidates.assign(n_candidates, {});
      inst.positive_index = rng.index(n_candidates);
      inst.candidates[inst.positive_index] = positive;
      for (size_t c = 0; c < n_candidates; ++c) {
        if (c == inst.positive_index) continue;
        size_t tries = 0;
        for (;;) {
          if (++tries > 1000)
            throw std::runtime_error("build_instances: cannot sample a negative for " +
                                     inst.id);
          const PoolEntry& cand = pool[rng.index(pool.size())];
          if (cand.dialogue == d || cand.text == positive_text) continue;
          inst.candidates[c] = cand.tokens;
          break;
        }
      }
      out.push_back(std::move(inst));

      history.push_back({tokenize(dlg.turns[t].user), positive});
    }
  }
  return out;
}

void write_instances_file(const std::string& path,
                          const std::vector<RetrievalInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const RetrievalInstance& inst : instances) {
    nlohmann::ordered_json j;
    j["id"] = inst.id;
    j["context"] = inst.context;
    j["candidates"] = inst.candidates;
    j["positive_index"] = inst.positive_index;
    if (!inst.turns.empty()) {
      nlohmann::ordered_json turns = nlohmann::ordered_json::array();
      for (const RetrievalTurn& t : inst.turns)
        turns.push_back({{"user", t.user}, {"agent", t.agent}});
      j["turns"] = turns;
    }
    out << j.dump() << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<RetrievalInstance> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::vector<RetrievalInstance> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    RetrievalInstance inst;
    inst.id = j.value("id", "line-" + std::to_string(line_no));
    inst.context = j.at("context").get<std::vector<std::string>>();
    inst.candidates = j.at("candidates").get<std::vector<std::vector<std::string>>>();
    inst.positive_index = j.at("positive_index").get<size_t>();
    if (inst.positive_index >= inst.candidates.size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": positive_index out of range");
    if (j.count("turns"))
      for (const auto& t : j.at("turns"))
        inst.turns.push_back({t.at("user").get<std::vector<std::string>>(),
                              t.at("agent").get<std::vector<std::string>>()});
    out.push_back(std::move(inst));
  }
  return out;
}

// ==== scoring and ranking ====

RetrieveMode parse_retrieve_mode(const std::string& name) {
  if (name == "tfidf") return RetrieveMode::tfidf;
  if (name == "awi") return RetrieveMode::awi;
  if (name == "interpolated") return RetrieveMode::interpolated;
  throw std::invalid_argument("unknown retrieval mode: " + name);
}

std::vector<double> candidate_cosines(const RetrievalInstance& instance,
                                      const IdfTable& idf) {
  TfIdfVector ctx = tfidf_vector(instance.context, idf);
  std::vector<double> out;
  out.reserve(instance.candidates.size());
  for (const auto& cand : instance.candidates)
    out.push_back(cosine(ctx, tfidf_vector(cand, idf)));
  return out;
}

std::vector<double> candidate_llks(const RetrievalInstance& instance,
                                   const AwiParams& params, const Vocabulary& vocab) {
  std::vector<RetrievalTurn> turns = instance.turns;
  if (turns.empty()) turns.push_back({instance.context, {}});

  AwiState state = AwiState::zero(params.config);
  std::vector<int32_t> prev;
  for (size_t t = 0; t + 1 < turns.size(); ++t) {
    std::vector<int32_t> source = encode_source(vocab, turns[t].user);
    EncodedTurn enc = encode_turn(params, source, prev);
    state = intention_step(params, state, enc);
    prev = encode_target(vocab, turns[t].agent);
  }
  std::vector<int32_t> source = encode_source(vocab, turns.back().user);

  TurnContext turn(params, state, source, prev);
  std::vector<double> out;
  out.reserve(instance.candidates.size());
  for (const auto& cand : instance.candidates) {
    std::vector<int32_t> target = encode_target(vocab, cand);
    TurnScore score = turn.score(target);
    out.push_back(score.total / double(target.size()));
  }
  return out;
}

std::vector<size_t> rank_candidates(RetrieveMode mode,
                                    const std::vector<double>& cosines,
                                    const std::vector<double>& llks, double weight) {
  size_t n = mode == RetrieveMode::tfidf ? cosines.size() : llks.size();
  if (n == 0) throw std::invalid_argument("rank_candidates: no scores");
  std::vector<double> score(n);
  for (size_t i = 0; i < n; ++i) {
    switch (mode) {
      case RetrieveMode::tfidf: score[i] = cosines[i]; break;
      case RetrieveMode::awi: score[i] = llks[i]; break;
      case RetrieveMode::interpolated:
        if (cosines.size() != n)
          throw std::invalid_argument("rank_candidates: score length mismatch");
        score[i] = llks[i] + weight * cosines[i];
        break;
    }
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return score[a] > score[b]; });
  return order;
}

std::vector<size_t> retrieve(const RetrievalInstance& instance, RetrieveMode mode,
                             const IdfTable& idf, const AwiParams* params,
                             const Vocabulary* vocab, double weight) {
  std::vector<double> cosines, llks;
  if (mode != RetrieveMode::awi) cosines = candidate_cosines(instance, idf);
  if (mode != RetrieveMode::tfidf) {
    if (!params || !vocab)
      throw std::invalid_argument("retrieve: model required for this mode");
    llks = candidate_llks(instance, *params, *vocab);
  }
  return rank_candidates(mode, cosines, llks, weight);
}

// ==== evaluation ====

double recall_at_k(const std::vector<std::vector<size_t>>& rankings,
                   const std::vector<size_t>& positive_indices, size_t k) {
  if (rankings.empty()) throw std::invalid_argument("recall_at_k: no rankings");
  if (rankings.size() != positive_indices.size())
    throw std::invalid_argument("recall_at_k: ranking/positive count mismatch");
  size_t hits = 0;
  for (size_t i = 0; i < rankings.size(); ++i) {
    size_t top = std::min(k, rankings[i].size());
    for (size_t j = 0; j < top; ++j)
      if (rankings[i][j] == positive_indices[i]) {
        ++hits;
        break;
      }
  }
  return double(hits) / double(rankings.size());
}

std::map<size_t, double> recall_rates(const std::vector<RetrievalInstance>& instances,
                                      RetrieveMode mode, const IdfTable& idf,
                                      const AwiParams* params, const Vocabulary* vocab,
                                      double weight, const std::vector<size_t>& ks) {
  if (instances.empty()) throw std::invalid_argument("recall_rates: no instances");
  std::vector<std::vector<size_t>> rankings;
  std::vector<size_t> positives;
  rankings.reserve(instances.size());
  for (const RetrievalInstance& inst : instances) {
    rankings.push_back(retrieve(inst, mode, idf, params, vocab, weight));
    positives.push_back(inst.positive_index);
  }
  std::map<size_t, double> out;
  for (size_t k : ks) out[k] = recall_at_k(rankings, positives, k);
  return out;
}

double tune_retrieval_weight(const std::vector<RetrievalInstance>& instances,
                             const AwiParams& params, const Vocabulary& vocab,
                             const IdfTable& idf, const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("tune_retrieval_weight: empty grid");
  if (instances.empty()) throw std::invalid_argument("tune_retrieval_weight: no instances");

  std::vector<std::vector<double>> cosines, llks;
  std::vector<size_t> positives;
  for (const RetrievalInstance& inst : instances) {
    cosines.push_back(candidate_cosines(inst, idf));
    llks.push_back(candidate_llks(inst, params, vocab));
    positives.push_back(inst.positive_index);
  }

  std::vector<double> weights = grid;
  std::sort(weights.begin(), weights.end());
  double best_w = weights.front(), best_r1 = -1.0, best_r5 = -1.0;
  for (double w : weights) {
    std::vector<std::vector<size_t>> rankings;
    rankings.reserve(instances.size());
    for (size_t i = 0; i < instances.size(); ++i)
      rankings.push_back(rank_candidates(RetrieveMode::interpolated, cosines[i],
                                         llks[i], w));
    double r1 = recall_at_k(rankings, positives, 1);
    double r5 = recall_at_k(rankings, positives, 5);
    if (r1 > best_r1 || (r1 == best_r1 && r5 > best_r5)) {
      best_r1 = r1;
      best_r5 = r5;
      best_w = w;
    }
  }
  return best_w;
}

}  // namespace awi
