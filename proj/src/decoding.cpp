#include "awi/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "awi/metrics.hpp"

namespace awi {

namespace {

// bos, unk and pad are batching artifacts, never legitimate output words;
// decoding selects only over end-of-sentence and real vocabulary entries
bool decodable(int32_t id) {
  return id == Vocabulary::kEos || id > Vocabulary::kPad;
}

int32_t masked_argmax(const std::vector<float>& probs) {
  int32_t best = -1;
  float best_p = -1.0f;
  for (size_t i = 0; i < probs.size(); ++i) {
    if (!decodable(int32_t(i))) continue;
    if (probs[i] > best_p) {
      best_p = probs[i];
      best = int32_t(i);
    }
  }
  return best;
}

}  // namespace

Hypothesis greedy_decode(const AwiParams& params, const AwiState& state,
                         const std::vector<int32_t>& source,
                         const std::vector<int32_t>& prev_response, size_t max_len) {
  if (max_len < 1) throw std::invalid_argument("greedy_decode: max_len < 1");
  TurnContext turn(params, state, source, prev_response);
  Hypothesis hyp;
  TurnContext::Cursor at = turn.start();
  int32_t prev = Vocabulary::kBos;
  while (hyp.tokens.size() < max_len) {
    auto [next, probs] = turn.step(at, prev);
    int32_t tok = masked_argmax(probs);
    double lp = std::log(double(probs[size_t(tok)]));
    hyp.tokens.push_back(tok);
    hyp.token_logps.push_back(lp);
    hyp.total_logp += lp;
    if (tok == Vocabulary::kEos) break;
    at = next;
    prev = tok;
  }
  return hyp;
}

NBestList beam_search(const AwiParams& params, const AwiState& state,
                      const std::vector<int32_t>& source,
                      const std::vector<int32_t>& prev_response, size_t width,
                      size_t max_len) {
  if (width < 1) throw std::invalid_argument("beam_search: width < 1");
  if (max_len < 1) throw std::invalid_argument("beam_search: max_len < 1");
  TurnContext turn(params, state, source, prev_response);

  struct Partial {
    TurnContext::Cursor at;
    std::vector<int32_t> tokens;
    std::vector<double> logps;
    double total = 0;
  };
  std::vector<Partial> active;
  active.push_back({turn.start(), {}, {}, 0.0});
  std::vector<Hypothesis> finished;

  for (size_t depth = 0; depth < max_len && !active.empty(); ++depth) {
    struct Ext {
      size_t parent;
      int32_t token;
      double logp;
      double total;
    };
    std::vector<Ext> exts;
    std::vector<TurnContext::Cursor> cursors(active.size());
    for (size_t i = 0; i < active.size(); ++i) {
      int32_t prev = active[i].tokens.empty() ? Vocabulary::kBos : active[i].tokens.back();
      auto [next, probs] = turn.step(active[i].at, prev);
      cursors[i] = next;
      for (size_t v = 0; v < probs.size(); ++v) {
        if (!decodable(int32_t(v))) continue;
        double lp = std::log(double(probs[v]));
        exts.push_back({i, int32_t(v), lp, active[i].total + lp});
      }
    }
    std::sort(exts.begin(), exts.end(), [](const Ext& a, const Ext& b) {
      if (a.total != b.total) return a.total > b.total;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });
    if (exts.size() > width) exts.resize(width);

    std::vector<Partial> next_active;
    for (const Ext& e : exts) {
      Partial p;
      p.at = cursors[e.parent];
      p.tokens = active[e.parent].tokens;
      p.tokens.push_back(e.token);
      p.logps = active[e.parent].logps;
      p.logps.push_back(e.logp);
      p.total = e.total;
      if (e.token == Vocabulary::kEos || p.tokens.size() == max_len) {
        Hypothesis h;
        h.tokens = std::move(p.tokens);
        h.token_logps = std::move(p.logps);
        h.total_logp = p.total;
        finished.push_back(std::move(h));
      } else {
        next_active.push_back(std::move(p));
      }
    }
    active = std::move(next_active);
  }

  std::sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    double na = a.normalized(), nb = b.normalized();
    if (na != nb) return na > nb;
    return a.tokens < b.tokens;
  });
  if (finished.size() > width) finished.resize(width);

  NBestList out;
  out.hyps = std::move(finished);
  return out;
}

Hypothesis sample_decode(const AwiParams& params, const AwiState& state,
                         const std::vector<int32_t>& source,
                         const std::vector<int32_t>& prev_response, size_t max_len,
                         Rng& rng) {
  if (max_len < 1) throw std::invalid_argument("sample_decode: max_len < 1");
  TurnContext turn(params, state, source, prev_response);
  Hypothesis hyp;
  TurnContext::Cursor at = turn.start();
  int32_t prev = Vocabulary::kBos;
  while (hyp.tokens.size() < max_len) {
    auto [next, probs] = turn.step(at, prev);
    double mass = 0.0;
    for (size_t i = 0; i < probs.size(); ++i)
      if (decodable(int32_t(i))) mass += double(probs[i]);
    int32_t tok = Vocabulary::kEos;
    if (mass > 0.0) {
      double r = rng.uniform() * mass;
      double acc = 0.0;
      for (size_t i = 0; i < probs.size(); ++i) {
        if (!decodable(int32_t(i))) continue;
        acc += double(probs[i]);
        if (r < acc) {
          tok = int32_t(i);
          break;
        }
      }
    }
    double lp = std::log(double(probs[size_t(tok)]));
    hyp.tokens.push_back(tok);
    hyp.token_logps.push_back(lp);
    hyp.total_logp += lp;
    if (tok == Vocabulary::kEos) break;
    at = next;
    prev = tok;
  }
  return hyp;
}

NBestList rerank(const NBestList& nbest, double weight, const std::string& score_kind) {
  NBestList out = nbest;
  for (const Hypothesis& h : out.hyps)
    if (!h.aux.count(score_kind))
      throw std::invalid_argument("rerank: hypothesis missing auxiliary score " +
                                  score_kind);
  std::stable_sort(out.hyps.begin(), out.hyps.end(),
                   [&](const Hypothesis& a, const Hypothesis& b) {
                     return a.normalized() + weight * a.aux.at(score_kind) >
                            b.normalized() + weight * b.aux.at(score_kind);
                   });
  return out;
}

double backward_score(const AwiParams& backward_params,
                      const std::vector<int32_t>& response_surface,
                      const std::vector<int32_t>& source_tokens) {
  std::vector<int32_t> src = response_surface;
  if (src.empty()) src.push_back(Vocabulary::kEos);
  std::vector<int32_t> target = source_tokens;
  target.push_back(Vocabulary::kEos);
  AwiState state = AwiState::zero(backward_params.config);
  return normalized_llk(backward_params, state, src, {}, target);
}

std::vector<double> mert_grid(double lo, double hi, double step) {
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    double w = lo + step * i;
    if (w > hi + 1e-12) break;
    grid.push_back(w);
  }
  return grid;
}

double mert_tune(const std::vector<NBestList>& dev_lists,
                 const std::vector<std::vector<std::string>>& references,
                 const std::vector<double>& grid, const std::string& score_kind,
                 const Vocabulary& vocab) {
  if (grid.empty()) throw std::invalid_argument("mert_tune: empty weight grid");
  if (dev_lists.size() != references.size())
    throw std::invalid_argument("mert_tune: list/reference count mismatch");
  for (const NBestList& l : dev_lists)
    if (l.hyps.empty()) throw std::invalid_argument("mert_tune: empty n-best list");

  std::vector<double> weights = grid;
  std::sort(weights.begin(), weights.end());
  double best_w = weights.front(), best_bleu = -1.0;
  for (double w : weights) {
    std::vector<std::vector<std::string>> tops;
    tops.reserve(dev_lists.size());
    for (const NBestList& list : dev_lists) {
      NBestList r = rerank(list, w, score_kind);
      tops.push_back(vocab.surface(r.hyps.front().tokens));
    }
    double bleu = bleu4(tops, references);
    if (bleu > best_bleu) {
      best_bleu = bleu;
      best_w = w;
    }
  }
  return best_w;
}

std::string nbest_dump_line(const NBestList& list, const Hypothesis& hyp,
                            const Vocabulary& vocab) {
  std::string line = list.turn_id + " ||| " + detokenize(vocab.surface(hyp.tokens));
  char buf[64];
  std::snprintf(buf, sizeof buf, " ||| %.6f", hyp.normalized());
  line += buf;
  for (const char* kind : {"idf", "backward-llk"}) {
    auto it = hyp.aux.find(kind);
    if (it == hyp.aux.end()) {
      line += " ||| n/a";
    } else {
      std::snprintf(buf, sizeof buf, " ||| %.6f", it->second);
      line += buf;
    }
  }
  return line;
}

}  // namespace awi
