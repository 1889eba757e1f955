// Acceptance gate for the assembled pipeline. Drives the command-line
// binary end to end on the bundled synthetic corpus, checks library-level
// invariants directly, and prints one [PASS]/[FAIL] line per criterion.
// Exit status is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/decoding.hpp"
#include "awi/metrics.hpp"
#include "awi/model.hpp"
#include "awi/model_graph.hpp"
#include "awi/optim.hpp"
#include "awi/retrieval.hpp"
#include "awi/rng.hpp"
#include "awi/specificity.hpp"
#include "awi/tape.hpp"
#include "awi/tensor.hpp"

namespace {

using namespace awi;
namespace fs = std::filesystem;

std::string g_awi;
int g_failures = 0;

// ==== small utilities ====

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[768];
  std::snprintf(buf, sizeof(buf), f, a...);
  return std::string(buf);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void run_cmd(const std::string& args, const std::string& env_prefix = "") {
  std::string cmd = env_prefix + g_awi + " " + args + " >> commands.log 2>&1";
  int rc = std::system(cmd.c_str());
  if (rc != 0)
    throw std::runtime_error("command failed (status " + std::to_string(rc) + "): " + args);
}

double timed_cmd(const std::string& args) {
  double t0 = now_seconds();
  run_cmd(args);
  return now_seconds() - t0;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

double report_value(const std::string& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::string line, prefix = key + " = ";
  while (std::getline(in, line))
    if (line.rfind(prefix, 0) == 0) return std::stod(line.substr(prefix.size()));
  throw std::runtime_error(path + ": missing " + key);
}

using Body = std::function<std::pair<bool, std::string>()>;

void criterion(int id, const std::string& name, const Body& body) {
  bool pass = false;
  std::string detail;
  try {
    auto r = body();
    pass = r.first;
    detail = r.second;
  } catch (const std::exception& e) {
    detail = std::string("error: ") + e.what();
  }
  std::printf("[%s] %d %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// artifacts shared across criteria; filled as the stages run
struct Shared {
  RawCorpus raw;
  CorpusSplit split;
  Vocabulary vocab;
  IdfTable idf;
  Corpus dev;
  double base_bleu = std::numeric_limits<double>::quiet_NaN();
  double base_idf = std::numeric_limits<double>::quiet_NaN();
};

// ==== gradient fidelity fixture ====

Corpus grad_fixture() {
  Corpus corpus(2);
  corpus[0].id = "a";
  corpus[0].turns = {Turn{{4}, {4, 1}}, Turn{{4, 2}, {2, 4, 1}}};
  corpus[1].id = "b";
  corpus[1].turns = {Turn{{2, 4}, {3, 1}}, Turn{{3}, {4, 4, 1}}};
  return corpus;
}

std::pair<bool, std::string> check_gradients() {
  double t0 = now_seconds();
  AwiConfig cfg = AwiConfig::tiny(5);
  Batch batch = Batch::make(grad_fixture(), {0, 1});

  AwiParams shapes = AwiParams::init(cfg, 1);
  std::vector<std::string> names;
  std::vector<Tensor<double>> values;
  Rng rng(41037);
  for (auto& [name, t] : shapes.named()) {
    names.push_back(name);
    Tensor<double> v = Tensor<double>::zeros(t->shape);
    for (double& x : v.data) x = rng.uniform(-0.6, 0.6);
    values.push_back(std::move(v));
  }

  FdLossFn loss_fn = [&](const std::vector<Tensor<double>>& vals) {
    Tape<double> tape;
    Staged<double> sp = stage_values(tape, cfg, vals);
    auto g = build_batch_loss(tape, sp, batch);
    return double(tape.value(g.loss).data[0]);
  };
  FdGradFn grad64 = [&](const std::vector<Tensor<double>>& vals) {
    Tape<double> tape;
    Staged<double> sp = stage_values(tape, cfg, vals);
    auto g = build_batch_loss(tape, sp, batch);
    tape.backward(g.loss);
    std::vector<Tensor<double>> out;
    for (auto& [name, id] : sp.order) out.push_back(tape.grad(id));
    return out;
  };
  FdGradFn grad32 = [&](const std::vector<Tensor<double>>& vals) {
    Tape<float> tape;
    std::vector<Tensor<float>> fvals;
    fvals.reserve(vals.size());
    for (const auto& v : vals) fvals.push_back(v.cast<float>());
    Staged<float> sp = stage_values(tape, cfg, fvals);
    auto g = build_batch_loss(tape, sp, batch);
    tape.backward(g.loss);
    std::vector<Tensor<double>> out;
    for (auto& [name, id] : sp.order) out.push_back(tape.grad(id).template cast<double>());
    return out;
  };

  FdReport r64 = finite_diff_check(loss_fn, grad64, values, names, 1e-4);
  FdReport r32 = finite_diff_check(loss_fn, grad32, values, names, 1e-4);
  double secs = now_seconds() - t0;
  bool ok = r64.max_rel_err < 1e-6 && r32.max_rel_err < 1e-4 && secs < 30.0;
  return {ok, fmt("64-bit rel err %.3g vs 1e-6, 32-bit %.3g vs 1e-4, %zu coords, %.1fs",
                  r64.max_rel_err, r32.max_rel_err, r64.coords_checked, secs)};
}

// ==== normalization sweep ====

std::pair<bool, std::string> check_normalization() {
  double t0 = now_seconds();
  Rng rng(20260822);
  size_t models = 0, checks = 0;
  double worst_gap = 0.0;
  double min_prob = std::numeric_limits<double>::infinity();

  auto inspect = [&](const std::vector<float>& dist) {
    double sum = 0.0;
    for (float v : dist) {
      sum += v;
      if (v < min_prob) min_prob = v;
    }
    worst_gap = std::max(worst_gap, std::fabs(sum - 1.0));
    ++checks;
    return std::fabs(sum - 1.0) <= 1e-5 && min_prob > 0.0;
  };

  for (size_t iter = 0; iter < 1000; ++iter) {
    AwiConfig cfg;
    cfg.vocab = 5 + rng.index(12);
    cfg.embed_dim = 1 + rng.index(6);
    cfg.encoder_dim = 1 + rng.index(6);
    cfg.intention_dim = 1 + rng.index(5);
    cfg.decoder_dim = 1 + rng.index(6);
    cfg.align_dim = 1 + rng.index(4);
    cfg.layers = 1 + rng.index(3);
    cfg.generation_layers = rng.index(3);
    cfg.use_similarity_feature = rng.index(2) == 0;

    AwiParams p = AwiParams::init(cfg, 1000 + iter);
    for (auto& [name, t] : p.named())
      for (float& v : t->data) v = float(v * (1.0 + 5.0 * rng.uniform()));

    std::vector<int32_t> source, prev;
    size_t m = 1 + rng.index(5);
    for (size_t i = 0; i < m; ++i)
      source.push_back(int32_t(4 + rng.index(cfg.vocab - 4)));
    if (rng.index(2) == 0) {
      size_t k = 1 + rng.index(4);
      for (size_t i = 0; i < k; ++i)
        prev.push_back(int32_t(4 + rng.index(cfg.vocab - 4)));
    }

    EncodedTurn enc = encode_turn(p, source, prev);
    AwiState st = intention_step(p, AwiState::zero(cfg), enc);
    std::vector<std::vector<float>> h = init_decoder(p, st);

    AttentionOut att = attention(p, h.back(), enc.x_seq);
    bool ok = inspect(att.weights);

    std::vector<float> r_prev;
    int32_t y = Vocabulary::kBos;
    for (int s = 0; s < 2 && ok; ++s) {
      DecoderStepOut out = decoder_step(p, h, y, r_prev, enc);
      ok = inspect(out.p);
      h = out.h;
      r_prev = out.r;
      y = int32_t(rng.index(cfg.vocab));
    }
    if (!ok) break;
    ++models;
  }

  double secs = now_seconds() - t0;
  bool ok = models == 1000 && worst_gap <= 1e-5 && min_prob > 0.0 && secs < 10.0;
  return {ok, fmt("%zu models, %zu distributions, worst |sum-1| %.2e, min prob %.2e, %.1fs",
                  models, checks, worst_gap, min_prob, secs)};
}

// ==== exhaustive search comparison ====

struct Finished {
  std::vector<int32_t> tokens;
  double total = 0;
  double normalized() const { return total / double(tokens.size()); }
};

std::vector<Finished> enumerate_sequences(const AwiParams& params, const AwiState& state,
                                          const std::vector<int32_t>& source,
                                          size_t max_len) {
  TurnContext ctx(params, state, source, {});
  std::vector<int32_t> emittable = {Vocabulary::kEos};
  for (int32_t t = Vocabulary::kPad + 1; t < int32_t(params.config.vocab); ++t)
    emittable.push_back(t);

  std::vector<Finished> all;
  std::function<void(const TurnContext::Cursor&, const std::vector<int32_t>&, double)> walk =
      [&](const TurnContext::Cursor& at, const std::vector<int32_t>& prefix, double total) {
        int32_t y_prev = prefix.empty() ? Vocabulary::kBos : prefix.back();
        auto [next, probs] = ctx.step(at, y_prev);
        for (int32_t t : emittable) {
          std::vector<int32_t> seq = prefix;
          seq.push_back(t);
          double lp = total + std::log(double(probs[size_t(t)]));
          if (t == Vocabulary::kEos || seq.size() == max_len)
            all.push_back({seq, lp});
          else
            walk(next, seq, lp);
        }
      };
  walk(ctx.start(), {}, 0.0);

  std::stable_sort(all.begin(), all.end(), [](const Finished& a, const Finished& b) {
    if (a.normalized() != b.normalized()) return a.normalized() > b.normalized();
    return a.tokens < b.tokens;
  });
  return all;
}

std::pair<bool, std::string> check_search_and_rerank() {
  // saturating beam against full enumeration on a six-word model
  AwiConfig cfg = AwiConfig::tiny(6);
  AwiParams params = AwiParams::init(cfg, 99);
  AwiState state = AwiState::zero(cfg);
  std::vector<int32_t> source = {4, 5};

  NBestList nbest = beam_search(params, state, source, {}, 64, 3);
  std::vector<Finished> all = enumerate_sequences(params, state, source, 3);
  bool beam_ok = nbest.hyps.size() == all.size();
  for (size_t i = 0; beam_ok && i < all.size(); ++i)
    beam_ok = nbest.hyps[i].tokens == all[i].tokens &&
              std::fabs(nbest.hyps[i].total_logp - all[i].total) < 1e-6;

  // weight grid search recovers the constructed optimum
  RawCorpus words = {{"d", {{"q", "alpha beta gamma delta epsilon zeta eta theta iota kappa lambda mu"}}}};
  Vocabulary vocab = Vocabulary::build(words);
  auto ids = [&](const std::string& text) { return vocab.encode(tokenize(text)); };
  auto hyp = [&](const std::string& text, double normalized, double idf_score) {
    Hypothesis h;
    h.tokens = ids(text);
    h.total_logp = normalized * double(h.tokens.size());
    h.aux["idf"] = idf_score;
    return h;
  };
  std::vector<std::vector<std::string>> refs = {tokenize("alpha beta gamma delta"),
                                                tokenize("epsilon zeta eta theta")};
  NBestList la;
  la.turn_id = "a";
  la.hyps = {hyp("iota kappa lambda mu", -0.4, 0.0), hyp("alpha beta gamma delta", -1.0, 1.5)};
  NBestList lb;
  lb.turn_id = "b";
  lb.hyps = {hyp("epsilon zeta eta theta", -0.3, 0.2), hyp("iota kappa lambda mu", -0.8, 1.0)};
  std::vector<double> grid = {0.0, 0.25, 0.5, 0.75, 1.0};
  double best = mert_tune({la, lb}, refs, grid, "idf", vocab);
  bool mert_ok = best == 0.5;

  // weight zero keeps the incoming order, ties included
  NBestList plain;
  plain.turn_id = "c";
  plain.hyps = {hyp("alpha beta", -0.2, 9.0), hyp("gamma delta", -0.5, 0.0),
                hyp("epsilon zeta", -0.5, 7.0), hyp("eta theta", -1.5, 3.0)};
  NBestList same = rerank(plain, 0.0, "idf");
  bool rerank_ok = same.hyps.size() == plain.hyps.size();
  for (size_t i = 0; rerank_ok && i < plain.hyps.size(); ++i)
    rerank_ok = same.hyps[i].tokens == plain.hyps[i].tokens;

  bool ok = beam_ok && mert_ok && rerank_ok;
  return {ok, fmt("beam matches %zu enumerated sequences: %s; tuned weight %.2f vs 0.50; "
                  "weight-0 rerank identical: %s",
                  all.size(), beam_ok ? "yes" : "no", best, rerank_ok ? "yes" : "no")};
}

// ==== metric oracles ====

std::pair<bool, std::string> check_metric_oracles(const Shared& sh) {
  using Sentences = std::vector<std::vector<std::string>>;
  Sentences hyp = {{"a", "b", "c", "d"}};
  Sentences ref = {{"a", "b", "c", "d", "e"}};
  double short_full_overlap = bleu4(hyp, ref);
  bool bleu_ok = std::fabs(short_full_overlap - std::exp(-0.25)) < 1e-4;

  Sentences both = {{"a", "b", "c", "d"}, {"x", "y", "z", "w", "v"}};
  bool identity_ok = bleu4(both, both) == 1.0;
  bool disjoint_ok = bleu4({{"p", "q", "r", "s"}}, {{"t", "u", "v", "w"}}) == 0.0;

  // sparse ranking against a dense double-precision cosine
  std::vector<RetrievalInstance> instances = build_instances(sh.raw, 10, 21);
  instances.resize(50);
  size_t agreeing = 0;
  for (const auto& inst : instances) {
    std::vector<std::string> union_words = inst.context;
    for (const auto& cand : inst.candidates)
      union_words.insert(union_words.end(), cand.begin(), cand.end());
    std::sort(union_words.begin(), union_words.end());
    union_words.erase(std::unique(union_words.begin(), union_words.end()),
                      union_words.end());

    auto dense = [&](const std::vector<std::string>& toks) {
      std::vector<double> v(union_words.size(), 0.0);
      for (const auto& w : toks) {
        auto it = std::lower_bound(union_words.begin(), union_words.end(), w);
        v[size_t(it - union_words.begin())] += sh.idf.idf(w);
      }
      return v;
    };
    std::vector<double> ctx = dense(inst.context);
    double cn = 0.0;
    for (double x : ctx) cn += x * x;
    cn = std::sqrt(cn);

    std::vector<double> cosines;
    for (const auto& cand : inst.candidates) {
      std::vector<double> cv = dense(cand);
      double dot = 0.0, nn = 0.0;
      for (size_t i = 0; i < cv.size(); ++i) {
        dot += ctx[i] * cv[i];
        nn += cv[i] * cv[i];
      }
      nn = std::sqrt(nn);
      cosines.push_back(cn > 0.0 && nn > 0.0 ? dot / (cn * nn) : 0.0);
    }
    std::vector<size_t> expect(inst.candidates.size());
    std::iota(expect.begin(), expect.end(), size_t(0));
    std::stable_sort(expect.begin(), expect.end(),
                     [&](size_t a, size_t b) { return cosines[a] > cosines[b]; });

    std::vector<size_t> got =
        retrieve(inst, RetrieveMode::tfidf, sh.idf, nullptr, nullptr, 0.0);
    if (got == expect) ++agreeing;
  }
  bool rank_ok = agreeing == instances.size();

  bool ok = bleu_ok && identity_ok && disjoint_ok && rank_ok;
  return {ok, fmt("bleu %.6f vs %.6f, identity %s, disjoint %s, "
                  "%zu/50 rankings match the dense oracle",
                  short_full_overlap, std::exp(-0.25), identity_ok ? "1.0" : "off",
                  disjoint_ok ? "0.0" : "off", agreeing)};
}

}  // namespace

// ==== gate ====

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: awi_acceptance <awi-binary>\n");
    return 2;
  }
  g_awi = fs::absolute(argv[1]).string();

  fs::path dir = fs::temp_directory_path() / "awi_acceptance";
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  fs::current_path(dir);
  std::printf("work dir %s\n", dir.c_str());

  Shared sh;

  criterion(1, "gradient-fidelity", check_gradients);
  criterion(2, "probability-normalization", check_normalization);

  // corpus, vocabulary and idf table feeding every pipeline criterion
  std::string setup_error;
  try {
    double t0 = now_seconds();
    run_cmd("synth-corpus --n 2000 --seed 7 --out corpus.jsonl");
    run_cmd("build-vocab --corpus corpus.jsonl --out vocab.txt");
    run_cmd("build-idf --corpus corpus.jsonl --out idf.txt");
    sh.raw = read_corpus_file("corpus.jsonl");
    sh.split = split_corpus(sh.raw, 0.1, 0.1, 13);
    sh.vocab = Vocabulary::load("vocab.txt");
    sh.idf = IdfTable::load("idf.txt");
    sh.dev = encode_corpus(sh.split.dev, sh.vocab);
    std::printf("setup: %zu dialogues, vocabulary %zu, %.1fs\n", sh.raw.size(),
                sh.vocab.size(), now_seconds() - t0);
  } catch (const std::exception& e) {
    setup_error = e.what();
    std::printf("setup failed: %s\n", setup_error.c_str());
  }
  auto need_setup = [&] {
    if (!setup_error.empty()) throw std::runtime_error("setup failed: " + setup_error);
  };

  criterion(3, "corpus-learning", [&]() -> std::pair<bool, std::string> {
    need_setup();
    double t_train = timed_cmd(
        "train --corpus corpus.jsonl --vocab vocab.txt --out m10.bin "
        "--objective xent --epochs 10 --lr 0.002 --seed 7");
    AwiParams m10 = load_checkpoint("m10.bin");
    double dev_ppl = perplexity(m10, sh.dev, 16);
    double cap = 0.5 * double(sh.vocab.size());

    RawCorpus one = {sh.raw.front()};
    write_corpus_file("one.jsonl", one);
    double t_over = timed_cmd(
        "train --corpus one.jsonl --vocab vocab.txt --out ov.bin "
        "--objective xent --epochs 1000 --lr 0.003 --seed 7");
    AwiParams ov = load_checkpoint("ov.bin");
    double over_ppl = perplexity(ov, encode_corpus(one, sh.vocab), 16);

    bool ok = dev_ppl < cap && over_ppl < 1.1 && t_train < 300.0 && t_over < 300.0;
    return {ok, fmt("dev perplexity %.4f vs %.1f cap in %.0fs; "
                    "one-dialogue perplexity %.4f vs 1.1 target in %.0fs",
                    dev_ppl, cap, t_train, over_ppl, t_over)};
  });

  criterion(4, "specificity-direction", [&]() -> std::pair<bool, std::string> {
    need_setup();
    timed_cmd(
        "train --corpus corpus.jsonl --vocab vocab.txt --out model25.bin "
        "--objective xent --epochs 25 --lr 0.002 --seed 7");
    double t_rf = timed_cmd(
        "train --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt --out rf.bin "
        "--objective idf-reinforce --init-checkpoint model25.bin --epochs 2 "
        "--lr 0.00003 --baseline 2.0 --seed 7 --set train.decode_max_len=12");
    run_cmd(
        "eval-gen --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint model25.bin --split test --max-len 12 --report base_eval.txt");
    run_cmd(
        "eval-gen --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint rf.bin --split test --max-len 12 --report rf_eval.txt");
    sh.base_bleu = report_value("base_eval.txt", "bleu4");
    sh.base_idf = report_value("base_eval.txt", "corpus_idf");
    double rf_bleu = report_value("rf_eval.txt", "bleu4");
    double rf_idf = report_value("rf_eval.txt", "corpus_idf");

    bool ok = rf_idf > sh.base_idf && rf_bleu >= 0.9 * sh.base_bleu && t_rf < 300.0;
    return {ok, fmt("idf %.4f -> %.4f, bleu %.4f -> %.4f (%.1f%% of base), "
                    "fine-tune %.0fs",
                    sh.base_idf, rf_idf, sh.base_bleu, rf_bleu,
                    100.0 * rf_bleu / sh.base_bleu, t_rf)};
  });

  criterion(5, "sampling-specificity-gap", [&]() -> std::pair<bool, std::string> {
    need_setup();
    if (!std::isfinite(sh.base_idf))
      throw std::runtime_error("greedy baseline metrics unavailable");
    run_cmd(
        "eval-gen --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint model25.bin --split test --sample --seed 7 --max-len 12 "
        "--report sample_eval.txt");
    double sampled_idf = report_value("sample_eval.txt", "corpus_idf");

    std::vector<Sentence> train_refs;
    for (const auto& d : sh.split.train)
      for (const auto& t : d.turns) train_refs.push_back(tokenize(t.agent));
    double target = idf_corpus(train_refs, sh.idf);

    double gap_sampled = std::fabs(sampled_idf - target);
    double gap_greedy = std::fabs(sh.base_idf - target);
    bool ok = gap_sampled < gap_greedy;
    return {ok, fmt("reference idf %.4f; sampled %.4f (gap %.4f) vs greedy %.4f (gap %.4f)",
                    target, sampled_idf, gap_sampled, sh.base_idf, gap_greedy)};
  });

  criterion(6, "search-and-rerank-exactness", check_search_and_rerank);

  criterion(7, "metric-oracles", [&]() -> std::pair<bool, std::string> {
    need_setup();
    return check_metric_oracles(sh);
  });

  criterion(8, "retrieval-direction", [&]() -> std::pair<bool, std::string> {
    need_setup();
    double t0 = now_seconds();
    run_cmd("synth-corpus --n 400 --seed 9 --out ret.jsonl");
    RawCorpus ret_raw = read_corpus_file("ret.jsonl");
    std::vector<RetrievalInstance> instances = build_instances(ret_raw, 10, 7);
    if (instances.size() < 1000)
      throw std::runtime_error("too few retrieval instances: " +
                               std::to_string(instances.size()));
    instances.resize(1000);
    write_instances_file("inst1000.jsonl", instances);

    timed_cmd(
        "train --corpus corpus.jsonl --vocab vocab.txt --out rank1.bin "
        "--objective rank --init-checkpoint model25.bin --epochs 1 --lr 0.0001 "
        "--negatives 9 --seed 7");
    run_cmd(
        "tune-weight --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint rank1.bin --split dev --n-candidates 10 --seed 7 "
        "--report tune.txt");
    double weight = report_value("tune.txt", "retrieval.weight");
    run_cmd(fmt(
        "eval-ret --instances inst1000.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint rank1.bin --mode all --weight %.6f --n-candidates 10 "
        "--report ret_eval.txt",
        weight));
    double r_tfidf = report_value("ret_eval.txt", "tfidf.r@1");
    double r_awi = report_value("ret_eval.txt", "awi.r@1");
    double r_interp = report_value("ret_eval.txt", "interpolated.r@1");

    Rng rng(5);
    std::vector<std::vector<size_t>> rankings;
    std::vector<size_t> positives;
    for (const auto& inst : instances) {
      std::vector<size_t> order(inst.candidates.size());
      std::iota(order.begin(), order.end(), size_t(0));
      rng.shuffle(order);
      rankings.push_back(order);
      positives.push_back(inst.positive_index);
    }
    double r_random = recall_at_k(rankings, positives, 1);

    double secs = now_seconds() - t0;
    bool ok = r_awi > r_tfidf && r_interp >= r_awi && r_interp >= r_tfidf &&
              std::fabs(r_random - 0.10) <= 0.03 && secs < 300.0;
    return {ok, fmt("recall@1 tfidf %.4f, model %.4f, interpolated %.4f "
                    "(weight %.2f), random control %.4f, %.0fs",
                    r_tfidf, r_awi, r_interp, weight, r_random, secs)};
  });

  criterion(9, "determinism", [&]() -> std::pair<bool, std::string> {
    need_setup();
    std::string train_args =
        " --corpus corpus.jsonl --vocab vocab.txt --objective xent --epochs 2 "
        "--lr 0.002 --seed 7";
    run_cmd("train --out det_a.bin --report det_a.txt" + train_args, "AWI_THREADS=1 ");
    run_cmd("train --out det_b.bin --report det_b.txt" + train_args, "AWI_THREADS=1 ");
    bool train_same = read_file("det_a.bin") == read_file("det_b.bin") &&
                      read_file("det_a.txt") == read_file("det_b.txt");

    std::string eval_args =
        "eval-gen --corpus corpus.jsonl --vocab vocab.txt --idf idf.txt "
        "--checkpoint m10.bin --split dev --max-len 12 --report ";
    run_cmd(eval_args + "eg_a.txt", "AWI_THREADS=1 ");
    run_cmd(eval_args + "eg_b.txt", "AWI_THREADS=1 ");
    std::string ea = read_file("eg_a.txt");
    bool eval_same = !ea.empty() && ea == read_file("eg_b.txt");

    bool ok = train_same && eval_same;
    return {ok, fmt("repeated training byte-identical: %s (%zu-byte checkpoint); "
                    "repeated evaluation byte-identical: %s",
                    train_same ? "yes" : "no", read_file("det_a.bin").size(),
                    eval_same ? "yes" : "no")};
  });

  criterion(10, "checkpoint-round-trip", [&]() -> std::pair<bool, std::string> {
    need_setup();
    uint64_t checksum = 0;
    AwiParams a = load_checkpoint("m10.bin", &checksum);
    double p1 = perplexity(a, sh.dev, 16);
    save_checkpoint("m10_copy.bin", a, checksum);
    AwiParams b = load_checkpoint("m10_copy.bin");

    auto na = a.named();
    auto nb = b.named();
    bool tensors_same = na.size() == nb.size();
    for (size_t i = 0; tensors_same && i < na.size(); ++i)
      tensors_same = na[i].second->shape == nb[i].second->shape &&
                     na[i].second->data == nb[i].second->data;
    double p2 = perplexity(b, sh.dev, 16);

    bool ok = tensors_same && p1 == p2;
    return {ok, fmt("dev perplexity %.10f, reloaded %.10f, bit-exact: %s, "
                    "tensors identical: %s",
                    p1, p2, p1 == p2 ? "yes" : "no", tensors_same ? "yes" : "no")};
  });

  std::printf("%d of 10 criteria passed\n", 10 - g_failures);
  return g_failures;
}
