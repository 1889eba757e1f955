#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "awi/chat.hpp"
#include "awi/config.hpp"
#include "awi/corpus.hpp"
#include "awi/decoding.hpp"
#include "awi/metrics.hpp"
#include "awi/model.hpp"
#include "awi/retrieval.hpp"
#include "awi/rng.hpp"
#include "awi/specificity.hpp"
#include "awi/synth.hpp"
#include "awi/training.hpp"
#include "vendor/CLI11.hpp"

namespace {

using namespace awi;

// --config and --set are applied before the regular flag pass so that
// dedicated flags always win over file values.
ExperimentConfig preload_config(int argc, char** argv) {
  ExperimentConfig cfg;
  std::vector<std::string> sets;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) {
      cfg = load_config(argv[++i]);
    } else if (a.rfind("--config=", 0) == 0) {
      cfg = load_config(a.substr(9));
    } else if (a == "--set" && i + 1 < argc) {
      sets.push_back(argv[++i]);
    } else if (a.rfind("--set=", 0) == 0) {
      sets.push_back(a.substr(6));
    }
  }
  for (const std::string& s : sets) {
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got: " + s);
    config_set(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  return cfg;
}

void register_passthrough(CLI::App* sub) {
  static std::string sink_config;
  static std::vector<std::string> sink_sets;
  sub->add_option("--config", sink_config, "experiment config file");
  sub->add_option("--set", sink_sets, "override one config key=value");
}

size_t thread_cap() {
  const char* env = std::getenv("AWI_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*env == '\0' || *end != '\0' || v < 1)
    throw std::invalid_argument("AWI_THREADS must be a positive integer");
  return size_t(v);
}

// ==== resource loading ====

RawCorpus need_corpus(const ExperimentConfig& cfg) {
  if (cfg.paths.corpus.empty())
    throw std::invalid_argument("missing corpus path (--corpus / paths.corpus)");
  return read_corpus_file(cfg.paths.corpus);
}

Vocabulary need_vocab(const ExperimentConfig& cfg) {
  if (cfg.paths.vocab.empty())
    throw std::invalid_argument("missing vocabulary path (--vocab / paths.vocab)");
  return Vocabulary::load(cfg.paths.vocab);
}

IdfTable need_idf(const ExperimentConfig& cfg) {
  if (cfg.paths.idf.empty())
    throw std::invalid_argument("missing idf table path (--idf / paths.idf)");
  return IdfTable::load(cfg.paths.idf);
}

AwiParams load_model(const std::string& path, const Vocabulary& vocab) {
  if (path.empty()) throw std::invalid_argument("missing checkpoint path");
  uint64_t checksum = 0;
  AwiParams params = load_checkpoint(path, &checksum);
  if (checksum != vocab.checksum())
    throw std::runtime_error(path + ": field vocab_checksum does not match the vocabulary");
  if (params.config.vocab != vocab.size())
    throw std::runtime_error(path + ": field model.vocab (" +
                             std::to_string(params.config.vocab) +
                             ") does not match the vocabulary size (" +
                             std::to_string(vocab.size()) + ")");
  return params;
}

// ==== split selection ====

struct SplitFlags {
  double dev_frac = 0.1;
  double test_frac = 0.1;
  uint64_t split_seed = 13;
  std::string use = "test";
};

void register_split_flags(CLI::App* sub, SplitFlags& f, const std::string& def_use) {
  f.use = def_use;
  sub->add_option("--dev-frac", f.dev_frac, "dev split fraction");
  sub->add_option("--test-frac", f.test_frac, "test split fraction");
  sub->add_option("--split-seed", f.split_seed, "split assignment seed");
  sub->add_option("--split", f.use, "which part to use: train|dev|test|all");
}

RawCorpus pick_split(const RawCorpus& all, const SplitFlags& f) {
  if (f.use == "all") return all;
  CorpusSplit s = split_corpus(all, f.dev_frac, f.test_frac, f.split_seed);
  if (f.use == "train") return s.train;
  if (f.use == "dev") return s.dev;
  if (f.use == "test") return s.test;
  throw std::invalid_argument("unknown --split value: " + f.use);
}

// ==== decoding over a corpus ====

void register_decode_flags(CLI::App* sub, DecodeConfig& d) {
  sub->add_option("--beam", d.beam_width, "beam width");
  sub->add_option("--max-len", d.max_len, "maximum decode length");
  sub->add_option("--rerank-idf", d.rerank_idf, "idf rerank weight (0 = off)");
  sub->add_option("--rerank-backward", d.rerank_backward,
                  "backward-likelihood rerank weight (0 = off)");
  sub->add_flag("--sample", d.sample, "sample instead of search");
}

std::vector<int32_t> strip_trailing_eos(std::vector<int32_t> tokens) {
  if (!tokens.empty() && tokens.back() == Vocabulary::kEos) tokens.pop_back();
  return tokens;
}

void attach_aux(NBestList& nbest, const Vocabulary& vocab, const IdfTable* idf,
                const AwiParams* backward, const std::vector<int32_t>& source) {
  for (Hypothesis& h : nbest.hyps) {
    if (idf) h.aux["idf"] = idf_sentence(vocab.surface(h.tokens), *idf);
    if (backward)
      h.aux["backward-llk"] =
          backward_score(*backward, strip_trailing_eos(h.tokens), source);
  }
}

// Decodes every turn with history teacher-forced on the corpus itself, so a
// chat transcript run through this reproduces the live session.
RawCorpus decode_corpus(const AwiParams& params, const Vocabulary& vocab,
                        const RawCorpus& raw, const DecodeConfig& dcfg,
                        const IdfTable* idf, const AwiParams* backward,
                        uint64_t seed, std::ostream* nbest_out) {
  if (dcfg.rerank_idf != 0.0 && dcfg.rerank_backward != 0.0)
    throw std::invalid_argument("choose one rerank kind: --rerank-idf or --rerank-backward");
  if (dcfg.rerank_idf != 0.0 && !idf)
    throw std::invalid_argument("--rerank-idf needs --idf");

  Corpus enc = encode_corpus(raw, vocab);
  Rng rng(seed);
  RawCorpus out = raw;
  for (size_t di = 0; di < enc.size(); ++di) {
    AwiState state = AwiState::zero(params.config);
    std::vector<int32_t> prev;
    for (size_t t = 0; t < enc[di].turns.size(); ++t) {
      const Turn& turn = enc[di].turns[t];
      std::vector<int32_t> tokens;
      bool want_nbest = nbest_out != nullptr;
      bool want_rerank = dcfg.rerank_idf != 0.0 || dcfg.rerank_backward != 0.0;

      if (dcfg.sample) {
        tokens = sample_decode(params, state, turn.user, prev, dcfg.max_len, rng).tokens;
      } else if (want_rerank || want_nbest || dcfg.beam_width > 1) {
        size_t width = std::max<size_t>(dcfg.beam_width, want_rerank || want_nbest ? 8 : 1);
        NBestList nbest = beam_search(params, state, turn.user, prev, width, dcfg.max_len);
        nbest.turn_id = raw[di].id + "#" + std::to_string(t);
        attach_aux(nbest, vocab, idf, backward, turn.user);
        if (dcfg.rerank_idf != 0.0) nbest = rerank(nbest, dcfg.rerank_idf, "idf");
        if (dcfg.rerank_backward != 0.0)
          nbest = rerank(nbest, dcfg.rerank_backward, "backward-llk");
        if (nbest_out)
          for (const Hypothesis& h : nbest.hyps)
            *nbest_out << nbest_dump_line(nbest, h, vocab) << "\n";
        tokens = nbest.hyps.front().tokens;
      } else {
        tokens = greedy_decode(params, state, turn.user, prev, dcfg.max_len).tokens;
      }

      out[di].turns[t].agent = detokenize(vocab.surface(tokens));
      EncodedTurn e = encode_turn(params, turn.user, prev);
      state = intention_step(params, state, e);
      prev = turn.agent;
    }
  }
  return out;
}

void write_report(const std::string& path, const std::vector<std::string>& lines) {
  for (const std::string& l : lines) std::cout << l << "\n";
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  for (const std::string& l : lines) out << l << "\n";
}

std::string metric_line(const std::string& name, double value) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s = %.6f", name.c_str(), value);
  return buf;
}

// ==== subcommands ====

void cmd_synth_corpus(const ExperimentConfig& cfg, size_t n, double specific_prob) {
  if (cfg.paths.corpus.empty())
    throw std::invalid_argument("missing output path (--out / paths.corpus)");
  SynthConfig scfg;
  scfg.n_dialogues = n;
  scfg.seed = cfg.seed;
  scfg.specific_prob = specific_prob;
  RawCorpus corpus = synth_generate(scfg);
  write_corpus_file(cfg.paths.corpus, corpus);
  std::cout << "wrote " << corpus.size() << " dialogues to "
            << cfg.paths.corpus << "\n";
}

void cmd_build_vocab(const ExperimentConfig& cfg, size_t min_count, size_t max_size) {
  RawCorpus corpus = need_corpus(cfg);
  if (cfg.paths.vocab.empty())
    throw std::invalid_argument("missing output path (--out / paths.vocab)");
  Vocabulary vocab = Vocabulary::build(corpus, min_count, max_size);
  vocab.save(cfg.paths.vocab);
  std::cout << "vocabulary of " << vocab.size() << " entries written to "
            << cfg.paths.vocab << "\n";
}

void cmd_build_idf(const ExperimentConfig& cfg, const std::string& unit) {
  RawCorpus corpus = need_corpus(cfg);
  if (cfg.paths.idf.empty())
    throw std::invalid_argument("missing output path (--out / paths.idf)");
  std::vector<Sentence> docs;
  for (const RawDialogue& d : corpus)
    for (const RawTurn& t : d.turns) {
      if (unit == "all") docs.push_back(tokenize(t.user));
      docs.push_back(tokenize(t.agent));
    }
  if (unit != "agent" && unit != "all")
    throw std::invalid_argument("--unit must be agent or all");
  IdfTable idf = IdfTable::build(docs);
  idf.save(cfg.paths.idf);
  std::cout << "idf table over " << docs.size() << " documents written to "
            << cfg.paths.idf << "\n";
}

void cmd_train(ExperimentConfig& cfg, const SplitFlags& split,
               const std::string& init_checkpoint, bool swap_roles) {
  RawCorpus raw = need_corpus(cfg);
  if (swap_roles)
    for (RawDialogue& d : raw)
      for (RawTurn& t : d.turns) std::swap(t.user, t.agent);
  Vocabulary vocab = need_vocab(cfg);
  if (cfg.paths.checkpoint.empty())
    throw std::invalid_argument("missing output path (--out / paths.checkpoint)");

  CorpusSplit s = split_corpus(raw, split.dev_frac, split.test_frac, split.split_seed);
  Corpus train = encode_corpus(s.train, vocab);
  // with no held-out dialogues the training set doubles as the dev set
  Corpus dev = s.dev.empty() ? train : encode_corpus(s.dev, vocab);

  if (cfg.model.vocab == 0) cfg.model.vocab = vocab.size();
  if (cfg.model.vocab != vocab.size())
    throw std::invalid_argument("model.vocab (" + std::to_string(cfg.model.vocab) +
                                ") does not match the vocabulary size (" +
                                std::to_string(vocab.size()) + ")");
  cfg.model.validate();

  AwiParams params = init_checkpoint.empty()
                         ? AwiParams::init(cfg.model, cfg.seed)
                         : load_model(init_checkpoint, vocab);

  TrainReport report;
  switch (cfg.train.objective) {
    case Objective::xent:
      report = train_xent(params, train, dev, cfg.train);
      break;
    case Objective::idf_reinforce: {
      if (init_checkpoint.empty())
        throw std::invalid_argument(
            "idf-reinforce needs --init-checkpoint with a cross-entropy model");
      IdfTable idf = need_idf(cfg);
      report = train_idf_reinforce(params, train, dev, vocab, idf, cfg.train);
      break;
    }
    case Objective::rank:
      report = train_rank(params, train, dev, cfg.train);
      break;
  }

  save_checkpoint(cfg.paths.checkpoint, params, vocab.checksum());
  std::vector<std::string> lines;
  for (const EpochRecord& r : report.epochs) lines.push_back(report.epoch_line(r));
  lines.push_back(report.summary());
  write_report(cfg.paths.report, lines);
  std::cout << "checkpoint written to " << cfg.paths.checkpoint << "\n";
}

void cmd_generate(const ExperimentConfig& cfg, const SplitFlags& split,
                  const std::string& out_path, const std::string& nbest_path,
                  const std::string& backward_path) {
  RawCorpus raw = pick_split(need_corpus(cfg), split);
  Vocabulary vocab = need_vocab(cfg);
  AwiParams params = load_model(cfg.paths.checkpoint, vocab);
  if (out_path.empty()) throw std::invalid_argument("missing output path (--out)");

  std::optional<IdfTable> idf;
  if (!cfg.paths.idf.empty()) idf = need_idf(cfg);
  std::optional<AwiParams> backward;
  if (!backward_path.empty()) backward = load_model(backward_path, vocab);

  std::ofstream nbest_file;
  if (!nbest_path.empty()) {
    nbest_file.open(nbest_path);
    if (!nbest_file) throw std::runtime_error("cannot open for write: " + nbest_path);
  }

  RawCorpus decoded = decode_corpus(params, vocab, raw, cfg.decode,
                                    idf ? &*idf : nullptr,
                                    backward ? &*backward : nullptr, cfg.seed,
                                    nbest_path.empty() ? nullptr : &nbest_file);
  write_corpus_file(out_path, decoded);
  std::cout << "wrote " << decoded.size() << " decoded dialogues to "
            << out_path << "\n";
}

void cmd_chat(const ExperimentConfig& cfg, const std::string& transcript_path) {
  Vocabulary vocab = need_vocab(cfg);
  AwiParams params = load_model(cfg.paths.checkpoint, vocab);
  std::optional<IdfTable> idf;
  if (!cfg.paths.idf.empty()) idf = need_idf(cfg);

  ChatSession session(params, vocab, idf ? &*idf : nullptr, cfg.decode, cfg.seed);
  bool tty = isatty(fileno(stdin));
  std::string line;
  while (true) {
    if (tty) std::cout << "you> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    try {
      ChatSession::Reply reply = session.respond(line);
      if (reply.quit) break;
      if (reply.reset) {
        std::cout << "(state reset)\n";
        continue;
      }
      std::cout << "agent> " << reply.text << "\n";
    } catch (const std::exception& e) {
      std::cout << "error: " << e.what() << "\n";
    }
  }
  write_corpus_file(transcript_path, session.transcript());
  std::cout << "transcript written to " << transcript_path << "\n";
}

void cmd_retrieve(const ExperimentConfig& cfg, const SplitFlags& split,
                  const std::string& instances_path, const std::string& instances_out,
                  const std::string& out_path) {
  std::vector<RetrievalInstance> instances;
  if (!instances_path.empty()) {
    instances = read_instances_file(instances_path);
  } else {
    RawCorpus raw = pick_split(need_corpus(cfg), split);
    instances = build_instances(raw, cfg.retrieval.candidates, cfg.seed);
    if (!instances_out.empty()) write_instances_file(instances_out, instances);
  }
  if (out_path.empty()) throw std::invalid_argument("missing output path (--out)");

  RetrieveMode mode = parse_retrieve_mode(cfg.retrieval.mode);
  IdfTable idf = need_idf(cfg);
  std::optional<Vocabulary> vocab;
  std::optional<AwiParams> params;
  if (mode != RetrieveMode::tfidf) {
    vocab = need_vocab(cfg);
    params = load_model(cfg.paths.checkpoint, *vocab);
  }

  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for write: " + out_path);
  for (const RetrievalInstance& inst : instances) {
    std::vector<size_t> ranking =
        retrieve(inst, mode, idf, params ? &*params : nullptr,
                 vocab ? &*vocab : nullptr, cfg.retrieval.weight);
    out << inst.id << "\t" << inst.positive_index << "\t";
    for (size_t i = 0; i < ranking.size(); ++i) out << (i ? " " : "") << ranking[i];
    out << "\n";
  }
  std::cout << "ranked " << instances.size() << " instances to " << out_path << "\n";
}

void cmd_eval_gen(const ExperimentConfig& cfg, const SplitFlags& split,
                  const std::string& hypotheses_path, const std::string& backward_path) {
  RawCorpus refs = pick_split(need_corpus(cfg), split);
  Vocabulary vocab = need_vocab(cfg);
  IdfTable idf = need_idf(cfg);

  RawCorpus hyps;
  std::optional<AwiParams> params;
  if (!hypotheses_path.empty()) {
    hyps = read_corpus_file(hypotheses_path);
    if (hyps.size() != refs.size())
      throw std::invalid_argument("--hypotheses dialogue count does not match the corpus");
  } else {
    params = load_model(cfg.paths.checkpoint, vocab);
    std::optional<IdfTable> ridf;
    if (cfg.decode.rerank_idf != 0.0) ridf = idf;
    std::optional<AwiParams> backward;
    if (!backward_path.empty()) backward = load_model(backward_path, vocab);
    hyps = decode_corpus(*params, vocab, refs, cfg.decode, ridf ? &*ridf : &idf,
                         backward ? &*backward : nullptr, cfg.seed, nullptr);
  }

  std::vector<std::vector<std::string>> hyp_tokens, ref_tokens;
  std::vector<Sentence> hyp_sentences;
  for (size_t d = 0; d < refs.size(); ++d) {
    if (hyps[d].turns.size() != refs[d].turns.size())
      throw std::invalid_argument("hypothesis/reference turn count mismatch in dialogue " +
                                  refs[d].id);
    for (size_t t = 0; t < refs[d].turns.size(); ++t) {
      hyp_tokens.push_back(tokenize(hyps[d].turns[t].agent));
      ref_tokens.push_back(tokenize(refs[d].turns[t].agent));
      hyp_sentences.push_back(hyp_tokens.back());
    }
  }

  std::vector<std::string> lines;
  lines.push_back(metric_line("bleu4", bleu4(hyp_tokens, ref_tokens)));
  lines.push_back(metric_line("corpus_idf", idf_corpus(hyp_sentences, idf)));
  if (!cfg.paths.checkpoint.empty()) {
    if (!params) params = load_model(cfg.paths.checkpoint, vocab);
    lines.push_back(
        metric_line("perplexity", perplexity(*params, encode_corpus(refs, vocab),
                                             cfg.train.batch_size)));
  }
  write_report(cfg.paths.report, lines);
}

void cmd_eval_ret(const ExperimentConfig& cfg, const SplitFlags& split,
                  const std::string& instances_path) {
  std::vector<RetrievalInstance> instances;
  if (!instances_path.empty()) {
    instances = read_instances_file(instances_path);
  } else {
    RawCorpus raw = pick_split(need_corpus(cfg), split);
    instances = build_instances(raw, cfg.retrieval.candidates, cfg.seed);
  }
  IdfTable idf = need_idf(cfg);

  std::vector<std::string> modes;
  if (cfg.retrieval.mode == "all") modes = {"tfidf", "awi", "interpolated"};
  else modes = {cfg.retrieval.mode};

  std::optional<Vocabulary> vocab;
  std::optional<AwiParams> params;
  bool needs_model = false;
  for (const std::string& m : modes)
    if (m != "tfidf") needs_model = true;
  if (needs_model) {
    vocab = need_vocab(cfg);
    params = load_model(cfg.paths.checkpoint, *vocab);
  }

  std::vector<size_t> ks = {1, 5, cfg.retrieval.candidates};
  std::vector<std::string> lines;
  for (const std::string& m : modes) {
    auto rates = recall_rates(instances, parse_retrieve_mode(m), idf,
                              params ? &*params : nullptr, vocab ? &*vocab : nullptr,
                              cfg.retrieval.weight, ks);
    for (const auto& [k, rate] : rates)
      lines.push_back(metric_line(m + ".r@" + std::to_string(k), rate));
  }
  write_report(cfg.paths.report, lines);
}

void cmd_tune_weight(const ExperimentConfig& cfg, const SplitFlags& split,
                     const std::string& kind, const std::string& instances_path,
                     const std::string& backward_path, double grid_lo, double grid_hi,
                     double grid_step) {
  std::vector<double> grid = mert_grid(grid_lo, grid_hi, grid_step);

  if (kind == "retrieval") {
    std::vector<RetrievalInstance> instances;
    if (!instances_path.empty()) {
      instances = read_instances_file(instances_path);
    } else {
      RawCorpus raw = pick_split(need_corpus(cfg), split);
      instances = build_instances(raw, cfg.retrieval.candidates, cfg.seed);
    }
    Vocabulary vocab = need_vocab(cfg);
    AwiParams params = load_model(cfg.paths.checkpoint, vocab);
    IdfTable idf = need_idf(cfg);
    double w = tune_retrieval_weight(instances, params, vocab, idf, grid);
    write_report(cfg.paths.report, {metric_line("retrieval.weight", w)});
    return;
  }

  if (kind != "rerank-idf" && kind != "rerank-backward")
    throw std::invalid_argument(
        "--kind must be retrieval, rerank-idf or rerank-backward");

  RawCorpus raw = pick_split(need_corpus(cfg), split);
  Vocabulary vocab = need_vocab(cfg);
  AwiParams params = load_model(cfg.paths.checkpoint, vocab);
  IdfTable idf = need_idf(cfg);
  std::optional<AwiParams> backward;
  if (kind == "rerank-backward") {
    if (backward_path.empty())
      throw std::invalid_argument("rerank-backward tuning needs --backward-checkpoint");
    backward = load_model(backward_path, vocab);
  }

  Corpus enc = encode_corpus(raw, vocab);
  std::vector<NBestList> lists;
  std::vector<std::vector<std::string>> references;
  size_t width = std::max<size_t>(cfg.decode.beam_width, 8);
  for (size_t di = 0; di < enc.size(); ++di) {
    AwiState state = AwiState::zero(params.config);
    std::vector<int32_t> prev;
    for (size_t t = 0; t < enc[di].turns.size(); ++t) {
      const Turn& turn = enc[di].turns[t];
      NBestList nbest =
          beam_search(params, state, turn.user, prev, width, cfg.decode.max_len);
      nbest.turn_id = raw[di].id + "#" + std::to_string(t);
      attach_aux(nbest, vocab, kind == "rerank-idf" ? &idf : nullptr,
                 backward ? &*backward : nullptr, turn.user);
      lists.push_back(std::move(nbest));
      references.push_back(tokenize(raw[di].turns[t].agent));
      EncodedTurn e = encode_turn(params, turn.user, prev);
      state = intention_step(params, state, e);
      prev = turn.agent;
    }
  }
  std::string score_kind = kind == "rerank-idf" ? "idf" : "backward-llk";
  double w = mert_tune(lists, references, grid, score_kind, vocab);
  write_report(cfg.paths.report, {metric_line(kind + ".weight", w)});
}

void cmd_dump_intention(const ExperimentConfig& cfg, const SplitFlags& split,
                        const std::string& out_path) {
  RawCorpus raw = pick_split(need_corpus(cfg), split);
  Vocabulary vocab = need_vocab(cfg);
  AwiParams params = load_model(cfg.paths.checkpoint, vocab);
  if (out_path.empty()) throw std::invalid_argument("missing output path (--out)");

  std::vector<std::string> lines = export_intention(params, encode_corpus(raw, vocab));
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open for write: " + out_path);
  for (const std::string& l : lines) out << l << "\n";
  std::cout << "wrote " << lines.size() << " intention vectors to " << out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  try {
    thread_cap();  // validated up front; all current pipelines run one worker
    ExperimentConfig cfg = preload_config(argc, argv);

    CLI::App app{"attention-with-intention conversation model"};
    app.require_subcommand(1);
    register_passthrough(&app);

    auto add_seed = [&](CLI::App* sub) {
      CLI::Option* opt = sub->add_option("--seed", cfg.seed, "random seed");
      sub->parse_complete_callback([&cfg, opt] {
        if (opt->count()) cfg.train.seed = cfg.seed;
      });
      register_passthrough(sub);
    };

    // synth-corpus
    auto* synth = app.add_subcommand("synth-corpus", "generate the synthetic helpdesk corpus");
    size_t synth_n = 1000;
    double synth_specific = 0.55;
    synth->add_option("--n", synth_n, "number of dialogues");
    synth->add_option("--specific-prob", synth_specific, "chance of code/url turns");
    synth->add_option("--out", cfg.paths.corpus, "corpus output path");
    add_seed(synth);
    synth->callback([&] { cmd_synth_corpus(cfg, synth_n, synth_specific); });

    // build-vocab
    auto* bvocab = app.add_subcommand("build-vocab", "build the vocabulary table");
    size_t min_count = 1, max_size = SIZE_MAX;
    bvocab->add_option("--corpus", cfg.paths.corpus, "corpus path");
    bvocab->add_option("--out", cfg.paths.vocab, "vocabulary output path");
    bvocab->add_option("--min-count", min_count, "minimum token count");
    bvocab->add_option("--max-size", max_size, "maximum vocabulary size");
    add_seed(bvocab);
    bvocab->callback([&] { cmd_build_vocab(cfg, min_count, max_size); });

    // build-idf
    auto* bidf = app.add_subcommand("build-idf", "build the idf table");
    std::string idf_unit = "agent";
    bidf->add_option("--corpus", cfg.paths.corpus, "corpus path");
    bidf->add_option("--out", cfg.paths.idf, "idf table output path");
    bidf->add_option("--unit", idf_unit, "document unit: agent|all");
    add_seed(bidf);
    bidf->callback([&] { cmd_build_idf(cfg, idf_unit); });

    // train
    auto* train = app.add_subcommand("train", "train a model");
    SplitFlags train_split;
    std::string init_checkpoint, objective_name_flag, baseline_flag;
    bool swap_roles = false;
    train->add_option("--corpus", cfg.paths.corpus, "corpus path");
    train->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    train->add_option("--idf", cfg.paths.idf, "idf table path (reinforce objective)");
    train->add_option("--out", cfg.paths.checkpoint, "checkpoint output path");
    train->add_option("--report", cfg.paths.report, "per-epoch report path");
    train->add_option("--objective", objective_name_flag, "xent|idf-reinforce|rank");
    train->add_option("--epochs", cfg.train.max_epochs, "maximum epochs");
    train->add_option("--batch-size", cfg.train.batch_size, "dialogues per batch");
    train->add_option("--lr", cfg.train.optimizer.learning_rate, "learning rate");
    train->add_option("--clip", cfg.train.clip_norm, "gradient clipping norm");
    train->add_option("--baseline", baseline_flag,
                      "reinforce baseline: number or mean-train-idf");
    train->add_flag("--on-sampled", cfg.train.reinforce_on_sampled,
                    "reinforce on the sampled sequence");
    train->add_option("--negatives", cfg.train.negatives_per_positive,
                      "rank negatives per positive");
    train->add_option("--init-checkpoint", init_checkpoint, "warm start checkpoint");
    train->add_flag("--swap-roles", swap_roles,
                    "swap user/agent sides (backward model training)");
    register_split_flags(train, train_split, "train");
    add_seed(train);
    train->callback([&] {
      if (!objective_name_flag.empty())
        cfg.train.objective = parse_objective(objective_name_flag);
      if (!baseline_flag.empty()) config_set(cfg, "train.baseline", baseline_flag);
      cmd_train(cfg, train_split, init_checkpoint, swap_roles);
    });

    // generate
    auto* gen = app.add_subcommand("generate", "decode responses for a corpus");
    SplitFlags gen_split;
    std::string gen_out, gen_nbest, gen_backward;
    gen->add_option("--corpus", cfg.paths.corpus, "corpus path");
    gen->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    gen->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    gen->add_option("--idf", cfg.paths.idf, "idf table (for reranking/aux scores)");
    gen->add_option("--out", gen_out, "decoded corpus output path");
    gen->add_option("--nbest-out", gen_nbest, "n-best dump path");
    gen->add_option("--backward-checkpoint", gen_backward, "backward model checkpoint");
    register_split_flags(gen, gen_split, "all");
    register_decode_flags(gen, cfg.decode);
    add_seed(gen);
    gen->callback([&] { cmd_generate(cfg, gen_split, gen_out, gen_nbest, gen_backward); });

    // chat
    auto* chat = app.add_subcommand("chat", "interactive session");
    std::string transcript_path = "chat-transcript.jsonl";
    chat->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    chat->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    chat->add_option("--idf", cfg.paths.idf, "idf table (for --rerank-idf)");
    chat->add_option("--transcript", transcript_path, "transcript output path");
    register_decode_flags(chat, cfg.decode);
    add_seed(chat);
    chat->callback([&] { cmd_chat(cfg, transcript_path); });

    // retrieve
    auto* ret = app.add_subcommand("retrieve", "rank response candidates");
    SplitFlags ret_split;
    std::string ret_instances, ret_instances_out, ret_out;
    ret->add_option("--corpus", cfg.paths.corpus, "corpus path (to build instances)");
    ret->add_option("--instances", ret_instances, "existing instances file");
    ret->add_option("--instances-out", ret_instances_out, "write built instances here");
    ret->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    ret->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    ret->add_option("--idf", cfg.paths.idf, "idf table path");
    ret->add_option("--mode", cfg.retrieval.mode, "tfidf|awi|interpolated");
    ret->add_option("--weight", cfg.retrieval.weight, "interpolation weight");
    ret->add_option("--n-candidates", cfg.retrieval.candidates, "candidates per instance");
    ret->add_option("--out", ret_out, "ranking output path");
    register_split_flags(ret, ret_split, "test");
    add_seed(ret);
    ret->callback([&] {
      cmd_retrieve(cfg, ret_split, ret_instances, ret_instances_out, ret_out);
    });

    // eval-gen
    auto* egen = app.add_subcommand("eval-gen", "generation metrics");
    SplitFlags egen_split;
    std::string egen_hyps, egen_backward;
    egen->add_option("--corpus", cfg.paths.corpus, "reference corpus path");
    egen->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    egen->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    egen->add_option("--idf", cfg.paths.idf, "idf table path");
    egen->add_option("--hypotheses", egen_hyps, "pre-decoded corpus (skips decoding)");
    egen->add_option("--backward-checkpoint", egen_backward, "backward model checkpoint");
    egen->add_option("--report", cfg.paths.report, "metric report path");
    register_split_flags(egen, egen_split, "test");
    register_decode_flags(egen, cfg.decode);
    add_seed(egen);
    egen->callback([&] { cmd_eval_gen(cfg, egen_split, egen_hyps, egen_backward); });

    // eval-ret
    auto* eret = app.add_subcommand("eval-ret", "retrieval recall metrics");
    SplitFlags eret_split;
    std::string eret_instances;
    eret->add_option("--corpus", cfg.paths.corpus, "corpus path (to build instances)");
    eret->add_option("--instances", eret_instances, "existing instances file");
    eret->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    eret->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    eret->add_option("--idf", cfg.paths.idf, "idf table path");
    eret->add_option("--mode", cfg.retrieval.mode, "tfidf|awi|interpolated|all");
    eret->add_option("--weight", cfg.retrieval.weight, "interpolation weight");
    eret->add_option("--n-candidates", cfg.retrieval.candidates, "candidates per instance");
    eret->add_option("--report", cfg.paths.report, "metric report path");
    register_split_flags(eret, eret_split, "test");
    add_seed(eret);
    eret->callback([&] { cmd_eval_ret(cfg, eret_split, eret_instances); });

    // tune-weight
    auto* tune = app.add_subcommand("tune-weight", "grid-search an interpolation weight");
    SplitFlags tune_split;
    std::string tune_kind = "retrieval", tune_instances, tune_backward;
    double grid_lo = -1.0, grid_hi = -1.0, grid_step = -1.0;
    tune->add_option("--kind", tune_kind, "retrieval|rerank-idf|rerank-backward");
    tune->add_option("--corpus", cfg.paths.corpus, "corpus path");
    tune->add_option("--instances", tune_instances, "existing instances file");
    tune->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    tune->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    tune->add_option("--idf", cfg.paths.idf, "idf table path");
    tune->add_option("--backward-checkpoint", tune_backward, "backward model checkpoint");
    tune->add_option("--grid-lo", grid_lo, "grid start");
    tune->add_option("--grid-hi", grid_hi, "grid end");
    tune->add_option("--grid-step", grid_step, "grid step");
    tune->add_option("--report", cfg.paths.report, "report path");
    tune->add_option("--beam", cfg.decode.beam_width, "beam width for n-best lists");
    tune->add_option("--max-len", cfg.decode.max_len, "maximum decode length");
    tune->add_option("--n-candidates", cfg.retrieval.candidates, "candidates per instance");
    register_split_flags(tune, tune_split, "dev");
    add_seed(tune);
    tune->callback([&] {
      // per-kind grid defaults: retrieval weights live on a larger scale
      // than rerank weights
      if (grid_lo < 0) grid_lo = 0.0;
      if (grid_hi < 0) grid_hi = tune_kind == "retrieval" ? 10.0 : 0.5;
      if (grid_step < 0) grid_step = tune_kind == "retrieval" ? 0.25 : 0.005;
      cmd_tune_weight(cfg, tune_split, tune_kind, tune_instances, tune_backward,
                      grid_lo, grid_hi, grid_step);
    });

    // dump-intention
    auto* dump = app.add_subcommand("dump-intention", "write per-turn intention vectors");
    SplitFlags dump_split;
    std::string dump_out;
    dump->add_option("--corpus", cfg.paths.corpus, "corpus path");
    dump->add_option("--vocab", cfg.paths.vocab, "vocabulary path");
    dump->add_option("--checkpoint", cfg.paths.checkpoint, "model checkpoint");
    dump->add_option("--out", dump_out, "output path");
    register_split_flags(dump, dump_split, "all");
    add_seed(dump);
    dump->callback([&] { cmd_dump_intention(cfg, dump_split, dump_out); });

    CLI11_PARSE(app, argc, argv);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
