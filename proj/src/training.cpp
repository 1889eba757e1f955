#include "awi/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "awi/decoding.hpp"
#include "awi/metrics.hpp"
#include "awi/model_graph.hpp"
#include "awi/rng.hpp"

namespace awi {

// ==== configuration ====

Objective parse_objective(const std::string& name) {
  if (name == "xent") return Objective::xent;
  if (name == "idf-reinforce") return Objective::idf_reinforce;
  if (name == "rank") return Objective::rank;
  throw std::invalid_argument("unknown training objective: " + name);
}

std::string objective_name(Objective objective) {
  switch (objective) {
    case Objective::xent: return "xent";
    case Objective::idf_reinforce: return "idf-reinforce";
    case Objective::rank: return "rank";
  }
  throw std::logic_error("objective_name: bad enum");
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("train config: max_epochs < 1");
  if (batch_size < 1) throw std::invalid_argument("train config: batch_size < 1");
  if (clip_norm <= 0.0) throw std::invalid_argument("train config: clip_norm <= 0");
  if (optimizer.learning_rate <= 0.0)
    throw std::invalid_argument("train config: learning_rate <= 0");
  if (decode_max_len < 1) throw std::invalid_argument("train config: decode_max_len < 1");
  if (negatives_per_positive < 1)
    throw std::invalid_argument("train config: negatives_per_positive < 1");
}

// ==== reporting ====

std::string TrainReport::epoch_line(const EpochRecord& r) const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "epoch=%zu objective=%s train_loss=%.6f dev_ppl=%.4f lr=%.6g",
                r.epoch, objective_name(objective).c_str(), r.train_loss,
                r.dev_perplexity, r.learning_rate);
  std::string line = buf;
  if (objective == Objective::idf_reinforce) {
    std::snprintf(buf, sizeof buf, " mean_gen_idf=%.4f skipped=%zu",
                  r.mean_generated_idf, r.skipped_rewards);
    line += buf;
  }
  if (objective == Objective::rank) {
    std::snprintf(buf, sizeof buf, " mean_margin=%.6f", r.mean_margin);
    line += buf;
  }
  return line;
}

std::string TrainReport::summary() const {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%s: %zu epochs, best dev perplexity %.4f at epoch %zu",
                objective_name(objective).c_str(), epochs.size(),
                best_dev_perplexity, best_epoch);
  return buf;
}

// ==== schedule ====

double lr_schedule_update(double prev_dev_ppl, double new_dev_ppl, double lr) {
  if (lr <= 0.0) throw std::invalid_argument("lr_schedule_update: lr <= 0");
  return new_dev_ppl > prev_dev_ppl ? lr * 0.5 : lr;
}

// ==== shared machinery ====

namespace {

// Pulls gradients off the tape in staging order, clips the joint norm and
// applies one optimizer step.
void apply_gradients(AwiParams& params, Tape<float>& tape, const Staged<float>& sp,
                     RmsPropMomentum& opt, double clip_norm) {
  auto named = params.named();
  if (named.size() != sp.order.size())
    throw std::logic_error("apply_gradients: staged/parameter count mismatch");

  std::vector<Tensor<float>> grads;
  grads.reserve(sp.order.size());
  for (const auto& [name, id] : sp.order) grads.push_back(tape.grad(id));

  std::vector<Tensor<float>*> grad_ptrs;
  for (Tensor<float>& g : grads) grad_ptrs.push_back(&g);
  clip_global_norm(grad_ptrs, clip_norm);

  std::vector<std::string> names;
  std::vector<Tensor<float>*> param_ptrs;
  std::vector<const Tensor<float>*> grad_view;
  for (size_t i = 0; i < sp.order.size(); ++i) {
    if (named[i].first != sp.order[i].first)
      throw std::logic_error("apply_gradients: parameter order mismatch at " +
                             named[i].first);
    names.push_back(sp.order[i].first);
    param_ptrs.push_back(named[i].second);
    grad_view.push_back(&grads[i]);
  }
  opt.step(names, param_ptrs, grad_view);
}

// Replaces one turn slice's padded target matrix; sources stay untouched.
void set_slice_targets(Batch::TurnSlice& slice,
                       const std::vector<std::vector<int32_t>>& targets) {
  size_t batch = targets.size();
  slice.max_target_len = 0;
  for (const auto& t : targets)
    slice.max_target_len = std::max(slice.max_target_len, t.size());
  if (slice.max_target_len == 0) slice.max_target_len = 1;
  slice.targets.assign(batch * slice.max_target_len, Vocabulary::kPad);
  slice.mask.assign(batch * slice.max_target_len, 0.0);
  for (size_t b = 0; b < batch; ++b)
    for (size_t n = 0; n < targets[b].size(); ++n) {
      slice.targets[b * slice.max_target_len + n] = targets[b][n];
      slice.mask[b * slice.max_target_len + n] = 1.0;
    }
}

double mean_train_target_idf(const Corpus& train, const Vocabulary& vocab,
                             const IdfTable& idf) {
  double sum = 0.0;
  size_t n = 0;
  for (const Dialogue& d : train)
    for (const Turn& t : d.turns) {
      sum += idf_sentence(vocab.surface(t.agent), idf);
      ++n;
    }
  if (n == 0) throw std::invalid_argument("reinforce baseline: empty training corpus");
  return sum / double(n);
}

}  // namespace

// ==== cross entropy ====

TrainReport train_xent(AwiParams& params, const Corpus& train, const Corpus& dev,
                       const TrainConfig& config) {
  config.validate();
  if (train.empty()) throw std::invalid_argument("train_xent: empty training corpus");

  RmsPropMomentum opt(config.optimizer);
  double lr = config.optimizer.learning_rate;
  TrainReport report;
  report.objective = Objective::xent;
  AwiParams best = params;
  double best_ppl = std::numeric_limits<double>::infinity();
  double prev_ppl = std::numeric_limits<double>::infinity();

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<Batch> batches = batch_by_turns(train, config.batch_size,
                                                config.seed + epoch);
    double total_ce = 0.0, total_tokens = 0.0;
    for (size_t bi = 0; bi < batches.size(); ++bi) {
      try {
        Tape<float> tape;
        Staged<float> sp = stage_params(tape, params);
        BatchLossGraph<float> graph = build_batch_loss(tape, sp, batches[bi]);
        double loss = double(tape.value(graph.loss).data[0]);
        if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
        tape.backward(graph.loss);
        apply_gradients(params, tape, sp, opt, config.clip_norm);
        total_ce += loss;
        total_tokens += graph.weighted_tokens;
      } catch (const std::exception& e) {
        throw std::runtime_error("train_xent: epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(bi) + ": " + e.what());
      }
    }

    double dev_ppl = perplexity(params, dev, config.batch_size);
    lr = lr_schedule_update(prev_ppl, dev_ppl, lr);
    opt.set_learning_rate(lr);
    prev_ppl = dev_ppl;
    if (dev_ppl < best_ppl) {
      best_ppl = dev_ppl;
      best = params;
      report.best_epoch = epoch;
    }
    report.epochs.push_back({epoch, total_ce / std::max(total_tokens, 1.0), dev_ppl,
                             lr, 0.0, 0.0, 0});
  }

  params = best;
  report.best_dev_perplexity = best_ppl;
  return report;
}

// ==== idf-rewarded reinforce ====

TrainReport train_idf_reinforce(AwiParams& params, const Corpus& train,
                                const Corpus& dev, const Vocabulary& vocab,
                                const IdfTable& idf, const TrainConfig& config) {
  config.validate();
  if (train.empty())
    throw std::invalid_argument("train_idf_reinforce: empty training corpus");

  double baseline = config.baseline_from_train_idf
                        ? mean_train_target_idf(train, vocab, idf)
                        : config.reinforce_baseline;

  RmsPropMomentum opt(config.optimizer);
  double lr = config.optimizer.learning_rate;
  TrainReport report;
  report.objective = Objective::idf_reinforce;
  double best_ppl = std::numeric_limits<double>::infinity();
  double prev_ppl = std::numeric_limits<double>::infinity();

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<Batch> batches = batch_by_turns(train, config.batch_size,
                                                config.seed + epoch);
    Rng sample_rng(config.seed * 0x9e3779b97f4a7c15ull + epoch);
    double loss_sum = 0.0, reward_sum = 0.0;
    size_t turn_count = 0, reward_count = 0, skipped = 0;

    for (size_t bi = 0; bi < batches.size(); ++bi) {
      Batch batch = batches[bi];
      std::vector<std::vector<double>> scale(batch.turn_count,
                                             std::vector<double>(batch.size(), 0.0));
      std::vector<std::vector<std::vector<int32_t>>> sampled(batch.turn_count);
      for (auto& s : sampled) s.resize(batch.size());

      for (size_t m = 0; m < batch.size(); ++m) {
        const Dialogue& dlg = train[batch.members[m]];
        AwiState state = AwiState::zero(params.config);
        std::vector<int32_t> prev;
        for (size_t t = 0; t < batch.turn_count; ++t) {
          const Turn& turn = dlg.turns[t];
          Hypothesis hyp =
              config.reinforce_on_sampled
                  ? sample_decode(params, state, turn.user, prev,
                                  config.decode_max_len, sample_rng)
                  : greedy_decode(params, state, turn.user, prev,
                                  config.decode_max_len);
          double reward = idf_sentence(vocab.surface(hyp.tokens), idf);
          if (!std::isfinite(reward)) {
            ++skipped;
          } else {
            scale[t][m] = reward - baseline;
            reward_sum += reward;
            ++reward_count;
          }
          if (config.reinforce_on_sampled) sampled[t][m] = hyp.tokens;

          EncodedTurn enc = encode_turn(params, turn.user, prev);
          state = intention_step(params, state, enc);
          prev = turn.agent;
          ++turn_count;
        }
      }

      if (config.reinforce_on_sampled)
        for (size_t t = 0; t < batch.turn_count; ++t)
          set_slice_targets(batch.turns[t], sampled[t]);

      try {
        Tape<float> tape;
        Staged<float> sp = stage_params(tape, params);
        BatchLossGraph<float> graph = build_batch_loss(tape, sp, batch, &scale);
        double loss = double(tape.value(graph.loss).data[0]);
        if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
        tape.backward(graph.loss);
        apply_gradients(params, tape, sp, opt, config.clip_norm);
        loss_sum += loss;
      } catch (const std::exception& e) {
        throw std::runtime_error("train_idf_reinforce: epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(bi) + ": " + e.what());
      }
    }

    double dev_ppl = perplexity(params, dev, config.batch_size);
    lr = lr_schedule_update(prev_ppl, dev_ppl, lr);
    opt.set_learning_rate(lr);
    prev_ppl = dev_ppl;
    best_ppl = std::min(best_ppl, dev_ppl);
    report.epochs.push_back({epoch, loss_sum / std::max<double>(double(turn_count), 1.0),
                             dev_ppl, lr,
                             reward_count ? reward_sum / double(reward_count) : 0.0, 0.0,
                             skipped});
    if (report.epochs.back().dev_perplexity == best_ppl) report.best_epoch = epoch;
  }

  report.best_dev_perplexity = best_ppl;
  return report;
}

// ==== ranking ====

namespace {

// All agent responses of a corpus, flattened for uniform negative sampling.
struct NegativePool {
  struct Entry {
    size_t dialogue;
    const std::vector<int32_t>* tokens;
  };
  std::vector<Entry> entries;

  explicit NegativePool(const Corpus& corpus) {
    for (size_t d = 0; d < corpus.size(); ++d)
      for (const Turn& t : corpus[d].turns) entries.push_back({d, &t.agent});
  }

  const std::vector<int32_t>& sample(size_t own_dialogue,
                                     const std::vector<int32_t>& positive,
                                     Rng& rng) const {
    for (size_t tries = 0; tries < 1000; ++tries) {
      const Entry& e = entries[rng.index(entries.size())];
      if (e.dialogue == own_dialogue || *e.tokens == positive) continue;
      return *e.tokens;
    }
    throw std::runtime_error(
        "rank objective: cannot sample a negative distinct from the positive");
  }
};

}  // namespace

TrainReport train_rank(AwiParams& params, const Corpus& train, const Corpus& dev,
                       const TrainConfig& config) {
  config.validate();
  if (train.size() < 2)
    throw std::invalid_argument("train_rank: need at least two dialogues to sample negatives");

  RmsPropMomentum opt(config.optimizer);
  double lr = config.optimizer.learning_rate;
  TrainReport report;
  report.objective = Objective::rank;
  double best_ppl = std::numeric_limits<double>::infinity();
  double prev_ppl = std::numeric_limits<double>::infinity();
  size_t k_neg = config.negatives_per_positive;
  NegativePool pool(train);

  for (size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<Batch> batches = batch_by_turns(train, config.batch_size,
                                                config.seed + epoch);
    Rng neg_rng(config.seed * 0x7f4a7c15ull + epoch);
    double margin_sum = 0.0;
    size_t turn_count = 0;

    for (size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      std::vector<std::vector<double>> pos_scale(batch.turn_count,
                                                 std::vector<double>(batch.size()));
      for (size_t t = 0; t < batch.turn_count; ++t)
        for (size_t m = 0; m < batch.size(); ++m) {
          const Turn& turn = train[batch.members[m]].turns[t];
          pos_scale[t][m] = 1.0 / double(turn.agent.size());
        }

      try {
        Tape<float> tape;
        Staged<float> sp = stage_params(tape, params);
        BatchLossGraph<float> pos = build_batch_loss(tape, sp, batch, &pos_scale);
        NodeId total = pos.loss;

        for (size_t k = 0; k < k_neg; ++k) {
          Batch neg_batch = batch;
          std::vector<std::vector<double>> neg_scale(
              batch.turn_count, std::vector<double>(batch.size()));
          for (size_t t = 0; t < batch.turn_count; ++t) {
            std::vector<std::vector<int32_t>> targets(batch.size());
            for (size_t m = 0; m < batch.size(); ++m) {
              const Turn& turn = train[batch.members[m]].turns[t];
              targets[m] = pool.sample(batch.members[m], turn.agent, neg_rng);
              neg_scale[t][m] = -1.0 / (double(k_neg) * double(targets[m].size()));
            }
            set_slice_targets(neg_batch.turns[t], targets);
          }
          BatchLossGraph<float> neg = build_batch_loss(tape, sp, neg_batch, &neg_scale);
          total = tape.add(total, neg.loss);
        }

        double loss = double(tape.value(total).data[0]);
        if (!std::isfinite(loss)) throw std::runtime_error("non-finite loss");
        tape.backward(total);
        apply_gradients(params, tape, sp, opt, config.clip_norm);
        margin_sum += -loss;
        turn_count += batch.size() * batch.turn_count;
      } catch (const std::exception& e) {
        throw std::runtime_error("train_rank: epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(bi) + ": " + e.what());
      }
    }

    double dev_ppl = perplexity(params, dev, config.batch_size);
    lr = lr_schedule_update(prev_ppl, dev_ppl, lr);
    opt.set_learning_rate(lr);
    prev_ppl = dev_ppl;
    best_ppl = std::min(best_ppl, dev_ppl);
    report.epochs.push_back({epoch, -margin_sum / std::max<double>(double(turn_count), 1.0),
                             dev_ppl, lr, 0.0,
                             margin_sum / std::max<double>(double(turn_count), 1.0), 0});
    if (report.epochs.back().dev_perplexity == best_ppl) report.best_epoch = epoch;
  }

  report.best_dev_perplexity = best_ppl;
  return report;
}

double eval_rank_margin(const AwiParams& params, const Corpus& corpus,
                        size_t negatives, uint64_t seed) {
  if (corpus.size() < 2)
    throw std::invalid_argument("eval_rank_margin: need at least two dialogues");
  if (negatives < 1) throw std::invalid_argument("eval_rank_margin: negatives < 1");

  Rng rng(seed);
  NegativePool pool(corpus);
  double margin_sum = 0.0;
  size_t n = 0;
  for (size_t d = 0; d < corpus.size(); ++d) {
    AwiState state = AwiState::zero(params.config);
    std::vector<int32_t> prev;
    for (const Turn& turn : corpus[d].turns) {
      TurnContext ctx(params, state, turn.user, prev);
      double pos = ctx.score(turn.agent).total / double(turn.agent.size());
      double neg = 0.0;
      for (size_t k = 0; k < negatives; ++k) {
        const std::vector<int32_t>& w = pool.sample(d, turn.agent, rng);
        neg += ctx.score(w).total / double(w.size());
      }
      margin_sum += pos - neg / double(negatives);
      ++n;
      state = ctx.advanced_state();
      prev = turn.agent;
    }
  }
  return margin_sum / double(n);
}

}  // namespace awi
