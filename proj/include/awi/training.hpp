#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awi/corpus.hpp"
#include "awi/model.hpp"
#include "awi/optim.hpp"
#include "awi/specificity.hpp"

namespace awi {

// ==== configuration ====

enum class Objective { xent, idf_reinforce, rank };
Objective parse_objective(const std::string& name);
std::string objective_name(Objective objective);

struct TrainConfig {
  Objective objective = Objective::xent;
  size_t max_epochs = 10;
  size_t batch_size = 20;
  double clip_norm = 5.0;
  RmsPropConfig optimizer;
  double reinforce_baseline = 1.0;
  bool baseline_from_train_idf = false;  // use mean training-target sentence idf
  bool reinforce_on_sampled = false;     // reward and grade the sampled sequence
                                         // instead of the correct response
  size_t decode_max_len = 50;
  size_t negatives_per_positive = 1;
  uint64_t seed = 1;

  void validate() const;
};

// ==== reporting ====

struct EpochRecord {
  size_t epoch = 0;
  double train_loss = 0.0;
  double dev_perplexity = 0.0;
  double learning_rate = 0.0;
  double mean_generated_idf = 0.0;  // reinforce objective
  double mean_margin = 0.0;         // rank objective
  size_t skipped_rewards = 0;       // turns whose reward came out non-finite
};

struct TrainReport {
  Objective objective = Objective::xent;
  std::vector<EpochRecord> epochs;
  double best_dev_perplexity = 0.0;
  size_t best_epoch = 0;

  std::string epoch_line(const EpochRecord& record) const;
  std::string summary() const;
};

// ==== schedule ====

// Strict increase in dev perplexity halves the learning rate.
double lr_schedule_update(double prev_dev_ppl, double new_dev_ppl, double lr);

// ==== trainers ====

// Teacher-forced cross entropy over whole dialogues. Keeps the parameters
// from the best dev-perplexity epoch.
TrainReport train_xent(AwiParams& params, const Corpus& train, const Corpus& dev,
                       const TrainConfig& config);

// Scales each turn's cross-entropy gradient by (reward - baseline) where the
// reward is the sentence idf of the model's own decode. Expects a model
// warm-started with train_xent.
TrainReport train_idf_reinforce(AwiParams& params, const Corpus& train,
                                const Corpus& dev, const Vocabulary& vocab,
                                const IdfTable& idf, const TrainConfig& config);

// Pushes the length-normalized log-likelihood of the correct response above
// that of sampled negatives.
TrainReport train_rank(AwiParams& params, const Corpus& train, const Corpus& dev,
                       const TrainConfig& config);

// Mean margin llk(correct) - mean llk(negative) with fresh sampled
// negatives; scoring only.
double eval_rank_margin(const AwiParams& params, const Corpus& corpus,
                        size_t negatives, uint64_t seed);

}  // namespace awi
