#pragma once

#include <string>

#include "awi/model_types.hpp"
#include "awi/training.hpp"

namespace awi {

// ==== experiment configuration ====

struct PathConfig {
  std::string corpus;
  std::string vocab;
  std::string idf;
  std::string checkpoint;
  std::string report;
};

struct DecodeConfig {
  size_t beam_width = 1;
  size_t max_len = 50;
  double rerank_idf = 0.0;       // 0 disables idf reranking
  double rerank_backward = 0.0;  // 0 disables backward-model reranking
  bool sample = false;
};

struct RetrievalConfig {
  size_t candidates = 10;
  std::string mode = "interpolated";
  double weight = 0.0;
};

// Everything a pipeline run needs, round-trippable through a key=value text
// file. Flags parsed on top of a loaded file override single fields.
struct ExperimentConfig {
  PathConfig paths;
  AwiConfig model = AwiConfig::desk(0);  // vocab 0 means size of the loaded table
  TrainConfig train;
  DecodeConfig decode;
  RetrievalConfig retrieval;
  uint64_t seed = 1;
};

// Applies one key=value pair; unknown keys and malformed values raise
// invalid_argument naming the key.
void config_set(ExperimentConfig& config, const std::string& key,
                const std::string& value);

// Serializes every field; config_from_text(config_text(c)) == c.
std::string config_text(const ExperimentConfig& config);
ExperimentConfig config_from_text(const std::string& text);

void save_config(const std::string& path, const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

}  // namespace awi
