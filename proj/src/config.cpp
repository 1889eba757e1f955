#include "awi/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace awi {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (value.empty() || end != value.c_str() + value.size())
    throw std::invalid_argument("config " + key + ": not an integer: " + value);
  return uint64_t(v);
}

double parse_f64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (value.empty() || end != value.c_str() + value.size())
    throw std::invalid_argument("config " + key + ": not a number: " + value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw std::invalid_argument("config " + key + ": expected true or false: " + value);
}

std::string f64_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void config_set(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "paths.corpus") c.paths.corpus = value;
  else if (key == "paths.vocab") c.paths.vocab = value;
  else if (key == "paths.idf") c.paths.idf = value;
  else if (key == "paths.checkpoint") c.paths.checkpoint = value;
  else if (key == "paths.report") c.paths.report = value;
  else if (key == "model.vocab") c.model.vocab = size_t(parse_u64(key, value));
  else if (key == "model.embed_dim") c.model.embed_dim = size_t(parse_u64(key, value));
  else if (key == "model.encoder_dim") c.model.encoder_dim = size_t(parse_u64(key, value));
  else if (key == "model.intention_dim") c.model.intention_dim = size_t(parse_u64(key, value));
  else if (key == "model.decoder_dim") c.model.decoder_dim = size_t(parse_u64(key, value));
  else if (key == "model.align_dim") c.model.align_dim = size_t(parse_u64(key, value));
  else if (key == "model.layers") c.model.layers = size_t(parse_u64(key, value));
  else if (key == "model.generation_layers") c.model.generation_layers = size_t(parse_u64(key, value));
  else if (key == "model.similarity_feature") c.model.use_similarity_feature = parse_bool(key, value);
  else if (key == "train.objective") c.train.objective = parse_objective(value);
  else if (key == "train.max_epochs") c.train.max_epochs = size_t(parse_u64(key, value));
  else if (key == "train.batch_size") c.train.batch_size = size_t(parse_u64(key, value));
  else if (key == "train.clip_norm") c.train.clip_norm = parse_f64(key, value);
  else if (key == "train.learning_rate") c.train.optimizer.learning_rate = parse_f64(key, value);
  else if (key == "train.decay") c.train.optimizer.decay = parse_f64(key, value);
  else if (key == "train.momentum") c.train.optimizer.momentum = parse_f64(key, value);
  else if (key == "train.epsilon") c.train.optimizer.epsilon = parse_f64(key, value);
  else if (key == "train.baseline") {
    if (value == "mean-train-idf") {
      c.train.baseline_from_train_idf = true;
    } else {
      c.train.baseline_from_train_idf = false;
      c.train.reinforce_baseline = parse_f64(key, value);
    }
  } else if (key == "train.on_sampled") c.train.reinforce_on_sampled = parse_bool(key, value);
  else if (key == "train.decode_max_len") c.train.decode_max_len = size_t(parse_u64(key, value));
  else if (key == "train.negatives") c.train.negatives_per_positive = size_t(parse_u64(key, value));
  else if (key == "train.seed") c.train.seed = parse_u64(key, value);
  else if (key == "decode.beam_width") c.decode.beam_width = size_t(parse_u64(key, value));
  else if (key == "decode.max_len") c.decode.max_len = size_t(parse_u64(key, value));
  else if (key == "decode.rerank_idf") c.decode.rerank_idf = parse_f64(key, value);
  else if (key == "decode.rerank_backward") c.decode.rerank_backward = parse_f64(key, value);
  else if (key == "decode.sample") c.decode.sample = parse_bool(key, value);
  else if (key == "retrieval.candidates") c.retrieval.candidates = size_t(parse_u64(key, value));
  else if (key == "retrieval.mode") {
    if (value != "tfidf" && value != "awi" && value != "interpolated")
      throw std::invalid_argument("config retrieval.mode: unknown mode: " + value);
    c.retrieval.mode = value;
  } else if (key == "retrieval.weight") c.retrieval.weight = parse_f64(key, value);
  else if (key == "seed") c.seed = parse_u64(key, value);
  else throw std::invalid_argument("config: unknown key: " + key);
}

std::string config_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "paths.corpus = " << c.paths.corpus << "\n";
  out << "paths.vocab = " << c.paths.vocab << "\n";
  out << "paths.idf = " << c.paths.idf << "\n";
  out << "paths.checkpoint = " << c.paths.checkpoint << "\n";
  out << "paths.report = " << c.paths.report << "\n";
  out << "model.vocab = " << c.model.vocab << "\n";
  out << "model.embed_dim = " << c.model.embed_dim << "\n";
  out << "model.encoder_dim = " << c.model.encoder_dim << "\n";
  out << "model.intention_dim = " << c.model.intention_dim << "\n";
  out << "model.decoder_dim = " << c.model.decoder_dim << "\n";
  out << "model.align_dim = " << c.model.align_dim << "\n";
  out << "model.layers = " << c.model.layers << "\n";
  out << "model.generation_layers = " << c.model.generation_layers << "\n";
  out << "model.similarity_feature = " << (c.model.use_similarity_feature ? "true" : "false") << "\n";
  out << "train.objective = " << objective_name(c.train.objective) << "\n";
  out << "train.max_epochs = " << c.train.max_epochs << "\n";
  out << "train.batch_size = " << c.train.batch_size << "\n";
  out << "train.clip_norm = " << f64_text(c.train.clip_norm) << "\n";
  out << "train.learning_rate = " << f64_text(c.train.optimizer.learning_rate) << "\n";
  out << "train.decay = " << f64_text(c.train.optimizer.decay) << "\n";
  out << "train.momentum = " << f64_text(c.train.optimizer.momentum) << "\n";
  out << "train.epsilon = " << f64_text(c.train.optimizer.epsilon) << "\n";
  out << "train.baseline = "
      << (c.train.baseline_from_train_idf ? std::string("mean-train-idf")
                                          : f64_text(c.train.reinforce_baseline))
      << "\n";
  out << "train.on_sampled = " << (c.train.reinforce_on_sampled ? "true" : "false") << "\n";
  out << "train.decode_max_len = " << c.train.decode_max_len << "\n";
  out << "train.negatives = " << c.train.negatives_per_positive << "\n";
  out << "train.seed = " << c.train.seed << "\n";
  out << "decode.beam_width = " << c.decode.beam_width << "\n";
  out << "decode.max_len = " << c.decode.max_len << "\n";
  out << "decode.rerank_idf = " << f64_text(c.decode.rerank_idf) << "\n";
  out << "decode.rerank_backward = " << f64_text(c.decode.rerank_backward) << "\n";
  out << "decode.sample = " << (c.decode.sample ? "true" : "false") << "\n";
  out << "retrieval.candidates = " << c.retrieval.candidates << "\n";
  out << "retrieval.mode = " << c.retrieval.mode << "\n";
  out << "retrieval.weight = " << f64_text(c.retrieval.weight) << "\n";
  out << "seed = " << c.seed << "\n";
  return out.str();
}

ExperimentConfig config_from_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    config_set(c, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return c;
}

void save_config(const std::string& path, const ExperimentConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << config_text(config);
  if (!out) throw std::runtime_error("write failed: " + path);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

}  // namespace awi
