#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "awi/model.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is little-endian");

namespace awi {

static const char kMagic[] = "AWI1";

void save_checkpoint(const std::string& path, const AwiParams& params,
                     uint64_t vocab_checksum) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const AwiConfig& c = params.config;
  std::ostringstream head;
  head << kMagic << '\n';
  head << "config vocab=" << c.vocab << " embed=" << c.embed_dim
       << " encoder=" << c.encoder_dim << " intention=" << c.intention_dim
       << " decoder=" << c.decoder_dim << " align=" << c.align_dim
       << " layers=" << c.layers << " gen_layers=" << c.generation_layers
       << " sim=" << (c.use_similarity_feature ? 1 : 0) << '\n';
  char csum[32];
  std::snprintf(csum, sizeof csum, "%016llx", (unsigned long long)vocab_checksum);
  head << "vocab_checksum=" << csum << '\n';
  auto named = params.named();
  head << "tensors=" << named.size() << '\n';
  size_t offset = 0;
  for (const auto& [name, t] : named) {
    head << name << ' ' << t->rows() << ' ' << t->cols() << ' ' << offset << '\n';
    offset += t->size() * sizeof(float);
  }
  head << "payload\n";
  std::string h = head.str();
  out.write(h.data(), std::streamsize(h.size()));
  for (const auto& [name, t] : named)
    out.write(reinterpret_cast<const char*>(t->data.data()),
              std::streamsize(t->size() * sizeof(float)));
  if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

static std::string next_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated header");
  return line;
}

static uint64_t parse_field(const std::string& line, const std::string& key,
                            const std::string& path) {
  size_t at = line.find(key + "=");
  if (at == std::string::npos)
    throw std::runtime_error(path + ": missing checkpoint field " + key);
  return std::stoull(line.substr(at + key.size() + 1), nullptr, 0);
}

AwiParams load_checkpoint(const std::string& path, uint64_t* vocab_checksum) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  if (next_line(in, path) != kMagic)
    throw std::runtime_error(path + ": bad checkpoint magic, expected AWI1");

  std::string cfg_line = next_line(in, path);
  AwiConfig cfg;
  cfg.vocab = parse_field(cfg_line, "vocab", path);
  cfg.embed_dim = parse_field(cfg_line, "embed", path);
  cfg.encoder_dim = parse_field(cfg_line, "encoder", path);
  cfg.intention_dim = parse_field(cfg_line, "intention", path);
  cfg.decoder_dim = parse_field(cfg_line, "decoder", path);
  cfg.align_dim = parse_field(cfg_line, "align", path);
  cfg.layers = parse_field(cfg_line, "layers", path);
  cfg.generation_layers = parse_field(cfg_line, "gen_layers", path);
  cfg.use_similarity_feature = parse_field(cfg_line, "sim", path) != 0;

  std::string csum_line = next_line(in, path);
  uint64_t checksum = std::stoull(csum_line.substr(csum_line.find('=') + 1), nullptr, 16);
  if (vocab_checksum) *vocab_checksum = checksum;

  size_t tensor_count = parse_field(next_line(in, path), "tensors", path);
  AwiParams params = AwiParams::init(cfg, 0);
  auto named = params.named();
  if (named.size() != tensor_count)
    throw std::runtime_error(path + ": tensor count " + std::to_string(tensor_count) +
                             " does not match config (" + std::to_string(named.size()) +
                             ")");
  size_t expect_offset = 0;
  for (const auto& [name, t] : named) {
    std::istringstream ls(next_line(in, path));
    std::string fname;
    size_t rows = 0, cols = 0, offset = 0;
    ls >> fname >> rows >> cols >> offset;
    if (fname != name)
      throw std::runtime_error(path + ": tensor " + fname + " where " + name +
                               " expected");
    if (rows != t->rows() || cols != t->cols())
      throw std::runtime_error(path + ": tensor " + name + " shape " +
                               std::to_string(rows) + "x" + std::to_string(cols) +
                               " does not match config");
    if (offset != expect_offset)
      throw std::runtime_error(path + ": tensor " + name + " offset mismatch");
    expect_offset += t->size() * sizeof(float);
  }
  if (next_line(in, path) != "payload")
    throw std::runtime_error(path + ": missing payload marker");
  for (auto& [name, t] : named) {
    in.read(reinterpret_cast<char*>(t->data.data()),
            std::streamsize(t->size() * sizeof(float)));
    if (size_t(in.gcount()) != t->size() * sizeof(float))
      throw std::runtime_error(path + ": truncated payload at " + name);
  }
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error(path + ": trailing bytes after payload");
  return params;
}

}  // namespace awi
