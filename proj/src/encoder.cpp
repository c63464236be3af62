#include "rumorlab/encoder.hpp"

#include <cctype>
#include <cmath>

#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

void EncoderConfig::validate() const {
  if (dim < 2) throw ArgumentError("encoder dim must be at least 2");
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::size_t token_slot(const EncoderConfig& cfg, std::string_view token) {
  // FNV-1a, seeded through the offset basis.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(cfg.vocab_seed);
  for (char ch : token) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return 1 + static_cast<std::size_t>(mix64(h) % (cfg.dim - 1));
}

std::vector<double> encode_message(const EncoderConfig& cfg, std::string_view text) {
  cfg.validate();
  const auto tokens = tokenize(text);
  if (tokens.empty()) throw ArgumentError("cannot encode a message with no tokens");
  std::vector<double> v(cfg.dim, 0.0);
  v[0] = 1.0;
  for (const auto& t : tokens) v[token_slot(cfg, t)] += 1.0;
  const double n = norm2(v);
  for (double& x : v) x /= n;
  return v;
}

Matrix encode_tree(const EncoderConfig& cfg, const PropagationTree& tree) {
  Matrix features(tree.size(), cfg.dim);
  for (std::size_t j = 0; j < tree.size(); ++j) {
    const auto row = encode_message(cfg, tree.messages()[j].text);
    std::copy(row.begin(), row.end(), features.row(j).begin());
  }
  return features;
}

}  // namespace rumorlab
