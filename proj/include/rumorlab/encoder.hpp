#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rumorlab/matrix.hpp"
#include "rumorlab/mpt.hpp"

namespace rumorlab {

/// Seeded feature hashing of token counts. Slot 0 is a constant bias slot;
/// tokens hash into slots 1..dim-1.
struct EncoderConfig {
  std::size_t dim = 64;
  std::uint64_t vocab_seed = 0;

  void validate() const;
};

/// Lowercases and splits on runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::string_view text);

/// Slot in [1, dim) that `token` hashes into.
std::size_t token_slot(const EncoderConfig& cfg, std::string_view token);

/// Unit-norm hashed term-frequency vector. Throws ArgumentError on text with no tokens.
std::vector<double> encode_message(const EncoderConfig& cfg, std::string_view text);

/// Row j is encode_message of message j.
Matrix encode_tree(const EncoderConfig& cfg, const PropagationTree& tree);

}  // namespace rumorlab
