#include "rumorlab/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_set>

#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

std::string refinement_prompt(double similarity) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", similarity);
  return std::string("Instruction: The similarity between the generated sentence and the input sentence is ") + buf +
         ".\n\nPlease generate a new sentence.";
}

namespace {

std::uint64_t hash_text(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

BuiltinDissimilarGenerator::BuiltinDissimilarGenerator(std::vector<std::string> vocab, EncoderConfig encoder,
                                                       std::uint64_t seed, std::size_t length)
    : vocab_(std::move(vocab)), encoder_(encoder), seed_(seed), length_(length) {
  encoder_.validate();
  if (vocab_.empty()) throw ArgumentError("generator vocabulary is empty");
  if (length_ == 0) throw ArgumentError("generated sentence length must be positive");
  slots_.reserve(vocab_.size());
  for (const auto& token : vocab_) {
    const auto parts = tokenize(token);
    if (parts.size() != 1 || parts[0] != token) {
      throw ArgumentError("vocabulary entry '" + token + "' is not a single normalized token");
    }
    slots_.push_back(token_slot(encoder_, token));
  }
}

GeneratorResponse BuiltinDissimilarGenerator::generate(const GeneratorRequest& request) const {
  const std::vector<double> source = encode_message(encoder_, request.source_text);

  std::unordered_set<std::string> excluded;
  if (request.prior_message) {
    for (auto& t : tokenize(*request.prior_message)) excluded.insert(std::move(t));
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!excluded.contains(vocab_[i])) candidates.push_back(i);
  }
  if (candidates.empty()) {
    candidates.resize(vocab_.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }
  const std::uint64_t salt = mix64(seed_ ^ hash_text(request.source_text));
  std::vector<std::uint64_t> keys(vocab_.size());
  for (std::size_t i : candidates) keys[i] = mix64(salt ^ hash_text(vocab_[i]));
  std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  // Partial sentence as raw slot counts; bias slot fixed at 1.
  std::vector<double> counts(encoder_.dim, 0.0);
  counts[0] = 1.0;
  double dot_src = source[0];
  double norm_sq = 1.0;
  std::string sentence;
  for (std::size_t step = 0; step < length_; ++step) {
    std::size_t best = candidates.front();
    double best_cos = INFINITY;
    for (std::size_t i : candidates) {
      const std::size_t slot = slots_[i];
      const double cos = (dot_src + source[slot]) / std::sqrt(norm_sq + 2.0 * counts[slot] + 1.0);
      if (cos < best_cos) {
        best_cos = cos;
        best = i;
      }
    }
    const std::size_t slot = slots_[best];
    dot_src += source[slot];
    norm_sq += 2.0 * counts[slot] + 1.0;
    counts[slot] += 1.0;
    if (!sentence.empty()) sentence.push_back(' ');
    sentence += vocab_[best];
  }
  return {sentence};
}

}  // namespace rumorlab
