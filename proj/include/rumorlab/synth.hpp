#pragma once

#include <cstdint>
#include <vector>
#include <string>

#include "rumorlab/mpt.hpp"

namespace rumorlab {

/// Parameters of the synthetic rumor corpus.
///
/// Each class owns a vocabulary. A message token comes from the class
/// vocabulary with probability `separation` and otherwise from the pooled
/// vocabulary of both classes, so separation 0 makes the classes
/// indistinguishable by content and separation 1 makes them disjoint.
/// Replies additionally echo a token of the source post with the class's echo
/// probability, and attach directly to the source post with the class's root
/// attachment probability (otherwise to a uniformly chosen earlier message).
/// Both shape parameters are interpolated toward the midpoint of the two
/// classes by `separation` as well, so at 0 the classes share one distribution.
struct CorpusSpec {
  std::size_t n_trees = 500;
  std::size_t min_size = 5;
  std::size_t max_size = 40;
  std::size_t vocab_per_class = 60;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 10;
  double separation = 0.7;
  double rumor_fraction = 0.5;
  double rumor_root_attach = 0.2;
  double nonrumor_root_attach = 0.7;
  double rumor_echo = 0.4;
  double nonrumor_echo = 0.1;

  /// Throws ConfigError on an infeasible spec.
  void validate() const;
};

struct SynthVocabulary {
  std::vector<std::string> rumor;
  std::vector<std::string> nonrumor;
};

/// Class vocabularies of distinct pseudo-words, deterministic per seed.
SynthVocabulary synth_vocabulary(std::size_t per_class, std::uint64_t seed);

Corpus synth_corpus(const CorpusSpec& spec, std::uint64_t seed);

/// Sorted distinct tokens over every message of the corpus.
std::vector<std::string> corpus_vocabulary(const Corpus& corpus);

}  // namespace rumorlab
