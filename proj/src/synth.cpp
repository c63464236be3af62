#include "rumorlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "rumorlab/encoder.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

void CorpusSpec::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (n_trees == 0) throw ConfigError("corpus needs at least one tree");
  if (min_size < 3 || min_size > max_size) throw ConfigError("tree sizes must satisfy 3 <= min_size <= max_size");
  if (vocab_per_class == 0) throw ConfigError("vocab_per_class must be positive");
  if (vocab_per_class > 5000) throw ConfigError("vocab_per_class is limited to 5000");
  if (min_tokens == 0 || min_tokens > max_tokens) throw ConfigError("token counts must satisfy 1 <= min <= max");
  if (!prob(separation)) throw ConfigError("separation must lie in [0, 1]");
  if (!prob(rumor_fraction)) throw ConfigError("rumor_fraction must lie in [0, 1]");
  if (!prob(rumor_root_attach) || !prob(nonrumor_root_attach)) throw ConfigError("root attachment must lie in [0, 1]");
  if (!prob(rumor_echo) || !prob(nonrumor_echo)) throw ConfigError("echo probability must lie in [0, 1]");
}

SynthVocabulary synth_vocabulary(std::size_t per_class, std::uint64_t seed) {
  static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "sh", "tr"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  Rng rng(derive_seed(seed, 0x766f63616275ULL));
  std::unordered_set<std::string> seen;
  auto fresh = [&] {
    while (true) {
      std::string word;
      const std::size_t syllables = rng.between(2, 3);
      for (std::size_t s = 0; s < syllables; ++s) {
        word += kOnsets[rng.index(std::size(kOnsets))];
        word += kVowels[rng.index(std::size(kVowels))];
      }
      if (seen.insert(word).second) return word;
    }
  };
  SynthVocabulary vocab;
  for (std::size_t i = 0; i < per_class; ++i) vocab.rumor.push_back(fresh());
  for (std::size_t i = 0; i < per_class; ++i) vocab.nonrumor.push_back(fresh());
  return vocab;
}

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

// Class-specific value pulled toward the two-class midpoint as separation drops.
double toward(double rumor_value, double nonrumor_value, bool rumor, double separation) {
  const double mid = 0.5 * (rumor_value + nonrumor_value);
  return mid + separation * ((rumor ? rumor_value : nonrumor_value) - mid);
}

}  // namespace

Corpus synth_corpus(const CorpusSpec& spec, std::uint64_t seed) {
  spec.validate();
  const SynthVocabulary vocab = synth_vocabulary(spec.vocab_per_class, seed);
  std::vector<std::string> pooled = vocab.rumor;
  pooled.insert(pooled.end(), vocab.nonrumor.begin(), vocab.nonrumor.end());

  Rng rng(derive_seed(seed, 0x636f72707573ULL));
  const auto n_rumor = static_cast<std::size_t>(std::llround(spec.rumor_fraction * static_cast<double>(spec.n_trees)));
  Corpus corpus;
  corpus.reserve(spec.n_trees);
  for (std::size_t t = 0; t < spec.n_trees; ++t) {
    const Label label = t < n_rumor ? Label::Rumor : Label::NonRumor;
    const bool rumor = label == Label::Rumor;
    const auto& own = rumor ? vocab.rumor : vocab.nonrumor;
    const double root_attach = toward(spec.rumor_root_attach, spec.nonrumor_root_attach, rumor, spec.separation);
    const double echo = toward(spec.rumor_echo, spec.nonrumor_echo, rumor, spec.separation);

    const std::size_t n = rng.between(spec.min_size, spec.max_size);
    std::vector<std::string> texts;
    std::vector<Edge> edges;
    std::vector<std::string> source_tokens;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t len = rng.between(spec.min_tokens, spec.max_tokens);
      std::vector<std::string> tokens;
      for (std::size_t k = 0; k < len; ++k) {
        if (j > 0 && rng.bernoulli(echo)) {
          tokens.push_back(source_tokens[rng.index(source_tokens.size())]);
        } else if (rng.bernoulli(spec.separation)) {
          tokens.push_back(own[rng.index(own.size())]);
        } else {
          tokens.push_back(pooled[rng.index(pooled.size())]);
        }
      }
      if (j == 0) {
        source_tokens = tokens;
      } else {
        const std::size_t parent = rng.bernoulli(root_attach) ? 0 : rng.index(j);
        edges.emplace_back(parent, j);
      }
      texts.push_back(join(tokens));
    }
    corpus.push_back(PropagationTree::from_texts(texts, std::move(edges), label));
  }
  // Interleave classes so any prefix is mixed.
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  Corpus shuffled;
  shuffled.reserve(corpus.size());
  for (std::size_t i : order) shuffled.push_back(std::move(corpus[i]));
  return shuffled;
}

std::vector<std::string> corpus_vocabulary(const Corpus& corpus) {
  std::set<std::string> tokens;
  for (const auto& tree : corpus) {
    for (const auto& m : tree.messages()) {
      for (auto& tok : tokenize(m.text)) tokens.insert(std::move(tok));
    }
  }
  return {tokens.begin(), tokens.end()};
}

}  // namespace rumorlab
