#pragma once

#include <filesystem>
#include <string>

#include "rumorlab/mpt.hpp"

namespace rumorlab {

// Corpus documents look like
//   {"trees": [{"label": "rumor"|"nonrumor",
//               "messages": [{"text": str, "injected": bool}],
//               "edges": [[parent, child], ...]}]}
// Message order defines node indices; index 0 is the source post.

/// Parses a corpus document. An empty (or whitespace-only) document is an empty corpus.
/// Throws ParseError naming the record index and field on malformed input.
Corpus parse_corpus(const std::string& text);
std::string serialize_corpus(const Corpus& corpus);

Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace rumorlab
