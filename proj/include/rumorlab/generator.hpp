#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumorlab/encoder.hpp"

namespace rumorlab {

/// System prompt for the first generation call.
inline constexpr std::string_view kDissimilarityPrompt =
    "Instruction: Your mission is to construct a sentence that bears the least semantic similarity to the "
    "user’s inputs while maintaining a similar overarching topic. Cosine similarity will be used to "
    "evaluate the dissimilarity.";

/// Refinement prompt carrying the measured similarity of the previous candidate.
std::string refinement_prompt(double similarity);

struct GeneratorRequest {
  std::string system_prompt;
  std::string source_text;
  std::optional<std::string> prior_message;  // set on refinement calls
  std::optional<double> feedback_similarity;

  /// Text handed to the model: the source post first, the previous candidate when refining.
  const std::string& user_text() const { return prior_message ? *prior_message : source_text; }
};

struct GeneratorResponse {
  std::string message;
};

/// Produces malicious candidate messages. Implementations must be safe to call
/// concurrently (no per-request state).
class MessageGenerator {
 public:
  virtual ~MessageGenerator() = default;
  virtual GeneratorResponse generate(const GeneratorRequest& request) const = 0;
};

/// Offline stand-in for a language model. Greedily builds a fixed-length
/// sentence from `vocab`, each token chosen to minimize the cosine similarity
/// of the encoded partial sentence to the encoded source post. Ties go to the
/// earliest token of a seeded, source-dependent ordering of the vocabulary.
/// On refinement, tokens of the previous candidate are excluded (unless that
/// would leave nothing to choose from).
class BuiltinDissimilarGenerator final : public MessageGenerator {
 public:
  BuiltinDissimilarGenerator(std::vector<std::string> vocab, EncoderConfig encoder, std::uint64_t seed,
                             std::size_t length = 8);

  GeneratorResponse generate(const GeneratorRequest& request) const override;

  const std::vector<std::string>& vocab() const { return vocab_; }

 private:
  std::vector<std::string> vocab_;
  std::vector<std::size_t> slots_;
  EncoderConfig encoder_;
  std::uint64_t seed_;
  std::size_t length_;
};

struct HttpGeneratorConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string path = "/generate";
  double timeout_seconds = 30.0;
  std::size_t retries = 2;
};

/// Client for an external generation service:
///   POST {path}  {"system_prompt": str, "user_text": str, "feedback_similarity": number|null}
///   -> {"message": str}
/// Transport or protocol failures (after retries) throw AttackError.
class HttpGenerator final : public MessageGenerator {
 public:
  explicit HttpGenerator(HttpGeneratorConfig config);
  GeneratorResponse generate(const GeneratorRequest& request) const override;

  /// Request body as sent on the wire.
  static std::string request_body(const GeneratorRequest& request);

 private:
  HttpGeneratorConfig config_;
};

}  // namespace rumorlab
