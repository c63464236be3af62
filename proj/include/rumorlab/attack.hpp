#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rumorlab/detector.hpp"
#include "rumorlab/encoder.hpp"
#include "rumorlab/errors.hpp"
#include "rumorlab/generator.hpp"
#include "rumorlab/mpt.hpp"
#include "rumorlab/train.hpp"

namespace rumorlab {

struct AttackConfig {
  std::size_t budget = 50;
  double homophily_threshold = 0.35;
  std::size_t max_refine_iters = 5;

  void validate() const;
};

/// Generation failed; carries the request so it can be replayed.
class GenerationError : public AttackError {
 public:
  GenerationError(const std::string& what, GeneratorRequest request)
      : AttackError(what), request_(std::move(request)) {}
  const GeneratorRequest& request() const { return request_; }

 private:
  GeneratorRequest request_;
};

/// One generation call: the dissimilarity prompt on the source post, or the
/// refinement prompt with the previous candidate and its measured similarity.
/// Throws GenerationError if the generator fails or returns a message with no tokens.
std::string generate_message(const MessageGenerator& generator, const std::string& source_text,
                             const std::optional<std::string>& prior_message = std::nullopt,
                             std::optional<double> prior_similarity = std::nullopt);

struct RefinedMessage {
  std::string text;
  double similarity = 0.0;       // cosine of the candidate to the source post
  std::size_t refinements = 0;   // generator calls beyond the first
  bool threshold_missed = false; // accepted above the threshold because the iteration cap was hit
};

/// Generates, then refines while the candidate's similarity to the root
/// exceeds the threshold, for at most max_refine_iters generator calls in total.
RefinedMessage refine_until_dissimilar(const MessageGenerator& generator, const PropagationTree& tree,
                                       const Matrix& features, const AttackConfig& cfg,
                                       const EncoderConfig& encoder);

struct Injection {
  PropagationTree tree;
  Matrix features;
  std::size_t parent = 0;
};

/// Appends `text` as an injected leaf under the most influential node.
Injection inject(const PropagationTree& tree, const Matrix& features, const std::string& text,
                 const EncoderConfig& encoder);

/// Classifier queried by the attacker for its stop decision.
using Victim = std::function<Prediction(const PropagationTree&, const Matrix&)>;

Victim detector_victim(ModelParams params);

enum class AttackOutcome { Flipped, BudgetExhausted, Aborted };
const char* to_string(AttackOutcome outcome);

struct InjectionRecord {
  std::size_t step = 0;
  std::string text;
  std::size_t refinements = 0;
  double similarity = 0.0;
  bool threshold_missed = false;
  std::size_t parent = 0;
  std::optional<double> root_homophily_before;  // undefined on a single-node tree
  double root_homophily_after = 0.0;
  Label prediction_after = Label::Rumor;
  double prob_nonrumor_after = 0.0;
};

struct AttackTrace {
  std::size_t tree_index = 0;
  std::vector<InjectionRecord> records;
  AttackOutcome outcome = AttackOutcome::BudgetExhausted;
  std::string error;  // set when outcome == Aborted
};

struct AttackResult {
  AttackTrace trace;
  PropagationTree tree;
  Matrix features;
};

/// Thrown when a victim or generator fails mid-attack; holds everything done so far.
class AttackAborted : public AttackError {
 public:
  AttackAborted(const std::string& what, AttackResult partial)
      : AttackError(what), partial_(std::move(partial)) {}
  const AttackResult& partial() const { return partial_; }

 private:
  AttackResult partial_;
};

/// Injects until the victim predicts NonRumor or the budget is spent. The
/// tree must be labeled Rumor.
AttackResult attack_tree(const Victim& victim, const PropagationTree& tree, const Matrix& features,
                         const AttackConfig& cfg, const MessageGenerator& generator, const EncoderConfig& encoder);

struct Campaign {
  std::vector<EncodedTree> perturbed;  // attacked rumors + untouched non-rumors, input order
  std::vector<AttackTrace> traces;     // one per rumor tree
  std::size_t failures = 0;
};

/// Attacks every rumor tree; non-rumor trees pass through unchanged. A failing
/// tree is recorded as Aborted (keeping its partial perturbation) and the
/// campaign continues.
Campaign attack_corpus(const Victim& victim, std::span<const EncodedTree> corpus, const AttackConfig& cfg,
                       const MessageGenerator& generator, const EncoderConfig& encoder);

/// One JSON object per injection.
std::string traces_jsonl(std::span<const AttackTrace> traces);

}  // namespace rumorlab
