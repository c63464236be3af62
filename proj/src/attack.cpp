#include "rumorlab/attack.hpp"

#include <json.hpp>

namespace rumorlab {

void AttackConfig::validate() const {
  if (budget == 0) throw ArgumentError("attack budget must be at least 1");
  if (!(homophily_threshold > -1.0 && homophily_threshold < 1.0)) {
    throw ArgumentError("homophily threshold must lie in (-1, 1)");
  }
  if (max_refine_iters == 0) throw ArgumentError("max_refine_iters must be positive");
}

const char* to_string(AttackOutcome outcome) {
  switch (outcome) {
    case AttackOutcome::Flipped:
      return "flipped";
    case AttackOutcome::BudgetExhausted:
      return "budget_exhausted";
    case AttackOutcome::Aborted:
      return "aborted";
  }
  return "unknown";
}

std::string generate_message(const MessageGenerator& generator, const std::string& source_text,
                             const std::optional<std::string>& prior_message, std::optional<double> prior_similarity) {
  GeneratorRequest request;
  request.source_text = source_text;
  if (prior_message) {
    request.system_prompt = refinement_prompt(prior_similarity.value_or(0.0));
    request.prior_message = prior_message;
    request.feedback_similarity = prior_similarity;
  } else {
    request.system_prompt = std::string(kDissimilarityPrompt);
  }
  GeneratorResponse response;
  try {
    response = generator.generate(request);
  } catch (const GenerationError&) {
    throw;
  } catch (const std::exception& e) {
    throw GenerationError(std::string("generator failed: ") + e.what(), request);
  }
  if (tokenize(response.message).empty()) {
    throw GenerationError("generator returned an empty message", request);
  }
  return response.message;
}

RefinedMessage refine_until_dissimilar(const MessageGenerator& generator, const PropagationTree& tree,
                                       const Matrix& features, const AttackConfig& cfg,
                                       const EncoderConfig& encoder) {
  cfg.validate();
  if (features.rows() != tree.size()) throw ArgumentError("feature rows do not match the tree");
  const std::string& source = tree.messages().front().text;
  const auto root = features.row(0);
  auto similarity = [&](const std::string& text) { return cosine(encode_message(encoder, text), root); };

  RefinedMessage out;
  out.text = generate_message(generator, source);
  out.similarity = similarity(out.text);
  std::size_t calls = 1;
  while (out.similarity > cfg.homophily_threshold && calls < cfg.max_refine_iters) {
    out.text = generate_message(generator, source, out.text, out.similarity);
    out.similarity = similarity(out.text);
    ++calls;
  }
  out.refinements = calls - 1;
  out.threshold_missed = out.similarity > cfg.homophily_threshold;
  return out;
}

Injection inject(const PropagationTree& tree, const Matrix& features, const std::string& text,
                 const EncoderConfig& encoder) {
  if (features.rows() != tree.size()) throw ArgumentError("feature rows do not match the tree");
  const auto row = encode_message(encoder, text);
  if (row.size() != features.cols()) throw ArgumentError("encoder dimension does not match the features");
  const std::size_t parent = most_influential(tree);
  Matrix grown(features.rows() + 1, features.cols());
  std::copy(features.values().begin(), features.values().end(), grown.values().begin());
  std::copy(row.begin(), row.end(), grown.row(features.rows()).begin());
  return {tree.with_leaf(parent, text, true), std::move(grown), parent};
}

Victim detector_victim(ModelParams params) {
  return [p = std::move(params)](const PropagationTree& tree, const Matrix& features) {
    return forward(p, tree, features);
  };
}

AttackResult attack_tree(const Victim& victim, const PropagationTree& tree, const Matrix& features,
                         const AttackConfig& cfg, const MessageGenerator& generator, const EncoderConfig& encoder) {
  cfg.validate();
  if (tree.label() != Label::Rumor) throw ArgumentError("only rumor trees are attacked");
  AttackResult state{AttackTrace{}, tree, features};
  try {
    Prediction pred = victim(state.tree, state.features);
    while (true) {
      if (pred.label == Label::NonRumor) {
        state.trace.outcome = AttackOutcome::Flipped;
        break;
      }
      if (state.trace.records.size() >= cfg.budget) {
        state.trace.outcome = AttackOutcome::BudgetExhausted;
        break;
      }
      InjectionRecord rec;
      rec.step = state.trace.records.size();
      if (state.tree.size() >= 2) rec.root_homophily_before = root_homophily(state.tree, state.features);
      const RefinedMessage msg = refine_until_dissimilar(generator, state.tree, state.features, cfg, encoder);
      Injection next = inject(state.tree, state.features, msg.text, encoder);
      state.tree = std::move(next.tree);
      state.features = std::move(next.features);
      rec.text = msg.text;
      rec.refinements = msg.refinements;
      rec.similarity = msg.similarity;
      rec.threshold_missed = msg.threshold_missed;
      rec.parent = next.parent;
      rec.root_homophily_after = root_homophily(state.tree, state.features);
      pred = victim(state.tree, state.features);
      rec.prediction_after = pred.label;
      rec.prob_nonrumor_after = pred.probs[1];
      state.trace.records.push_back(std::move(rec));
    }
  } catch (const std::exception& e) {
    state.trace.outcome = AttackOutcome::Aborted;
    state.trace.error = e.what();
    throw AttackAborted(std::string("attack aborted: ") + e.what(), std::move(state));
  }
  return state;
}

Campaign attack_corpus(const Victim& victim, std::span<const EncodedTree> corpus, const AttackConfig& cfg,
                       const MessageGenerator& generator, const EncoderConfig& encoder) {
  Campaign campaign;
  campaign.perturbed.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& item = corpus[i];
    if (item.tree.label() != Label::Rumor) {
      campaign.perturbed.push_back(item);
      continue;
    }
    try {
      AttackResult r = attack_tree(victim, item.tree, item.features, cfg, generator, encoder);
      r.trace.tree_index = i;
      campaign.traces.push_back(std::move(r.trace));
      campaign.perturbed.push_back({std::move(r.tree), std::move(r.features)});
    } catch (const AttackAborted& e) {
      AttackResult partial = e.partial();
      partial.trace.tree_index = i;
      campaign.traces.push_back(std::move(partial.trace));
      campaign.perturbed.push_back({std::move(partial.tree), std::move(partial.features)});
      ++campaign.failures;
    }
  }
  return campaign;
}

std::string traces_jsonl(std::span<const AttackTrace> traces) {
  std::string out;
  for (const auto& trace : traces) {
    for (const auto& rec : trace.records) {
      nlohmann::json j{{"tree", trace.tree_index},
                       {"step", rec.step},
                       {"text", rec.text},
                       {"refinements", rec.refinements},
                       {"similarity", rec.similarity},
                       {"threshold_missed", rec.threshold_missed},
                       {"parent", rec.parent},
                       {"root_homophily_before",
                        rec.root_homophily_before ? nlohmann::json(*rec.root_homophily_before) : nlohmann::json(nullptr)},
                       {"root_homophily_after", rec.root_homophily_after},
                       {"prediction", to_string(rec.prediction_after)},
                       {"prob_nonrumor", rec.prob_nonrumor_after},
                       {"outcome", to_string(trace.outcome)}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

}  // namespace rumorlab
