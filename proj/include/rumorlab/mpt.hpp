#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rumorlab/matrix.hpp"

namespace rumorlab {

enum class Label { Rumor = 0, NonRumor = 1 };

/// Class index used by the detector's output layer.
constexpr std::size_t class_index(Label label) { return static_cast<std::size_t>(label); }
constexpr Label label_from_class(std::size_t cls) { return cls == 0 ? Label::Rumor : Label::NonRumor; }

const char* to_string(Label label);
Label parse_label(const std::string& text);

struct Message {
  std::size_t id = 0;
  std::string text;
  bool injected = false;

  friend bool operator==(const Message&, const Message&) = default;
};

using Edge = std::pair<std::size_t, std::size_t>;  // (parent, child)

/// A message propagation tree. Index 0 is the source post; every other node
/// has exactly one parent. Immutable once built; growth returns a new tree.
class PropagationTree {
 public:
  /// Validates ids, non-empty texts and the rooted-tree shape; throws ArgumentError.
  PropagationTree(std::vector<Message> messages, std::vector<Edge> edges, Label label);

  /// Convenience: messages built from plain texts, none injected.
  static PropagationTree from_texts(const std::vector<std::string>& texts, std::vector<Edge> edges,
                                    Label label);

  std::size_t size() const { return messages_.size(); }
  const std::vector<Message>& messages() const { return messages_; }
  const Message& message(std::size_t i) const;
  const std::vector<Edge>& edges() const { return edges_; }
  Label label() const { return label_; }

  /// Undirected neighbors, ascending.
  const std::vector<std::size_t>& neighbors(std::size_t node) const;
  const std::vector<std::size_t>& children(std::size_t node) const;
  /// Parent index; the root has none (returns size()).
  std::size_t parent(std::size_t node) const;

  /// New tree with one more leaf under `parent`.
  PropagationTree with_leaf(std::size_t parent, std::string text, bool injected) const;

  std::size_t injected_count() const;

  friend bool operator==(const PropagationTree& a, const PropagationTree& b) {
    return a.label_ == b.label_ && a.messages_ == b.messages_ && a.edges_ == b.edges_;
  }

 private:
  void build_adjacency();
  void check_node(std::size_t node) const;

  std::vector<Message> messages_;
  std::vector<Edge> edges_;
  Label label_;
  std::vector<std::size_t> parent_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<std::vector<std::size_t>> children_;
};

using Corpus = std::vector<PropagationTree>;

/// Node scores plus the order they induce: descending score, ties by ascending index.
struct InfluenceRanking {
  std::vector<double> scores;
  std::vector<std::size_t> order;
};

/// Undirected degree. Throws ArgumentError if node is out of range.
std::size_t degree(const PropagationTree& tree, std::size_t node);

/// Sum of sqrt(d_u * d_v) over v in the closed neighborhood of u.
double influence_score(const PropagationTree& tree, std::size_t node);

InfluenceRanking rank_by_influence(const PropagationTree& tree);

/// Index of the top-ranked node (ties resolved toward the smaller index).
std::size_t most_influential(const PropagationTree& tree);

/// Cosine similarity of two feature rows.
double pair_homophily(const Matrix& features, std::size_t u, std::size_t v);

/// Mean cosine similarity of every non-root row to the root row.
/// Normalized by the n-1 summed terms.
double root_homophily(const PropagationTree& tree, const Matrix& features);

}  // namespace rumorlab
