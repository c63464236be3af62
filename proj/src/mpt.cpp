#include "rumorlab/mpt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rumorlab/errors.hpp"

namespace rumorlab {

const char* to_string(Label label) { return label == Label::Rumor ? "rumor" : "nonrumor"; }

Label parse_label(const std::string& text) {
  if (text == "rumor") return Label::Rumor;
  if (text == "nonrumor") return Label::NonRumor;
  throw ArgumentError("unknown label '" + text + "'");
}

PropagationTree::PropagationTree(std::vector<Message> messages, std::vector<Edge> edges, Label label)
    : messages_(std::move(messages)), edges_(std::move(edges)), label_(label) {
  const std::size_t n = messages_.size();
  if (n == 0) throw ArgumentError("tree has no messages");
  for (std::size_t i = 0; i < n; ++i) {
    if (messages_[i].id != i) {
      throw ArgumentError("message " + std::to_string(i) + " has id " +
                          std::to_string(messages_[i].id));
    }
    if (messages_[i].text.empty()) {
      throw ArgumentError("message " + std::to_string(i) + " has empty text");
    }
  }
  if (edges_.size() != n - 1) {
    throw ArgumentError("tree with " + std::to_string(n) + " nodes needs " + std::to_string(n - 1) +
                        " edges, got " + std::to_string(edges_.size()));
  }
  build_adjacency();
}

PropagationTree PropagationTree::from_texts(const std::vector<std::string>& texts,
                                            std::vector<Edge> edges, Label label) {
  std::vector<Message> messages;
  messages.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) messages.push_back({i, texts[i], false});
  return PropagationTree(std::move(messages), std::move(edges), label);
}

void PropagationTree::build_adjacency() {
  const std::size_t n = messages_.size();
  parent_.assign(n, n);
  neighbors_.assign(n, {});
  children_.assign(n, {});
  for (const auto& [p, c] : edges_) {
    if (p >= n || c >= n) {
      throw ArgumentError("edge (" + std::to_string(p) + ", " + std::to_string(c) +
                          ") references a missing node");
    }
    if (p == c) throw ArgumentError("self edge on node " + std::to_string(p));
    if (c == 0) throw ArgumentError("the root cannot have a parent");
    if (parent_[c] != n) {
      throw ArgumentError("node " + std::to_string(c) + " has in-degree 2");
    }
    parent_[c] = p;
    neighbors_[p].push_back(c);
    neighbors_[c].push_back(p);
    children_[p].push_back(c);
  }
  // n-1 edges with unique parents: a tree iff every node reaches the root.
  std::vector<char> reached(n, 0);
  reached[0] = 1;
  std::vector<std::size_t> stack{0};
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t c : children_[u]) {
      if (!reached[c]) {
        reached[c] = 1;
        ++count;
        stack.push_back(c);
      }
    }
  }
  if (count != n) throw ArgumentError("edges contain a cycle or a detached node");
  for (auto& adj : neighbors_) std::sort(adj.begin(), adj.end());
  for (auto& ch : children_) std::sort(ch.begin(), ch.end());
}

void PropagationTree::check_node(std::size_t node) const {
  if (node >= messages_.size()) {
    throw ArgumentError("node " + std::to_string(node) + " out of range for tree of size " +
                        std::to_string(messages_.size()));
  }
}

const Message& PropagationTree::message(std::size_t i) const {
  check_node(i);
  return messages_[i];
}

const std::vector<std::size_t>& PropagationTree::neighbors(std::size_t node) const {
  check_node(node);
  return neighbors_[node];
}

const std::vector<std::size_t>& PropagationTree::children(std::size_t node) const {
  check_node(node);
  return children_[node];
}

std::size_t PropagationTree::parent(std::size_t node) const {
  check_node(node);
  return parent_[node];
}

PropagationTree PropagationTree::with_leaf(std::size_t parent, std::string text, bool injected) const {
  check_node(parent);
  auto messages = messages_;
  auto edges = edges_;
  const std::size_t id = messages.size();
  messages.push_back({id, std::move(text), injected});
  edges.emplace_back(parent, id);
  return PropagationTree(std::move(messages), std::move(edges), label_);
}

std::size_t PropagationTree::injected_count() const {
  return static_cast<std::size_t>(
      std::count_if(messages_.begin(), messages_.end(), [](const Message& m) { return m.injected; }));
}

std::size_t degree(const PropagationTree& tree, std::size_t node) {
  return tree.neighbors(node).size();
}

double influence_score(const PropagationTree& tree, std::size_t node) {
  const double du = static_cast<double>(degree(tree, node));
  double score = du;  // self term sqrt(d_u * d_u)
  for (std::size_t v : tree.neighbors(node)) {
    score += std::sqrt(du * static_cast<double>(degree(tree, v)));
  }
  return score;
}

InfluenceRanking rank_by_influence(const PropagationTree& tree) {
  InfluenceRanking ranking;
  const std::size_t n = tree.size();
  ranking.scores.resize(n);
  for (std::size_t u = 0; u < n; ++u) ranking.scores[u] = influence_score(tree, u);
  ranking.order.resize(n);
  std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](std::size_t a, std::size_t b) {
    return ranking.scores[a] > ranking.scores[b];
  });
  return ranking;
}

std::size_t most_influential(const PropagationTree& tree) {
  std::size_t best = 0;
  double best_score = influence_score(tree, 0);
  for (std::size_t u = 1; u < tree.size(); ++u) {
    const double s = influence_score(tree, u);
    if (s > best_score) {
      best = u;
      best_score = s;
    }
  }
  return best;
}

double pair_homophily(const Matrix& features, std::size_t u, std::size_t v) {
  if (u >= features.rows() || v >= features.rows()) {
    throw ArgumentError("pair_homophily: row index out of range");
  }
  const double nu = norm2(features.row(u));
  const double nv = norm2(features.row(v));
  if (nu == 0.0 || nv == 0.0) {
    throw DegenerateInputError("pair_homophily: zero-norm feature row (" + std::to_string(nu == 0.0 ? u : v) +
                               ")");
  }
  return dot(features.row(u), features.row(v)) / (nu * nv);
}

double root_homophily(const PropagationTree& tree, const Matrix& features) {
  const std::size_t n = tree.size();
  if (features.rows() != n) throw ArgumentError("root_homophily: feature rows do not match tree size");
  if (n < 2) throw DegenerateInputError("root_homophily needs at least two messages");
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j) sum += pair_homophily(features, j, 0);
  return sum / static_cast<double>(n - 1);
}

}  // namespace rumorlab
