#pragma once

// Independent reference computations used by the unit tests and the
// acceptance suite. Written from the formulas directly, sharing no code with
// the library beyond its data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rumorlab/detector.hpp"
#include "rumorlab/mpt.hpp"
#include "rumorlab/sincon.hpp"

namespace oracle {

using rumorlab::Edge;
using rumorlab::Label;
using rumorlab::Matrix;
using rumorlab::ModelParams;
using rumorlab::PropagationTree;

inline std::vector<std::size_t> degrees(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::size_t> d(n, 0);
  for (const auto& [p, c] : edges) {
    ++d[p];
    ++d[c];
  }
  return d;
}

inline std::vector<double> influence(std::size_t n, const std::vector<Edge>& edges) {
  const auto d = degrees(n, edges);
  std::vector<double> s(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    s[u] = std::sqrt(static_cast<double>(d[u] * d[u]));
    for (const auto& [p, c] : edges) {
      if (p == u) s[u] += std::sqrt(static_cast<double>(d[u] * d[c]));
      if (c == u) s[u] += std::sqrt(static_cast<double>(d[u] * d[p]));
    }
  }
  return s;
}

// Selection sort: repeatedly take the highest remaining score, lowest index on ties.
inline std::vector<std::size_t> rank(const std::vector<double>& scores) {
  std::vector<bool> taken(scores.size(), false);
  std::vector<std::size_t> order;
  for (std::size_t r = 0; r < scores.size(); ++r) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (taken[i]) continue;
      if (best == scores.size() || scores[i] > scores[best]) best = i;
    }
    taken[best] = true;
    order.push_back(best);
  }
  return order;
}

inline double cos_sim(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

struct Triple {
  std::vector<double> orig, imp, ump;
};

// Per-example contrastive losses assembled term by term.
inline std::vector<double> contrastive(const std::vector<Triple>& batch, double tau) {
  auto S = [tau](const std::vector<double>& a, const std::vector<double>& b) { return std::exp(cos_sim(a, b) / tau); };
  std::vector<double> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double pos = S(batch[i].imp, batch[i].ump) + S(batch[i].orig, batch[i].ump) + S(batch[i].orig, batch[i].imp);
    double neg = 0.0;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      neg += S(batch[i].orig, batch[j].orig);
      if (i != j) neg += S(batch[i].orig, batch[j].ump) + S(batch[i].orig, batch[j].imp);
    }
    out.push_back(-std::log(pos / neg));
  }
  return out;
}

// Random recursive tree: node j attaches to a uniform earlier node.
inline std::vector<Edge> random_edges(std::size_t n, std::mt19937_64& rng) {
  std::vector<Edge> edges;
  for (std::size_t j = 1; j < n; ++j) edges.emplace_back(std::uniform_int_distribution<std::size_t>(0, j - 1)(rng), j);
  return edges;
}

inline PropagationTree random_tree(std::size_t n, std::mt19937_64& rng, Label label = Label::Rumor) {
  static const char* words[] = {"alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
                                "india", "juliet", "kilo", "lima", "mike", "november", "oscar", "papa"};
  std::vector<std::string> texts;
  std::uniform_int_distribution<std::size_t> pick(0, std::size(words) - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::string t = words[pick(rng)];
    for (int k = 0; k < 3; ++k) t += std::string(" ") + words[pick(rng)];
    texts.push_back(t);
  }
  return PropagationTree::from_texts(texts, random_edges(n, rng), label);
}

inline Matrix random_features(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, d);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

struct FdResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central differences over every parameter entry, compared against `analytic`.
// Relative error uses max(|a|, |n|, floor) in the denominator.
inline FdResult finite_difference_check(const ModelParams& params, const ModelParams& analytic,
                                        const std::function<double(const ModelParams&)>& loss, double step,
                                        double floor = 1e-6) {
  FdResult r;
  ModelParams probe = params;
  const auto slots = probe.tensors();
  const auto grads = analytic.tensors();
  for (std::size_t t = 0; t < slots.size(); ++t) {
    for (std::size_t k = 0; k < slots[t]->size(); ++k) {
      double& x = slots[t]->values()[k];
      const double saved = x;
      x = saved + step;
      const double up = loss(probe);
      x = saved - step;
      const double down = loss(probe);
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = grads[t]->values()[k];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      r.max_rel_error = std::max(r.max_rel_error, std::abs(a - numeric) / denom);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace oracle
