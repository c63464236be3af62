#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "rumorlab/autodiff.hpp"
#include "rumorlab/detector.hpp"
#include "rumorlab/matrix.hpp"
#include "rumorlab/mpt.hpp"

namespace rumorlab {

/// Two masked copies of one tree's features: one with its most influential
/// nodes blanked and one with its least influential nodes blanked. Edges are
/// untouched and the root is never masked.
struct AugmentedViews {
  std::vector<std::size_t> imp_mask;
  std::vector<std::size_t> ump_mask;
  Matrix imp_features;
  Matrix ump_features;
};

/// Nodes masked per view: max(1, ceil(n / 10)).
std::size_t mask_size(std::size_t n);

/// imp_mask takes the first k non-root nodes of ranking.order, ump_mask the
/// first k non-root nodes of the reversed order.
/// Throws DegenerateInputError when n < 3 or the two masks would overlap.
AugmentedViews make_views(const PropagationTree& tree, const Matrix& features, const InfluenceRanking& ranking);

/// Same mask sizes, both masks drawn uniformly (disjoint, non-root) from `seed`.
AugmentedViews make_random_views(const PropagationTree& tree, const Matrix& features, std::uint64_t seed);

/// exp(cos(a, b) / tau). Throws ArgumentError when tau <= 0 or a vector is zero.
double sim_kernel(std::span<const double> a, std::span<const double> b, double tau);

/// Summaries of one example: original, important-masked and unimportant-masked.
struct SummaryTriple {
  std::vector<double> original;
  std::vector<double> imp;
  std::vector<double> ump;
};

struct SinconBatchLoss {
  std::vector<double> positive;  // S_positive per example
  std::vector<double> negative;  // sum over j of S_negative(i, j)
  std::vector<double> loss;      // -log(positive / negative)
  double mean = 0.0;
};

/// Contrastive loss over a batch. For example i, the positive mass ties the
/// two views to each other and to the original; the negative mass pairs the
/// original with every original in the batch (including itself) and with the
/// views of every other example.
SinconBatchLoss sincon_loss(std::span<const SummaryTriple> summaries, double tau);

/// Tape form of sincon_loss; returns the batch mean as a 1x1 node.
ad::Var sincon_loss_on_tape(std::span<const std::array<ad::Var, 3>> summaries, double tau);

/// One training example with its views.
struct ViewedExample {
  const PropagationTree* tree = nullptr;
  const Matrix* features = nullptr;
  const AugmentedViews* views = nullptr;
  Label label = Label::Rumor;
};

struct LossWeights {
  double tau = 0.5;
  double alpha1 = 1e-5;
  double alpha2 = 1e-2;
};

struct TotalLossVars {
  ad::Var total;
  ad::Var sup;
  ad::Var sup_imp;
  ad::Var sup_ump;
  ad::Var sincon;
};

/// sup + alpha1 * (sup_imp + sup_ump) + alpha2 * sincon, where the sup terms
/// are summed over the batch and sincon is the batch mean.
TotalLossVars total_loss_on_tape(ad::Tape& tape, const ParamVars& vars, const ModelParams& params,
                                 std::span<const ViewedExample> batch, const LossWeights& weights);

double total_loss(const ModelParams& params, std::span<const ViewedExample> batch, const LossWeights& weights);

/// ||P(G_ump) - P(G_imp)||_1, in [0, 2].
double influence_gap(const ModelParams& params, const PropagationTree& tree, const AugmentedViews& views);

}  // namespace rumorlab
