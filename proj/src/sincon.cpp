#include "rumorlab/sincon.hpp"

#include <algorithm>
#include <cmath>

#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

std::size_t mask_size(std::size_t n) { return std::max<std::size_t>(1, (n + 9) / 10); }

namespace {

void check_view_inputs(const PropagationTree& tree, const Matrix& features) {
  if (features.rows() != tree.size()) throw ArgumentError("feature rows do not match the tree");
  if (tree.size() < 3) {
    throw DegenerateInputError("masked views need at least 3 nodes, tree has " + std::to_string(tree.size()));
  }
}

AugmentedViews finish_views(const Matrix& features, std::vector<std::size_t> imp, std::vector<std::size_t> ump) {
  for (std::size_t u : imp) {
    if (std::find(ump.begin(), ump.end(), u) != ump.end()) {
      throw DegenerateInputError("important and unimportant masks overlap at node " + std::to_string(u));
    }
  }
  AugmentedViews views;
  views.imp_features = apply_mask(features, imp);
  views.ump_features = apply_mask(features, ump);
  views.imp_mask = std::move(imp);
  views.ump_mask = std::move(ump);
  return views;
}

}  // namespace

AugmentedViews make_views(const PropagationTree& tree, const Matrix& features, const InfluenceRanking& ranking) {
  check_view_inputs(tree, features);
  if (ranking.order.size() != tree.size()) throw ArgumentError("ranking does not match the tree");
  const std::size_t k = mask_size(tree.size());
  std::vector<std::size_t> imp, ump;
  for (auto it = ranking.order.begin(); it != ranking.order.end() && imp.size() < k; ++it) {
    if (*it != 0) imp.push_back(*it);
  }
  for (auto it = ranking.order.rbegin(); it != ranking.order.rend() && ump.size() < k; ++it) {
    if (*it != 0) ump.push_back(*it);
  }
  return finish_views(features, std::move(imp), std::move(ump));
}

AugmentedViews make_random_views(const PropagationTree& tree, const Matrix& features, std::uint64_t seed) {
  check_view_inputs(tree, features);
  const std::size_t k = mask_size(tree.size());
  if (2 * k > tree.size() - 1) throw DegenerateInputError("tree too small for two disjoint masks");
  std::vector<std::size_t> candidates;
  for (std::size_t u = 1; u < tree.size(); ++u) candidates.push_back(u);
  Rng rng(seed);
  // Partial Fisher-Yates: the first 2k slots are a uniform draw without replacement.
  for (std::size_t i = 0; i < 2 * k; ++i) std::swap(candidates[i], candidates[i + rng.index(candidates.size() - i)]);
  std::vector<std::size_t> imp(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::size_t> ump(candidates.begin() + static_cast<std::ptrdiff_t>(k),
                               candidates.begin() + static_cast<std::ptrdiff_t>(2 * k));
  return finish_views(features, std::move(imp), std::move(ump));
}

double sim_kernel(std::span<const double> a, std::span<const double> b, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive");
  double c = 0.0;
  try {
    c = cosine(a, b);
  } catch (const DegenerateInputError& e) {
    throw ArgumentError(std::string("sim_kernel: ") + e.what());
  }
  return std::exp(c / tau);
}

SinconBatchLoss sincon_loss(std::span<const SummaryTriple> summaries, double tau) {
  if (summaries.empty()) throw ArgumentError("sincon_loss: empty batch");
  const std::size_t b = summaries.size();
  SinconBatchLoss out;
  out.positive.resize(b);
  out.negative.resize(b);
  out.loss.resize(b);
  for (std::size_t i = 0; i < b; ++i) {
    const auto& si = summaries[i];
    out.positive[i] = sim_kernel(si.imp, si.ump, tau) + sim_kernel(si.original, si.ump, tau) +
                      sim_kernel(si.original, si.imp, tau);
    double neg = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const auto& sj = summaries[j];
      neg += sim_kernel(si.original, sj.original, tau);
      if (j != i) neg += sim_kernel(si.original, sj.ump, tau) + sim_kernel(si.original, sj.imp, tau);
    }
    out.negative[i] = neg;
    out.loss[i] = -std::log(out.positive[i] / neg);
  }
  double total = 0.0;
  for (double l : out.loss) total += l;
  out.mean = total / static_cast<double>(b);
  return out;
}

ad::Var sincon_loss_on_tape(std::span<const std::array<ad::Var, 3>> summaries, double tau) {
  if (summaries.empty()) throw ArgumentError("sincon_loss: empty batch");
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive");
  const double inv_tau = 1.0 / tau;
  auto kernel = [inv_tau](const ad::Var& a, const ad::Var& b) { return ad::exp(ad::scale(ad::cosine(a, b), inv_tau)); };
  const std::size_t b = summaries.size();
  ad::Var total;
  for (std::size_t i = 0; i < b; ++i) {
    const auto& [orig, imp, ump] = summaries[i];
    const ad::Var positive = ad::add(ad::add(kernel(imp, ump), kernel(orig, ump)), kernel(orig, imp));
    ad::Var negative;
    for (std::size_t j = 0; j < b; ++j) {
      ad::Var term = kernel(orig, summaries[j][0]);
      if (j != i) term = ad::add(term, ad::add(kernel(orig, summaries[j][2]), kernel(orig, summaries[j][1])));
      negative = j == 0 ? term : ad::add(negative, term);
    }
    const ad::Var loss_i = ad::scale(ad::log(ad::div(positive, negative)), -1.0);
    total = i == 0 ? loss_i : ad::add(total, loss_i);
  }
  return ad::scale(total, 1.0 / static_cast<double>(b));
}

TotalLossVars total_loss_on_tape(ad::Tape& tape, const ParamVars& vars, const ModelParams& params,
                                 std::span<const ViewedExample> batch, const LossWeights& weights) {
  if (batch.empty()) throw ArgumentError("total_loss: empty batch");
  if (weights.alpha1 < 0.0 || weights.alpha2 < 0.0) throw ArgumentError("loss weights must be non-negative");
  std::vector<std::array<ad::Var, 3>> summaries;
  summaries.reserve(batch.size());
  TotalLossVars out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& ex = batch[i];
    const TreeOperators ops = tree_operators(*ex.tree, params.arch);
    const std::size_t cls = class_index(ex.label);
    const ForwardVars orig = forward_on_tape(tape, vars, params, ops, *ex.features);
    const ForwardVars imp = forward_on_tape(tape, vars, params, ops, ex.views->imp_features);
    const ForwardVars ump = forward_on_tape(tape, vars, params, ops, ex.views->ump_features);
    const ad::Var l0 = ad::softmax_cross_entropy(orig.logits, cls);
    const ad::Var l1 = ad::softmax_cross_entropy(imp.logits, cls);
    const ad::Var l2 = ad::softmax_cross_entropy(ump.logits, cls);
    out.sup = i == 0 ? l0 : ad::add(out.sup, l0);
    out.sup_imp = i == 0 ? l1 : ad::add(out.sup_imp, l1);
    out.sup_ump = i == 0 ? l2 : ad::add(out.sup_ump, l2);
    summaries.push_back({orig.summary, imp.summary, ump.summary});
  }
  out.sincon = sincon_loss_on_tape(summaries, weights.tau);
  const ad::Var aug = ad::scale(ad::add(out.sup_imp, out.sup_ump), weights.alpha1);
  out.total = ad::add(ad::add(out.sup, aug), ad::scale(out.sincon, weights.alpha2));
  return out;
}

double total_loss(const ModelParams& params, std::span<const ViewedExample> batch, const LossWeights& weights) {
  ad::Tape tape;
  const ParamVars vars = bind_params(tape, params, false);
  return total_loss_on_tape(tape, vars, params, batch, weights).total.scalar();
}

double influence_gap(const ModelParams& params, const PropagationTree& tree, const AugmentedViews& views) {
  const Prediction imp = forward(params, tree, views.imp_features);
  const Prediction ump = forward(params, tree, views.ump_features);
  return std::abs(ump.probs[0] - imp.probs[0]) + std::abs(ump.probs[1] - imp.probs[1]);
}

}  // namespace rumorlab
