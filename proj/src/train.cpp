#include "rumorlab/train.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <optional>

#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"
#include "rumorlab/sincon.hpp"

namespace rumorlab {

const char* to_string(TrainMode mode) { return mode == TrainMode::Normal ? "normal" : "sincon"; }
const char* to_string(Augmentation aug) { return aug == Augmentation::Influence ? "influence" : "random"; }

TrainMode parse_train_mode(const std::string& text) {
  if (text == "normal") return TrainMode::Normal;
  if (text == "sincon") return TrainMode::Sincon;
  throw ArgumentError("unknown training mode '" + text + "'");
}

Augmentation parse_augmentation(const std::string& text) {
  if (text == "influence") return Augmentation::Influence;
  if (text == "random") return Augmentation::Random;
  throw ArgumentError("unknown augmentation '" + text + "'");
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ArgumentError("epochs must be positive");
  if (batch_size == 0) throw ArgumentError("batch size must be positive");
  if (!(lr > 0.0)) throw ArgumentError("learning rate must be positive");
  if (!(tau > 0.0)) throw ArgumentError("temperature must be positive");
  if (alpha1 < 0.0 || alpha2 < 0.0) throw ArgumentError("alpha weights must be non-negative");
}

std::vector<EncodedTree> encode_corpus(const EncoderConfig& cfg, const Corpus& corpus) {
  std::vector<EncodedTree> out;
  out.reserve(corpus.size());
  for (const auto& tree : corpus) out.push_back({tree, encode_tree(cfg, tree)});
  return out;
}

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kRandomViewStream = 2;

void descend(ModelParams& params, const ModelParams& grads, double lr) {
  auto dst = params.tensors();
  auto src = grads.tensors();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i]->add_scaled(*src[i], -lr);
}

}  // namespace

TrainResult train(ModelParams params, std::span<const EncodedTree> train_set, const TrainConfig& config) {
  config.validate();
  params.validate();
  if (train_set.empty()) throw ArgumentError("training set is empty");
  const bool sincon = config.mode == TrainMode::Sincon;

  std::vector<std::optional<AugmentedViews>> fixed_views(train_set.size());
  if (sincon && config.augmentation == Augmentation::Influence) {
    for (std::size_t i = 0; i < train_set.size(); ++i) {
      const auto& s = train_set[i];
      fixed_views[i] = make_views(s.tree, s.features, rank_by_influence(s.tree));
    }
  }
  const LossWeights weights{config.tau, config.alpha1, config.alpha2};

  std::vector<std::size_t> order(train_set.size());
  TrainResult result;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(derive_seed(config.seed, kShuffleStream), epoch));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    EpochLoss record;
    record.epoch = epoch;
    std::size_t step = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      try {
        GradientResult g;
        if (!sincon) {
          g = gradients(params, [&](ad::Tape& tape, const ParamVars& vars) {
            ad::Var sup;
            for (std::size_t k = start; k < end; ++k) {
              const auto& s = train_set[order[k]];
              const auto ops = tree_operators(s.tree, params.arch);
              const auto out = forward_on_tape(tape, vars, params, ops, s.features);
              const ad::Var l = ad::softmax_cross_entropy(out.logits, class_index(s.tree.label()));
              sup = k == start ? l : ad::add(sup, l);
            }
            return sup;
          });
          record.sup += g.loss;
        } else {
          std::vector<AugmentedViews> drawn;
          drawn.reserve(end - start);
          std::vector<ViewedExample> batch;
          batch.reserve(end - start);
          for (std::size_t k = start; k < end; ++k) {
            const std::size_t idx = order[k];
            const auto& s = train_set[idx];
            const AugmentedViews* views = nullptr;
            if (fixed_views[idx]) {
              views = &*fixed_views[idx];
            } else {
              const std::uint64_t view_seed =
                  derive_seed(derive_seed(derive_seed(config.seed, kRandomViewStream), epoch), idx);
              drawn.push_back(make_random_views(s.tree, s.features, view_seed));
              views = &drawn.back();
            }
            batch.push_back({&s.tree, &s.features, views, s.tree.label()});
          }
          double sup = 0.0, sup_imp = 0.0, sup_ump = 0.0, con = 0.0;
          g = gradients(params, [&](ad::Tape& tape, const ParamVars& vars) {
            const TotalLossVars terms = total_loss_on_tape(tape, vars, params, batch, weights);
            sup = terms.sup.scalar();
            sup_imp = terms.sup_imp.scalar();
            sup_ump = terms.sup_ump.scalar();
            con = terms.sincon.scalar();
            return terms.total;
          });
          record.sup += sup;
          record.sup_imp += sup_imp;
          record.sup_ump += sup_ump;
          record.sincon += con;
        }
        if (!std::isfinite(g.loss)) throw NumericError("non-finite loss");
        record.total += g.loss;
        descend(params, g.grads, config.lr);
      } catch (const NumericError& e) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step) + ": " + e.what());
      } catch (const ArgumentError& e) {
        throw TrainingError("training failed at epoch " + std::to_string(epoch) + ", step " +
                            std::to_string(step) + ": " + e.what());
      }
    }
    for (const Matrix* m : params.tensors()) {
      if (!m->all_finite()) {
        throw TrainingError("parameters became non-finite at epoch " + std::to_string(epoch));
      }
    }
    result.history.push_back(record);
  }
  result.params = std::move(params);
  return result;
}

std::string history_csv(const std::vector<EpochLoss>& history) {
  std::string out = "epoch,total,sup,sup_imp,sup_ump,sincon\n";
  char line[256];
  for (const auto& h : history) {
    std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", h.epoch, h.total, h.sup, h.sup_imp,
                  h.sup_ump, h.sincon);
    out += line;
  }
  return out;
}

std::vector<Prediction> predict_all(const ModelParams& params, std::span<const EncodedTree> samples) {
  std::vector<Prediction> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(forward(params, s.tree, s.features));
  return out;
}

double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  if (predicted.size() != truth.size()) throw ArgumentError("accuracy: length mismatch");
  if (predicted.empty()) throw ArgumentError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double evaluate(const ModelParams& params, std::span<const EncodedTree> samples) {
  if (samples.empty()) throw ArgumentError("evaluate: empty corpus");
  std::vector<Label> pred, truth;
  for (const auto& p : predict_all(params, samples)) pred.push_back(p.label);
  for (const auto& s : samples) truth.push_back(s.tree.label());
  return accuracy(pred, truth);
}

}  // namespace rumorlab
