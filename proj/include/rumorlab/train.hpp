#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rumorlab/detector.hpp"
#include "rumorlab/encoder.hpp"
#include "rumorlab/mpt.hpp"

namespace rumorlab {

enum class TrainMode { Normal, Sincon };
enum class Augmentation { Influence, Random };

const char* to_string(TrainMode mode);
const char* to_string(Augmentation aug);
TrainMode parse_train_mode(const std::string& text);
Augmentation parse_augmentation(const std::string& text);

struct TrainConfig {
  std::size_t epochs = 40;
  double lr = 0.02;
  std::size_t batch_size = 16;
  double tau = 0.5;
  double alpha1 = 0.1;
  double alpha2 = 1e-2;
  TrainMode mode = TrainMode::Normal;
  Augmentation augmentation = Augmentation::Influence;
  std::uint64_t seed = 0;

  void validate() const;
};

/// A tree with its encoded feature matrix.
struct EncodedTree {
  PropagationTree tree;
  Matrix features;
};

std::vector<EncodedTree> encode_corpus(const EncoderConfig& cfg, const Corpus& corpus);

/// Per-epoch sums over the epoch's steps. In normal mode the view and
/// contrastive columns are zero.
struct EpochLoss {
  std::size_t epoch = 0;
  double total = 0.0;
  double sup = 0.0;
  double sup_imp = 0.0;
  double sup_ump = 0.0;
  double sincon = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochLoss> history;
};

/// Mini-batch gradient descent with a fixed learning rate. Batches follow a
/// seeded shuffle per epoch; in Sincon mode every step minimizes the combined
/// supervised + view-supervised + contrastive objective.
/// Throws TrainingError (with epoch and step) if the loss becomes non-finite.
TrainResult train(ModelParams params, std::span<const EncodedTree> train_set, const TrainConfig& config);

std::string history_csv(const std::vector<EpochLoss>& history);

std::vector<Prediction> predict_all(const ModelParams& params, std::span<const EncodedTree> samples);

/// Fraction of trees whose predicted label equals the tree's label.
double evaluate(const ModelParams& params, std::span<const EncodedTree> samples);

/// Fraction of predicted labels matching the given truths.
double accuracy(std::span<const Label> predicted, std::span<const Label> truth);

}  // namespace rumorlab
