#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rumorlab/autodiff.hpp"
#include "rumorlab/matrix.hpp"
#include "rumorlab/mpt.hpp"

namespace rumorlab {

/// Gcn: one stack over the symmetrically normalized undirected adjacency.
/// BiGcn: a top-down stack and a bottom-up stack over directed, row-normalized
/// adjacencies; the two mean readouts are concatenated.
enum class Architecture { Gcn, BiGcn };

const char* to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

struct DetectorConfig {
  Architecture arch = Architecture::Gcn;
  std::vector<std::size_t> hidden_dims{32, 16};
};

struct DenseLayer {
  Matrix weight;  // in x out
  Matrix bias;    // 1 x out

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ModelParams {
  Architecture arch = Architecture::Gcn;
  std::size_t input_dim = 0;
  std::vector<DenseLayer> layers;
  std::vector<DenseLayer> reverse_layers;  // BiGcn only
  DenseLayer classifier;                   // summary_dim x 2

  std::size_t summary_dim() const;
  /// Every trainable tensor in a fixed order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;
  /// Throws ArgumentError on inconsistent shapes or non-finite entries.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Uniform [-0.1, 0.1] initialization from `seed`.
ModelParams init_params(const DetectorConfig& cfg, std::size_t input_dim, std::uint64_t seed);

std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);

struct Prediction {
  std::vector<double> summary;
  std::array<double, 2> probs{};
  Label label = Label::Rumor;
};

/// Copy of `features` with the listed rows zeroed.
Matrix apply_mask(const Matrix& features, std::span<const std::size_t> mask);

/// D^{-1/2} (A + I) D^{-1/2} over undirected edges.
Matrix normalized_adjacency(const PropagationTree& tree);
/// Row-normalized (A + I) where each node aggregates from its parent (top_down)
/// or from its children (bottom_up).
Matrix directed_adjacency(const PropagationTree& tree, bool top_down);

/// Parameters bound to a tape.
struct ParamVars {
  std::vector<std::pair<ad::Var, ad::Var>> layers;
  std::vector<std::pair<ad::Var, ad::Var>> reverse_layers;
  ad::Var classifier_weight;
  ad::Var classifier_bias;
};

/// Binds every tensor of `params` as a parameter (trainable) or constant node.
ParamVars bind_params(ad::Tape& tape, const ModelParams& params, bool trainable);

struct ForwardVars {
  ad::Var summary;  // 1 x summary_dim
  ad::Var logits;   // 1 x 2
};

/// Propagation operators of one tree, reusable across forward passes of its views.
struct TreeOperators {
  Matrix primary;    // normalized adjacency (Gcn) or top-down operator (BiGcn)
  Matrix secondary;  // bottom-up operator (BiGcn only)
};
TreeOperators tree_operators(const PropagationTree& tree, Architecture arch);

ForwardVars forward_on_tape(ad::Tape& tape, const ParamVars& vars, const ModelParams& params,
                            const TreeOperators& ops, const Matrix& features);

/// Full forward pass. Masked nodes keep their edges but have zero features.
Prediction forward(const ModelParams& params, const PropagationTree& tree, const Matrix& features,
                   std::span<const std::size_t> mask = {});

struct BatchItem {
  const PropagationTree* tree = nullptr;
  const Matrix* features = nullptr;
  std::vector<std::size_t> mask;
};
using TreeBatch = std::vector<BatchItem>;

/// Sum over the batch of the cross-entropy against `labels`.
double supervised_loss(const ModelParams& params, const TreeBatch& batch, std::span<const Label> labels);

using LossClosure = std::function<ad::Var(ad::Tape&, const ParamVars&)>;

struct GradientResult {
  double loss = 0.0;
  ModelParams grads;  // same shapes as the input parameters
};

/// Exact reverse-mode gradients of the scalar returned by `closure`.
GradientResult gradients(const ModelParams& params, const LossClosure& closure);

}  // namespace rumorlab
