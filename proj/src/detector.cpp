#include "rumorlab/detector.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "rumorlab/errors.hpp"
#include "rumorlab/rng.hpp"

namespace rumorlab {

const char* to_string(Architecture arch) { return arch == Architecture::Gcn ? "gcn" : "bigcn"; }

Architecture parse_architecture(const std::string& text) {
  if (text == "gcn") return Architecture::Gcn;
  if (text == "bigcn") return Architecture::BiGcn;
  throw ArgumentError("unknown architecture '" + text + "'");
}

std::size_t ModelParams::summary_dim() const {
  if (layers.empty()) return 0;
  const std::size_t d = layers.back().weight.cols();
  return arch == Architecture::BiGcn ? 2 * d : d;
}

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out;
  for (auto& l : layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  for (auto& l : reverse_layers) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  out.push_back(&classifier.weight);
  out.push_back(&classifier.bias);
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  std::vector<const Matrix*> out;
  for (Matrix* m : const_cast<ModelParams*>(this)->tensors()) out.push_back(m);
  return out;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : tensors()) n += m->size();
  return n;
}

namespace {

void check_stack(const std::vector<DenseLayer>& stack, std::size_t input_dim, const char* name) {
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    const auto& layer = stack[l];
    if (layer.weight.rows() != in || layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
      throw ArgumentError(std::string(name) + " layer " + std::to_string(l) + " has inconsistent shape");
    }
    in = layer.weight.cols();
  }
}

DenseLayer random_layer(Rng& rng, std::size_t in, std::size_t out) {
  DenseLayer layer{Matrix(in, out), Matrix(1, out)};
  for (double& v : layer.weight.values()) v = rng.uniform(-0.1, 0.1);
  for (double& v : layer.bias.values()) v = rng.uniform(-0.1, 0.1);
  return layer;
}

}  // namespace

void ModelParams::validate() const {
  if (layers.empty()) throw ArgumentError("model needs at least one propagation layer");
  check_stack(layers, input_dim, "propagation");
  if (arch == Architecture::BiGcn) {
    if (reverse_layers.size() != layers.size()) throw ArgumentError("bigcn stacks differ in depth");
    check_stack(reverse_layers, input_dim, "reverse propagation");
    if (reverse_layers.back().weight.cols() != layers.back().weight.cols()) {
      throw ArgumentError("bigcn stacks differ in output width");
    }
  } else if (!reverse_layers.empty()) {
    throw ArgumentError("gcn model carries reverse layers");
  }
  if (classifier.weight.rows() != summary_dim() || classifier.weight.cols() != 2 ||
      classifier.bias.rows() != 1 || classifier.bias.cols() != 2) {
    throw ArgumentError("classifier must map the summary to 2 classes");
  }
  for (const Matrix* m : tensors()) {
    if (!m->all_finite()) throw ArgumentError("model parameters contain non-finite entries");
  }
}

ModelParams init_params(const DetectorConfig& cfg, std::size_t input_dim, std::uint64_t seed) {
  if (cfg.hidden_dims.empty()) throw ArgumentError("hidden_dims must list at least one layer");
  if (input_dim == 0) throw ArgumentError("input_dim must be positive");
  Rng rng(seed);
  ModelParams p;
  p.arch = cfg.arch;
  p.input_dim = input_dim;
  std::size_t in = input_dim;
  for (std::size_t h : cfg.hidden_dims) {
    if (h == 0) throw ArgumentError("hidden dims must be positive");
    p.layers.push_back(random_layer(rng, in, h));
    in = h;
  }
  if (cfg.arch == Architecture::BiGcn) {
    in = input_dim;
    for (std::size_t h : cfg.hidden_dims) {
      p.reverse_layers.push_back(random_layer(rng, in, h));
      in = h;
    }
  }
  p.classifier = random_layer(rng, p.summary_dim(), 2);
  return p;
}

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("data").get<std::vector<double>>());
}

json stack_json(const std::vector<DenseLayer>& stack) {
  json out = json::array();
  for (const auto& l : stack) out.push_back({{"weight", matrix_json(l.weight)}, {"bias", matrix_json(l.bias)}});
  return out;
}

std::vector<DenseLayer> stack_from(const json& j) {
  std::vector<DenseLayer> out;
  for (const auto& l : j) out.push_back({matrix_from(l.at("weight")), matrix_from(l.at("bias"))});
  return out;
}

}  // namespace

std::string params_to_json(const ModelParams& params) {
  json j{{"arch", to_string(params.arch)},
         {"input_dim", params.input_dim},
         {"layers", stack_json(params.layers)},
         {"reverse_layers", stack_json(params.reverse_layers)},
         {"classifier", {{"weight", matrix_json(params.classifier.weight)}, {"bias", matrix_json(params.classifier.bias)}}}};
  return j.dump() + "\n";
}

ModelParams params_from_json(const std::string& text) {
  ModelParams p;
  try {
    const json j = json::parse(text);
    p.arch = parse_architecture(j.at("arch").get<std::string>());
    p.input_dim = j.at("input_dim").get<std::size_t>();
    p.layers = stack_from(j.at("layers"));
    p.reverse_layers = stack_from(j.at("reverse_layers"));
    p.classifier = {matrix_from(j.at("classifier").at("weight")), matrix_from(j.at("classifier").at("bias"))};
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file: ") + e.what());
  }
  p.validate();
  return p;
}

Matrix apply_mask(const Matrix& features, std::span<const std::size_t> mask) {
  Matrix out = features;
  for (std::size_t u : mask) {
    if (u >= out.rows()) throw ArgumentError("mask index " + std::to_string(u) + " out of range");
    for (double& v : out.row(u)) v = 0.0;
  }
  return out;
}

Matrix normalized_adjacency(const PropagationTree& tree) {
  const std::size_t n = tree.size();
  Matrix a(n, n);
  std::vector<double> inv_sqrt(n);
  for (std::size_t u = 0; u < n; ++u) {
    inv_sqrt[u] = 1.0 / std::sqrt(static_cast<double>(degree(tree, u) + 1));
  }
  for (std::size_t u = 0; u < n; ++u) {
    a(u, u) = inv_sqrt[u] * inv_sqrt[u];
    for (std::size_t v : tree.neighbors(u)) a(u, v) = inv_sqrt[u] * inv_sqrt[v];
  }
  return a;
}

Matrix directed_adjacency(const PropagationTree& tree, bool top_down) {
  const std::size_t n = tree.size();
  Matrix a(n, n);
  for (std::size_t u = 0; u < n; ++u) {
    a(u, u) = 1.0;
    if (top_down) {
      if (u != 0) a(u, tree.parent(u)) = 1.0;
    } else {
      for (std::size_t c : tree.children(u)) a(u, c) = 1.0;
    }
    auto row = a.row(u);
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
  return a;
}

TreeOperators tree_operators(const PropagationTree& tree, Architecture arch) {
  if (arch == Architecture::Gcn) return {normalized_adjacency(tree), Matrix()};
  return {directed_adjacency(tree, true), directed_adjacency(tree, false)};
}

ParamVars bind_params(ad::Tape& tape, const ModelParams& params, bool trainable) {
  auto bind = [&](const Matrix& m) { return trainable ? tape.parameter(m) : tape.constant(m); };
  ParamVars vars;
  for (const auto& l : params.layers) vars.layers.emplace_back(bind(l.weight), bind(l.bias));
  for (const auto& l : params.reverse_layers) vars.reverse_layers.emplace_back(bind(l.weight), bind(l.bias));
  vars.classifier_weight = bind(params.classifier.weight);
  vars.classifier_bias = bind(params.classifier.bias);
  return vars;
}

namespace {

ad::Var propagate(ad::Tape& tape, const std::vector<std::pair<ad::Var, ad::Var>>& stack, const Matrix& op,
                  const Matrix& features) {
  const ad::Var a = tape.constant(op);
  ad::Var h = tape.constant(features);
  for (const auto& [w, b] : stack) {
    // A (H W) rather than (A H) W: H is sparse in the first layer.
    h = ad::relu(ad::add_row(ad::matmul(a, ad::matmul(h, w)), b));
  }
  return ad::mean_rows(h);
}

}  // namespace

ForwardVars forward_on_tape(ad::Tape& tape, const ParamVars& vars, const ModelParams& params,
                            const TreeOperators& ops, const Matrix& features) {
  if (features.cols() != params.input_dim) {
    throw ArgumentError("feature dimension " + std::to_string(features.cols()) + " does not match model input " +
                        std::to_string(params.input_dim));
  }
  if (features.rows() != ops.primary.rows()) throw ArgumentError("feature rows do not match the tree");
  ad::Var summary = propagate(tape, vars.layers, ops.primary, features);
  if (params.arch == Architecture::BiGcn) {
    summary = ad::concat_cols(summary, propagate(tape, vars.reverse_layers, ops.secondary, features));
  }
  const ad::Var logits = ad::add(ad::matmul(summary, vars.classifier_weight), vars.classifier_bias);
  return {summary, logits};
}

Prediction forward(const ModelParams& params, const PropagationTree& tree, const Matrix& features,
                   std::span<const std::size_t> mask) {
  if (features.rows() != tree.size()) throw ArgumentError("feature rows do not match the tree");
  ad::Tape tape;
  const ParamVars vars = bind_params(tape, params, false);
  const TreeOperators ops = tree_operators(tree, params.arch);
  const ForwardVars out =
      mask.empty() ? forward_on_tape(tape, vars, params, ops, features)
                   : forward_on_tape(tape, vars, params, ops, apply_mask(features, mask));
  Prediction pred;
  const auto s = out.summary.value().values();
  pred.summary.assign(s.begin(), s.end());
  const Matrix& z = out.logits.value();
  const double m = std::max(z(0, 0), z(0, 1));
  const double e0 = std::exp(z(0, 0) - m), e1 = std::exp(z(0, 1) - m);
  pred.probs = {e0 / (e0 + e1), e1 / (e0 + e1)};
  pred.label = pred.probs[1] > pred.probs[0] ? Label::NonRumor : Label::Rumor;
  return pred;
}

double supervised_loss(const ModelParams& params, const TreeBatch& batch, std::span<const Label> labels) {
  if (batch.empty()) throw ArgumentError("supervised_loss: empty batch");
  if (labels.size() != batch.size()) throw ArgumentError("supervised_loss: one label per example required");
  ad::Tape tape;
  const ParamVars vars = bind_params(tape, params, false);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& item = batch[i];
    const TreeOperators ops = tree_operators(*item.tree, params.arch);
    const ForwardVars out = forward_on_tape(tape, vars, params, ops, apply_mask(*item.features, item.mask));
    total += ad::softmax_cross_entropy(out.logits, class_index(labels[i])).scalar();
  }
  return total;
}

GradientResult gradients(const ModelParams& params, const LossClosure& closure) {
  ad::Tape tape;
  const ParamVars vars = bind_params(tape, params, true);
  const ad::Var loss = closure(tape, vars);
  tape.backward(loss);

  GradientResult result;
  result.loss = loss.scalar();
  result.grads = params;
  auto set = [&](Matrix& dst, const ad::Var& v) { dst = tape.grad(v); };
  for (std::size_t l = 0; l < vars.layers.size(); ++l) {
    set(result.grads.layers[l].weight, vars.layers[l].first);
    set(result.grads.layers[l].bias, vars.layers[l].second);
  }
  for (std::size_t l = 0; l < vars.reverse_layers.size(); ++l) {
    set(result.grads.reverse_layers[l].weight, vars.reverse_layers[l].first);
    set(result.grads.reverse_layers[l].bias, vars.reverse_layers[l].second);
  }
  set(result.grads.classifier.weight, vars.classifier_weight);
  set(result.grads.classifier.bias, vars.classifier_bias);
  return result;
}

}  // namespace rumorlab
