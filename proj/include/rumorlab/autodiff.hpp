#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "rumorlab/matrix.hpp"

/// Minimal tape-based reverse-mode differentiation over dense matrices.
///
/// Every op appends a node holding its value and a closure that pushes the
/// node's output gradient into its parents. Nodes are appended in evaluation
/// order, so a reverse sweep over the tape is a valid topological order.
/// Scalars are 1x1 matrices.
namespace rumorlab::ad {

class Tape;

/// Handle to a tape node. Cheap to copy; valid as long as its tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  /// Value of a 1x1 node.
  double scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is accumulated by backward().
  Var parameter(Matrix value);

  const Matrix& value(const Var& v) const { return nodes_[v.id()].value; }
  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  /// Gradient of the last backward() target; zeros if the node was not reached.
  Matrix grad(const Var& v) const;

  /// Seeds d(loss)/d(loss) = 1 and sweeps the tape backwards. `loss` must be 1x1.
  /// Throws NumericError naming the op if a non-finite gradient appears.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

  // Op implementation interface.
  Var record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward, const char* op);
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  /// Accumulates g into node id's gradient (no-op for constants).
  void accumulate(std::size_t id, const Matrix& g);
  void accumulate_scaled(std::size_t id, const Matrix& g, double scale);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    const char* op = "leaf";
  };
  Var push(Node node);
  std::vector<Node> nodes_;
};

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
/// Elementwise product of equal shapes.
Var mul(const Var& a, const Var& b);
/// Elementwise quotient of equal shapes.
Var div(const Var& a, const Var& b);
Var scale(const Var& x, double c);
/// x + row, with a 1 x cols row broadcast over every row of x.
Var add_row(const Var& x, const Var& row);
Var relu(const Var& x);
Var exp(const Var& x);
Var log(const Var& x);
/// 1 x cols mean of the rows.
Var mean_rows(const Var& x);
Var concat_cols(const Var& a, const Var& b);
/// Sum of all entries as a 1x1 node.
Var sum(const Var& x);
/// Cosine similarity of two 1 x k vectors. Throws ArgumentError on a zero vector.
Var cosine(const Var& a, const Var& b);
/// -log softmax(logits)[cls] for a 1 x C logits row.
Var softmax_cross_entropy(const Var& logits, std::size_t cls);

}  // namespace rumorlab::ad
