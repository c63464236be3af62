#include "rumorlab/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rumorlab/errors.hpp"

namespace rumorlab::ad {

namespace {

void require_same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw ArgumentError(std::string(op) + ": operands live on different tapes");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ArgumentError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  }
}

void require_scalar(const Matrix& m, const char* what) {
  if (m.rows() != 1 || m.cols() != 1) throw ArgumentError(std::string(what) + " must be 1x1");
}

}  // namespace

const Matrix& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const Matrix& v = value();
  require_scalar(v, "scalar()");
  return v(0, 0);
}

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.op = "constant";
  return push(std::move(n));
}

Var Tape::parameter(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  n.op = "parameter";
  return push(std::move(n));
}

Var Tape::record(Matrix value, std::vector<std::size_t> parents, BackwardFn backward, const char* op) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  Node n;
  n.value = std::move(value);
  n.requires_grad = std::any_of(parents.begin(), parents.end(),
                                [this](std::size_t p) { return nodes_[p].requires_grad; });
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(backward);
  n.op = op;
  return push(std::move(n));
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) { accumulate_scaled(id, g, 1.0); }

void Tape::accumulate_scaled(std::size_t id, const Matrix& g, double scale) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  n.grad.add_scaled(g, scale);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw ArgumentError("backward: loss lives on another tape");
  require_scalar(value(loss), "backward target");
  for (auto& n : nodes_) n.grad = Matrix();
  nodes_[loss.id()].grad = Matrix::scalar(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    // Copy: the closure may grow sibling gradients but never this node's.
    const Matrix out_grad = n.grad;
    n.backward(*this, out_grad);
    for (std::size_t p : n.parents) {
      const Matrix& pg = nodes_[p].grad;
      if (!pg.empty() && !pg.all_finite()) {
        throw NumericError(std::string("non-finite gradient flowing out of ") + n.op);
      }
    }
  }
}

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b, "matmul");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(rumorlab::matmul(a.value(), b.value()), {ia, ib},
                  [ia, ib](Tape& tape, const Matrix& g) {
                    if (tape.requires_grad(ia)) tape.accumulate(ia, matmul_nt(g, tape.value(ib)));
                    if (tape.requires_grad(ib)) tape.accumulate(ib, matmul_tn(tape.value(ia), g));
                  },
                  "matmul");
}

Var add(const Var& a, const Var& b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value();
  out.add_scaled(b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {ia, ib},
                          [ia, ib](Tape& tape, const Matrix& g) {
                            tape.accumulate(ia, g);
                            tape.accumulate(ib, g);
                          },
                          "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Matrix out = a.value();
  out.add_scaled(b.value(), -1.0);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {ia, ib},
                          [ia, ib](Tape& tape, const Matrix& g) {
                            tape.accumulate(ia, g);
                            tape.accumulate_scaled(ib, g, -1.0);
                          },
                          "sub");
}

Var mul(const Var& a, const Var& b) {
  require_same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Matrix out = a.value();
  auto ov = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {ia, ib},
                          [ia, ib](Tape& tape, const Matrix& g) {
                            const Matrix& av = tape.value(ia);
                            const Matrix& bw = tape.value(ib);
                            Matrix ga = g, gb = g;
                            for (std::size_t i = 0; i < g.size(); ++i) {
                              ga.values()[i] *= bw.values()[i];
                              gb.values()[i] *= av.values()[i];
                            }
                            tape.accumulate(ia, ga);
                            tape.accumulate(ib, gb);
                          },
                          "mul");
}

Var div(const Var& a, const Var& b) {
  require_same_tape(a, b, "div");
  require_same_shape(a.value(), b.value(), "div");
  Matrix out = a.value();
  auto ov = out.values();
  auto bv = b.value().values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] /= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(out), {ia, ib},
                          [ia, ib](Tape& tape, const Matrix& g) {
                            const Matrix& av = tape.value(ia);
                            const Matrix& bw = tape.value(ib);
                            Matrix ga = g, gb = g;
                            for (std::size_t i = 0; i < g.size(); ++i) {
                              const double d = bw.values()[i];
                              ga.values()[i] /= d;
                              gb.values()[i] *= -av.values()[i] / (d * d);
                            }
                            tape.accumulate(ia, ga);
                            tape.accumulate(ib, gb);
                          },
                          "div");
}

Var scale(const Var& x, double c) {
  Matrix out = x.value();
  for (double& v : out.values()) v *= c;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {ix},
                          [ix, c](Tape& tape, const Matrix& g) { tape.accumulate_scaled(ix, g, c); },
                          "scale");
}

Var add_row(const Var& x, const Var& row) {
  require_same_tape(x, row, "add_row");
  const Matrix& xv = x.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != xv.cols()) throw ArgumentError("add_row: row shape mismatch");
  Matrix out = xv;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += rv(0, j);
  }
  const std::size_t ix = x.id(), ir = row.id();
  return x.tape()->record(std::move(out), {ix, ir},
                          [ix, ir](Tape& tape, const Matrix& g) {
                            tape.accumulate(ix, g);
                            if (tape.requires_grad(ir)) {
                              Matrix gr(1, g.cols());
                              for (std::size_t i = 0; i < g.rows(); ++i) {
                                for (std::size_t j = 0; j < g.cols(); ++j) gr(0, j) += g(i, j);
                              }
                              tape.accumulate(ir, gr);
                            }
                          },
                          "add_row");
}

Var relu(const Var& x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {ix},
                          [ix](Tape& tape, const Matrix& g) {
                            const Matrix& xv = tape.value(ix);
                            Matrix gx = g;
                            for (std::size_t i = 0; i < gx.size(); ++i) {
                              if (!(xv.values()[i] > 0.0)) gx.values()[i] = 0.0;
                            }
                            tape.accumulate(ix, gx);
                          },
                          "relu");
}

Var exp(const Var& x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = std::exp(v);
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {ix},
                          [ix](Tape& tape, const Matrix& g) {
                            const Matrix& xv = tape.value(ix);
                            Matrix gx = g;
                            for (std::size_t i = 0; i < gx.size(); ++i) {
                              gx.values()[i] *= std::exp(xv.values()[i]);
                            }
                            tape.accumulate(ix, gx);
                          },
                          "exp");
}

Var log(const Var& x) {
  Matrix out = x.value();
  for (double& v : out.values()) v = std::log(v);
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(out), {ix},
                          [ix](Tape& tape, const Matrix& g) {
                            const Matrix& xv = tape.value(ix);
                            Matrix gx = g;
                            for (std::size_t i = 0; i < gx.size(); ++i) gx.values()[i] /= xv.values()[i];
                            tape.accumulate(ix, gx);
                          },
                          "log");
}

Var mean_rows(const Var& x) {
  const Matrix& xv = x.value();
  if (xv.rows() == 0) throw ArgumentError("mean_rows: no rows");
  Matrix out(1, xv.cols());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < xv.cols(); ++j) out(0, j) += xv(i, j);
  }
  const double inv = 1.0 / static_cast<double>(xv.rows());
  for (double& v : out.values()) v *= inv;
  const std::size_t ix = x.id();
  const std::size_t rows = xv.rows();
  return x.tape()->record(std::move(out), {ix},
                          [ix, rows, inv](Tape& tape, const Matrix& g) {
                            Matrix gx(rows, g.cols());
                            for (std::size_t i = 0; i < rows; ++i) {
                              for (std::size_t j = 0; j < g.cols(); ++j) gx(i, j) = g(0, j) * inv;
                            }
                            tape.accumulate(ix, gx);
                          },
                          "mean_rows");
}

Var concat_cols(const Var& a, const Var& b) {
  require_same_tape(a, b, "concat_cols");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows()) throw ArgumentError("concat_cols: row counts differ");
  Matrix out(av.rows(), av.cols() + bv.cols());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    for (std::size_t j = 0; j < av.cols(); ++j) out(i, j) = av(i, j);
    for (std::size_t j = 0; j < bv.cols(); ++j) out(i, av.cols() + j) = bv(i, j);
  }
  const std::size_t ia = a.id(), ib = b.id();
  const std::size_t ca = av.cols(), cb = bv.cols();
  return a.tape()->record(std::move(out), {ia, ib},
                          [ia, ib, ca, cb](Tape& tape, const Matrix& g) {
                            Matrix ga(g.rows(), ca), gb(g.rows(), cb);
                            for (std::size_t i = 0; i < g.rows(); ++i) {
                              for (std::size_t j = 0; j < ca; ++j) ga(i, j) = g(i, j);
                              for (std::size_t j = 0; j < cb; ++j) gb(i, j) = g(i, ca + j);
                            }
                            tape.accumulate(ia, ga);
                            tape.accumulate(ib, gb);
                          },
                          "concat_cols");
}

Var sum(const Var& x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const std::size_t ix = x.id();
  const std::size_t rows = x.value().rows(), cols = x.value().cols();
  return x.tape()->record(Matrix::scalar(s), {ix},
                          [ix, rows, cols](Tape& tape, const Matrix& g) {
                            tape.accumulate(ix, Matrix(rows, cols, g(0, 0)));
                          },
                          "sum");
}

Var cosine(const Var& a, const Var& b) {
  require_same_tape(a, b, "cosine");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != 1 || bv.rows() != 1 || av.cols() != bv.cols()) {
    throw ArgumentError("cosine: expects two 1 x k vectors of equal length");
  }
  const double na = norm2(av.values());
  const double nb = norm2(bv.values());
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine: zero vector");
  const double c = dot(av.values(), bv.values()) / (na * nb);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(Matrix::scalar(c), {ia, ib},
                          [ia, ib, na, nb, c](Tape& tape, const Matrix& g) {
                            // d cos / d a = b/(|a||b|) - cos * a/|a|^2
                            const Matrix& x = tape.value(ia);
                            const Matrix& y = tape.value(ib);
                            const double go = g(0, 0);
                            Matrix gx(1, x.cols()), gy(1, y.cols());
                            for (std::size_t j = 0; j < x.cols(); ++j) {
                              gx(0, j) = go * (y(0, j) / (na * nb) - c * x(0, j) / (na * na));
                              gy(0, j) = go * (x(0, j) / (na * nb) - c * y(0, j) / (nb * nb));
                            }
                            tape.accumulate(ia, gx);
                            tape.accumulate(ib, gy);
                          },
                          "cosine");
}

Var softmax_cross_entropy(const Var& logits, std::size_t cls) {
  const Matrix& z = logits.value();
  if (z.rows() != 1 || cls >= z.cols()) throw ArgumentError("softmax_cross_entropy: bad logits or class");
  double zmax = z(0, 0);
  for (double v : z.values()) zmax = std::max(zmax, v);
  double denom = 0.0;
  for (double v : z.values()) denom += std::exp(v - zmax);
  const double lse = zmax + std::log(denom);
  const std::size_t iz = logits.id();
  return logits.tape()->record(Matrix::scalar(lse - z(0, cls)), {iz},
                               [iz, cls, lse](Tape& tape, const Matrix& g) {
                                 const Matrix& zv = tape.value(iz);
                                 Matrix gz(1, zv.cols());
                                 for (std::size_t j = 0; j < zv.cols(); ++j) {
                                   const double p = std::exp(zv(0, j) - lse);
                                   gz(0, j) = g(0, 0) * (p - (j == cls ? 1.0 : 0.0));
                                 }
                                 tape.accumulate(iz, gz);
                               },
                               "softmax_cross_entropy");
}

}  // namespace rumorlab::ad
