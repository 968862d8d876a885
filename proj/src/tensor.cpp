#include "descfm/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace descfm {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC view(const Tensor& t) { return MapC(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())); }
Map view(Tensor& t) { return Map(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols())); }

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " + b.shape_string());
}

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("vars belong to different tapes");
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) throw ShapeError("tensor data length does not match shape");
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_string() const { return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")"; }

const Tensor& Var::value() const { return tape->value(id); }
const Tensor& Var::grad() const { return tape->grad(id); }

Var Tape::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::param(Parameter& p) {
  if (!p.grad.same_shape(p.value)) p.zero_grad();
  Node n;
  n.borrowed = &p.value;
  n.external_grad = &p.grad;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::borrow(const Tensor& value) {
  Node n;
  n.borrowed = &value;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Tensor value, std::vector<int> inputs, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = false;
  for (int i : inputs) n.requires_grad = n.requires_grad || requires_grad(i);
  if (n.requires_grad) {
    n.inputs = std::move(inputs);
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Tensor& Tape::value(int id) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(id));
  return n.borrowed ? *n.borrowed : n.value;
}

const Tensor& Tape::grad(int id) const {
  const Node& n = nodes_.at(static_cast<std::size_t>(id));
  return n.external_grad ? *n.external_grad : n.grad;
}

Tensor& Tape::grad_mut(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  Tensor& g = n.external_grad ? *n.external_grad : n.grad;
  const Tensor& v = n.borrowed ? *n.borrowed : n.value;
  if (!g.same_shape(v)) g = Tensor(v.rows(), v.cols());
  return g;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: var from another tape");
  const Tensor& v = value(loss.id);
  if (v.rows() != 1 || v.cols() != 1) throw ShapeError("backward: loss must be 1x1, got " + v.shape_string());
  if (!requires_grad(loss.id)) return;
  grad_mut(loss.id)[0] += 1.0;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.backward) continue;
    const Tensor& g = n.external_grad ? *n.external_grad : n.grad;
    if (g.size() == 0) continue;  // not reached from the loss
    n.backward(*this, id);
  }
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.cols() != B.rows()) shape_fail("matmul", A, B);
  Tensor out(A.rows(), B.cols());
  view(out).noalias() = view(A) * view(B);
  return a.tape->push(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(a)) view(t.grad_mut(a)).noalias() += view(G) * view(t.value(b)).transpose();
    if (t.requires_grad(b)) view(t.grad_mut(b)).noalias() += view(t.value(a)).transpose() * view(G);
  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const bool broadcast = B.rows() == 1 && A.rows() != 1 && B.cols() == A.cols();
  if (!A.same_shape(B) && !broadcast) shape_fail("add", A, B);
  Tensor out = A;
  if (broadcast)
    view(out).rowwise() += view(B).row(0);
  else
    view(out) += view(B);
  return a.tape->push(std::move(out), {a.id, b.id}, [a = a.id, b = b.id, broadcast](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(a)) view(t.grad_mut(a)) += view(G);
    if (t.requires_grad(b)) {
      if (broadcast)
        view(t.grad_mut(b)).row(0) += view(G).colwise().sum();
      else
        view(t.grad_mut(b)) += view(G);
    }
  });
}

Var sub(Var a, Var b) { return add(a, scale(b, -1.0)); }

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (!A.same_shape(B)) shape_fail("mul", A, B);
  Tensor out(A.rows(), A.cols());
  view(out) = view(A).cwiseProduct(view(B));
  return a.tape->push(std::move(out), {a.id, b.id}, [a = a.id, b = b.id](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(a)) view(t.grad_mut(a)) += view(G).cwiseProduct(view(t.value(b)));
    if (t.requires_grad(b)) view(t.grad_mut(b)) += view(G).cwiseProduct(view(t.value(a)));
  });
}

Var scale(Var a, double s) {
  Tensor out = a.value();
  view(out) *= s;
  return a.tape->push(std::move(out), {a.id}, [a = a.id, s](Tape& t, int self) {
    view(t.grad_mut(a)) += s * view(t.grad(self));
  });
}

Var relu(Var a) {
  Tensor out = a.value();
  for (double& x : out.values()) x = x > 0.0 ? x : 0.0;
  return a.tape->push(std::move(out), {a.id}, [a = a.id](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    const Tensor& X = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < G.size(); ++i)
      if (X[i] > 0.0) ga[i] += G[i];
  });
}

Var sum(Var a) {
  const Tensor& A = a.value();
  double s = 0.0;
  for (double x : A.values()) s += x;
  return a.tape->push(Tensor::scalar(s), {a.id}, [a = a.id](Tape& t, int self) {
    const double g = t.grad(self)[0];
    for (double& x : t.grad_mut(a).values()) x += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var concat(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (A.rows() != B.rows()) shape_fail("concat", A, B);
  Tensor out(A.rows(), A.cols() + B.cols());
  view(out).leftCols(static_cast<Eigen::Index>(A.cols())) = view(A);
  view(out).rightCols(static_cast<Eigen::Index>(B.cols())) = view(B);
  const auto ac = static_cast<Eigen::Index>(A.cols());
  const auto bc = static_cast<Eigen::Index>(B.cols());
  return a.tape->push(std::move(out), {a.id, b.id}, [a = a.id, b = b.id, ac, bc](Tape& t, int self) {
    const Tensor& G = t.grad(self);
    if (t.requires_grad(a)) view(t.grad_mut(a)) += view(G).leftCols(ac);
    if (t.requires_grad(b)) view(t.grad_mut(b)) += view(G).rightCols(bc);
  });
}

Var gather_rows(Var a, std::span<const int> index) {
  const Tensor& A = a.value();
  const std::size_t c = A.cols();
  Tensor out(index.size(), c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= A.rows())
      throw ShapeError("gather_rows: index " + std::to_string(index[i]) + " out of range for " + A.shape_string());
    std::copy_n(A.data() + static_cast<std::size_t>(index[i]) * c, c, out.data() + i * c);
  }
  return a.tape->push(std::move(out), {a.id},
                      [a = a.id, idx = std::vector<int>(index.begin(), index.end()), c](Tape& t, int self) {
                        const Tensor& G = t.grad(self);
                        Tensor& ga = t.grad_mut(a);
                        for (std::size_t i = 0; i < idx.size(); ++i) {
                          double* dst = ga.data() + static_cast<std::size_t>(idx[i]) * c;
                          const double* src = G.data() + i * c;
                          for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
                        }
                      });
}

Var scatter_add_rows(Var a, std::span<const int> index, std::size_t out_rows) {
  const Tensor& A = a.value();
  if (index.size() != A.rows())
    throw ShapeError("scatter_add_rows: " + std::to_string(index.size()) + " indices for " + A.shape_string());
  const std::size_t c = A.cols();
  Tensor out(out_rows, c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0 || static_cast<std::size_t>(index[i]) >= out_rows)
      throw ShapeError("scatter_add_rows: index " + std::to_string(index[i]) + " out of range");
    double* dst = out.data() + static_cast<std::size_t>(index[i]) * c;
    const double* src = A.data() + i * c;
    for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
  }
  return a.tape->push(std::move(out), {a.id},
                      [a = a.id, idx = std::vector<int>(index.begin(), index.end()), c](Tape& t, int self) {
                        const Tensor& G = t.grad(self);
                        Tensor& ga = t.grad_mut(a);
                        for (std::size_t i = 0; i < idx.size(); ++i) {
                          const double* src = G.data() + static_cast<std::size_t>(idx[i]) * c;
                          double* dst = ga.data() + i * c;
                          for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
                        }
                      });
}

Var row_scale(Var a, std::span<const double> factors) {
  const Tensor& A = a.value();
  if (factors.size() != A.rows()) throw ShapeError("row_scale: factor count does not match " + A.shape_string());
  Tensor out = A;
  for (std::size_t r = 0; r < A.rows(); ++r) view(out).row(static_cast<Eigen::Index>(r)) *= factors[r];
  return a.tape->push(std::move(out), {a.id},
                      [a = a.id, f = std::vector<double>(factors.begin(), factors.end())](Tape& t, int self) {
                        const Tensor& G = t.grad(self);
                        Tensor& ga = t.grad_mut(a);
                        for (std::size_t r = 0; r < f.size(); ++r)
                          view(ga).row(static_cast<Eigen::Index>(r)) += f[r] * view(G).row(static_cast<Eigen::Index>(r));
                      });
}

Var mse_masked(Var pred, const Tensor& target, const Tensor& mask) {
  const Tensor& P = pred.value();
  if (!P.same_shape(target)) shape_fail("mse_masked", P, target);
  if (!P.same_shape(mask)) shape_fail("mse_masked", P, mask);
  double kept = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (mask[i] == 0.0) continue;
    kept += 1.0;
    const double d = P[i] - target[i];
    acc += d * d;
  }
  const double loss = kept > 0.0 ? acc / kept : 0.0;
  return pred.tape->push(Tensor::scalar(loss), {pred.id}, [p = pred.id, target, mask, kept](Tape& t, int self) {
    if (kept == 0.0) return;
    const double g = t.grad(self)[0] * 2.0 / kept;
    const Tensor& P = t.value(p);
    Tensor& gp = t.grad_mut(p);
    for (std::size_t i = 0; i < P.size(); ++i)
      if (mask[i] != 0.0) gp[i] += g * (P[i] - target[i]);
  });
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Var bce_with_logits(Var logits, const Tensor& target, const Tensor& mask) {
  const Tensor& X = logits.value();
  if (!X.same_shape(target)) shape_fail("bce_with_logits", X, target);
  const bool masked = mask.size() != 0;
  if (masked && !X.same_shape(mask)) shape_fail("bce_with_logits", X, mask);
  double kept = 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    if (masked && mask[i] == 0.0) continue;
    kept += 1.0;
    const double x = X[i];
    acc += std::max(x, 0.0) - x * target[i] + std::log1p(std::exp(-std::abs(x)));
  }
  const double loss = kept > 0.0 ? acc / kept : 0.0;
  return logits.tape->push(Tensor::scalar(loss), {logits.id}, [p = logits.id, target, mask, masked, kept](Tape& t, int self) {
    if (kept == 0.0) return;
    const double g = t.grad(self)[0] / kept;
    const Tensor& X = t.value(p);
    Tensor& gp = t.grad_mut(p);
    for (std::size_t i = 0; i < X.size(); ++i)
      if (!masked || mask[i] != 0.0) gp[i] += g * (sigmoid(X[i]) - target[i]);
  });
}

Var linear(Var x, Var w, Var b) { return add(matmul(x, w), b); }

double grad_check(const ScalarFn& f, const Tensor& x, double eps) {
  Tensor analytic;
  {
    Tape tape;
    Var in = tape.leaf(x, true);
    Var out = f(tape, in);
    if (out.value().size() != 1) throw ShapeError("grad_check: function output is " + out.value().shape_string());
    tape.backward(out);
    analytic = in.grad();
    if (analytic.size() == 0) analytic = Tensor(x.rows(), x.cols());
  }
  auto eval = [&](const Tensor& at) {
    Tape tape;
    return f(tape, tape.leaf(at, false)).value()[0];
  };
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double hi = eval(probe);
    probe[i] = x[i] - eps;
    const double lo = eval(probe);
    probe[i] = x[i];
    const double fd = (hi - lo) / (2.0 * eps);
    const double err = std::abs(analytic[i] - fd) / (std::abs(analytic[i]) + std::abs(fd) + 1e-8);
    worst = std::max(worst, err);
  }
  return worst;
}

void round_to_float32(Tensor& t) {
  for (double& x : t.values()) x = static_cast<double>(static_cast<float>(x));
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, const AdamConfig& cfg) {
  for (const Parameter* p : params) {
    if (!p->grad.same_shape(p->value)) throw ShapeError("adam_step: gradient shape mismatch for " + p->name);
    for (std::size_t i = 0; i < p->grad.size(); ++i) {
      if (!std::isfinite(p->grad[i])) {
        std::ostringstream msg;
        msg << "non-finite gradient in parameter '" << p->name << "' at element " << i << " (value " << p->grad[i]
            << ", step " << state.step + 1 << ")";
        throw NumericError(msg.str());
      }
    }
  }
  if (state.m.empty()) {
    for (const Parameter* p : params) {
      state.m.emplace_back(p->value.rows(), p->value.cols());
      state.v.emplace_back(p->value.rows(), p->value.cols());
    }
  }
  if (state.m.size() != params.size()) throw ShapeError("adam_step: state does not match parameter list");
  ++state.step;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      p.value[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.eps);
    }
    if (cfg.float32_params) round_to_float32(p.value);
  }
}

}  // namespace descfm
