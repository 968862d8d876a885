#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "descfm/errors.hpp"

namespace descfm {

// Dense row-major matrix. Everything in this library is rank 2; vectors are
// 1 x n or n x 1 and scalars are 1 x 1.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor scalar(double v) { return Tensor(1, 1, v); }
  static Tensor row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor(1, n, std::move(v));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::vector<std::size_t> shape() const { return {rows_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  bool all_finite() const;
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_string() const;

  bool operator==(const Tensor&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A trainable tensor with its accumulated gradient.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()) {}
  void zero_grad() { grad = Tensor(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a Tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& value() const;
  const Tensor& grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

// Records primitives as they execute. backward() walks the nodes in reverse
// creation order, which is a valid reverse topological order because every
// node is created after its inputs.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Copies the value; gradient is tracked when requires_grad is set.
  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }
  // Borrows the parameter. backward() accumulates into p.grad directly.
  Var param(Parameter& p);
  // Borrows a tensor as a constant; it must outlive the tape.
  Var borrow(const Tensor& value);

  void backward(Var loss);

  const Tensor& value(int id) const;
  const Tensor& grad(int id) const;
  std::size_t num_nodes() const { return nodes_.size(); }

  // Used by primitive implementations.
  using Backward = std::function<void(Tape&, int self)>;
  Var push(Tensor value, std::vector<int> inputs, Backward backward);
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  Tensor& grad_mut(int id);

 private:
  struct Node {
    Tensor value;
    const Tensor* borrowed = nullptr;
    Tensor grad;
    Tensor* external_grad = nullptr;
    bool requires_grad = false;
    std::vector<int> inputs;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Primitives. Shape violations throw ShapeError.
Var matmul(Var a, Var b);
Var add(Var a, Var b);  // b may be 1 x cols, broadcast over rows
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise, same shape
Var scale(Var a, double s);
Var relu(Var a);
Var sum(Var a);
Var mean(Var a);
Var concat(Var a, Var b);  // along columns
Var gather_rows(Var a, std::span<const int> index);
// out[index[i]] += a[i]; out has out_rows rows.
Var scatter_add_rows(Var a, std::span<const int> index, std::size_t out_rows);
// Multiplies row r by factors[r] (a constant).
Var row_scale(Var a, std::span<const double> factors);
// Mean of (pred - target)^2 over cells with mask != 0; zero when nothing is kept.
Var mse_masked(Var pred, const Tensor& target, const Tensor& mask);
// Mean logistic loss over cells with mask != 0 (mask may be empty = all kept).
Var bce_with_logits(Var logits, const Tensor& target, const Tensor& mask = {});

Var linear(Var x, Var w, Var b);  // x W + b

double sigmoid(double x);

// Max over components of |g_ad - g_fd| / (|g_ad| + |g_fd| + 1e-8) using central
// differences. Throws ShapeError if f does not return a 1 x 1 value.
using ScalarFn = std::function<Var(Tape&, Var)>;
double grad_check(const ScalarFn& f, const Tensor& x, double eps = 1e-6);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Round parameters to float32 after each step so that saved checkpoints are
  // an exact image of the in-memory model.
  bool float32_params = true;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;
};

// One Adam update of every parameter from its grad. Throws NumericError naming
// the parameter when a gradient is not finite; nothing is modified then.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, const AdamConfig& cfg = {});

// Round every element to the nearest float32.
void round_to_float32(Tensor& t);

}  // namespace descfm
