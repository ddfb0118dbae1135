#pragma once

#include <span>
#include <vector>

#include "comrl/tensor.hpp"

namespace comrl {

// Reverse-mode automatic differentiation over a fixed op vocabulary.
//
// A Tape is an arena of nodes; creation order is a topological order of the
// graph, so backward() is a single reverse sweep. Handles (Value) index into
// the arena and are invalidated by reset(). All values are f64 tensors.
//
// Gradients are exact: every op's backward is the analytic adjoint of its
// forward, and forward kernels are shared with the untaped evaluation paths
// so taped and untaped forwards agree bitwise.

struct Value {
  int id = -1;
  bool valid() const { return id >= 0; }
};

enum class Op : uint8_t {
  Leaf,        // input (parameter or constant)
  Affine,      // X·W + b, row-wise bias
  Relu,
  Tanh,
  Log,
  Exp,
  Add,         // elementwise, equal shapes
  Sub,
  Mul,
  Scale,       // y = c * x
  AddConst,    // y = x + c
  LogSoftmax,  // row-wise, subtract-max stable
  SqDistRows,  // rows a_i, b_i -> [n,1] of squared L2 distances
  SumAll,      // -> [1]
  MeanAll,     // -> [1]
  RowSum,      // [n,k] -> [n,1]
  ColMean,     // [n,k] -> [1,k]
  ConcatCols,  // variadic [n,k_i] -> [n, sum k_i]
  StackRows,   // variadic [n_i,k] -> [sum n_i, k]
  GatherRows,  // index list -> [m,k]; backward scatter-adds
  SliceCols,   // [n,k] -> [n, c1-c0]
  Reshape,     // same numel, new shape
};

class Tape {
 public:
  Tape() = default;

  // Copies the tensor into the arena. Parameters pass requires_grad = true.
  Value leaf(const Tensor& t, bool requires_grad);
  Value constant(Tensor t);
  Value constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  Value affine(Value x, Value w, Value b);
  Value relu(Value x);
  Value tanh(Value x);
  Value log(Value x);
  Value exp(Value x);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);
  Value scale(Value x, double c);
  Value add_const(Value x, double c);
  Value neg(Value x) { return scale(x, -1.0); }
  // y = 1/x for x > 0, composed as exp(-log x).
  Value reciprocal_pos(Value x) { return exp(neg(log(x))); }
  Value log_softmax(Value x);
  Value sqdist_rows(Value a, Value b);
  Value sum_all(Value x);
  Value mean_all(Value x);
  Value row_sum(Value x);
  Value col_mean(Value x);
  Value concat_cols(std::span<const Value> parts);
  Value stack_rows(std::span<const Value> parts);
  Value gather_rows(Value x, std::vector<int> idx);
  Value slice_cols(Value x, int c0, int c1);
  Value reshape(Value x, std::vector<int> shape);

  const Tensor& value(Value v) const { return nodes_[v.id].value; }
  double scalar_value(Value v) const;

  // Gradient of the last backward() root w.r.t. v. Valid only for nodes with
  // requires_grad that were reached by the sweep.
  const Tensor& grad(Value v) const;
  bool has_grad(Value v) const { return nodes_[v.id].grad_live; }

  // Reverse sweep from a scalar-shaped root. Seeds d(root)/d(root) = 1 and
  // accumulates exact adjoints into every reachable differentiable node.
  void backward(Value root);

  // Clears all nodes; outstanding Values become invalid.
  void reset();

  int size() const { return static_cast<int>(nodes_.size()); }

  // Number of differentiable leaves on the tape. Training phases that must
  // not touch some parameter set assert this count equals the leaves they
  // themselves created.
  int n_grad_leaves() const;

 private:
  struct Node {
    Op op;
    bool requires_grad = false;
    bool grad_live = false;
    Tensor value;
    Tensor grad;
    std::vector<int> parents;
    double c = 0.0;           // Scale / AddConst coefficient
    std::vector<int> aux;     // gather indices, slice bounds, reshape shape
  };

  Value push(Node n);
  Node& node(Value v) { return nodes_[v.id]; }
  const Node& node(Value v) const { return nodes_[v.id]; }
  Tensor& ensure_grad(int id);
  void backward_node(int id);

  std::vector<Node> nodes_;
};

// Shared forward kernels (used by both the tape and untaped evaluation).
void affine_kernel(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);
void relu_kernel(const Tensor& x, Tensor& out);
void tanh_kernel(const Tensor& x, Tensor& out);
void log_softmax_kernel(const Tensor& x, Tensor& out);
void softmax_kernel(const Tensor& x, Tensor& out);
// Column means via exact (error-free) summation: the result is independent
// of row order, and the mean of identical rows reproduces the row exactly.
void col_mean_kernel(const Tensor& x, Tensor& out);

// The scalar reduction behind col_mean_kernel: mean of n strided values via
// exact expansion summation. Order-independent; exact for identical inputs.
double exact_mean_strided(const double* vals, int n, int stride);

}  // namespace comrl
