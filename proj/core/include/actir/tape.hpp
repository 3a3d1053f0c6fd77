#pragma once

#include <functional>
#include <vector>

#include "actir/tensor.hpp"

namespace actir {

enum class OpKind {
  Leaf,
  Constant,
  MatMul,
  Add,
  Sub,
  Mul,
  AddRowBias,
  Relu,
  Scale,
  SoftmaxXentMean,
  SoftmaxResidual,
  GroupCenter,
  MeanRows,
  L1Norm,
  SumSquares,
  Dot,
  RowScale,
  MaskConst,
};

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Define-by-run reverse-mode tape over Tensors. Values are computed eagerly
/// as ops are recorded; backward() replays the recording in reverse and
/// accumulates gradients into every node. A tape is built fresh for each
/// forward pass and is confined to a single thread.
///
/// There is no second-order support. Quantities that need to be
/// differentiated-through (like the per-domain inner gradient) are built
/// explicitly from first-order ops such as softmax_residual and group_center.
class Tape {
 public:
  /// Adds an input node whose gradient will be requested after backward().
  Var leaf(Tensor value);
  /// Same storage as a leaf; the name records that no caller reads its
  /// gradient (also used to cut gradient flow: a constant copy of a node's
  /// value detaches it from its history).
  Var constant(Tensor value);

  const Tensor& value(Var v) const { return nodes_[check(v)].value; }
  const Tensor& grad(Var v) const { return nodes_[check(v)].grad; }

  std::size_t size() const { return nodes_.size(); }
  OpKind kind(std::size_t node) const { return nodes_[node].kind; }
  const std::vector<int>& inputs(std::size_t node) const { return nodes_[node].in; }

  /// C = op(A) * op(B) where op transposes when the flag is set.
  Var matmul(Var a, Var b, bool trans_a = false, bool trans_b = false);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// Y[i,j] = X[i,j] + bias[j].
  Var add_row_bias(Var x, Var bias);
  /// max(x, 0); derivative at exactly 0 is 0.
  Var relu(Var x);
  Var scale(Var x, double c);
  /// Mean over rows of -log softmax(logits[i])[labels[i]], max-subtracted.
  Var softmax_xent_mean(Var logits, std::vector<int> labels);
  /// softmax(logits[i]) - onehot(labels[i]), differentiable in logits.
  Var softmax_residual(Var logits, std::vector<int> labels);
  /// Subtracts from each row the mean of rows sharing its group id.
  Var group_center(Var x, std::vector<int> groups);
  /// [n,k] -> [k], mean over rows.
  Var mean_rows(Var x);
  /// Sum of absolute entries; subgradient uses sign(0) = 0.
  Var l1_norm(Var x);
  Var sum_squares(Var x);
  /// Full contraction sum_ij A[i,j]*B[i,j] -> scalar.
  Var dot(Var a, Var b);
  /// Y[r,j] = s[r] * X[r,j] for a constant vector s (no gradient into s).
  Var row_scale(Var x, Tensor s);
  /// Elementwise product with a constant 0/1 mask.
  Var mask(Var x, Tensor mask01);

  /// Reverse sweep from a scalar output. Clears old gradients first.
  void backward(Var output);

 private:
  struct Node {
    OpKind kind;
    std::vector<int> in;
    Tensor value;
    Tensor grad;
    bool touched = false;
    std::function<void(Tape&, int)> back;
  };

  int check(Var v) const;
  Var push(OpKind kind, std::vector<int> in, Tensor value, std::function<void(Tape&, int)> back);
  Tensor& grad_acc(int id);

  std::vector<Node> nodes_;
};

/// Max over all parameter entries of
/// |analytic - central difference| / (|analytic| + |central difference| + 1e-12)
/// where the analytic gradient comes from one backward() pass and the central
/// difference perturbs each entry by +-step with a fresh tape per evaluation.
double grad_check(const std::function<Var(Tape&, const std::vector<Var>&)>& loss_fn,
                  const std::vector<Tensor>& params, double step);

}  // namespace actir
