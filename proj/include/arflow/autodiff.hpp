#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace arflow::ad {

using Matrix = Eigen::MatrixXd;

/// Handle to a node of a Graph.
struct Var {
  int id = -1;
};

/// Reverse-mode differentiation over dense matrices. Nodes are recorded in
/// evaluation order; backward() walks them in reverse. Scalars are 1x1.
class Graph {
 public:
  /// Leaf that never receives a gradient.
  Var constant(Matrix value);
  /// Leaf whose gradient is accumulated and readable after backward().
  Var leaf(Matrix value);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  double scalar(Var v) const { return nodes_[v.id].value(0, 0); }

  /// Gradient of the last backward() root with respect to v. Zero-sized
  /// matrix if v never received a gradient.
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  void backward(Var root);

  Var matmul(Var a, Var b);
  /// a * b^T
  Var matmul_nt(Var a, Var b);
  Var add(Var a, Var b);
  /// Adds the 1 x n row `row` to every row of a.
  Var add_row(Var a, Var row);
  Var scale(Var a, double s);
  /// Tanh-approximated GELU.
  Var gelu(Var a);
  /// Per-row normalization with 1 x n gain and bias.
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
  /// Row softmax. With causal set, row i only sees columns 0..i.
  Var softmax_rows(Var a, bool causal);
  Var cols(Var a, int start, int count);
  Var rows(Var a, int start, int count);
  Var hconcat(const std::vector<Var>& parts);
  Var vconcat(Var top, Var bottom);
  /// 1 x n mean over rows.
  Var mean_rows(Var a);
  /// weight * mean((a - target)^2) as a 1x1 node.
  Var mse(Var a, const Matrix& target, double weight = 1.0);
  /// 1x1 node carrying an externally computed loss whose gradient with
  /// respect to a is `grad_wrt_a`.
  Var external_loss(Var a, double loss, Matrix grad_wrt_a);
  Var sum(const std::vector<Var>& scalars);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void(Graph&, const Matrix&)> backward;
  };

  Var push(Matrix value, bool needs_grad, std::function<void(Graph&, const Matrix&)> backward);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  void accumulate(Var v, const Matrix& g);

  std::vector<Node> nodes_;
};

}  // namespace arflow::ad
