#include "arflow/autodiff.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <utility>

namespace arflow::ad {

Var Graph::push(Matrix value, bool needs_grad, std::function<void(Graph&, const Matrix&)> backward) {
  nodes_.push_back({std::move(value), Matrix(), needs_grad, needs_grad ? std::move(backward) : nullptr});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Graph::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Graph::leaf(Matrix value) { return push(std::move(value), true, nullptr); }

void Graph::backward(Var root) {
  for (Node& n : nodes_) n.grad.resize(0, 0);
  Node& r = nodes_[root.id];
  r.grad = Matrix::Ones(r.value.rows(), r.value.cols());
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.backward && n.grad.size() != 0) {
      const Matrix g = n.grad;
      n.backward(*this, g);
    }
  }
}

Var Graph::matmul(Var a, Var b) {
  Matrix v = value(a) * value(b);
  return push(std::move(v), needs(a) || needs(b), [a, b](Graph& g, const Matrix& dy) {
    if (g.needs(a)) g.accumulate(a, dy * g.value(b).transpose());
    if (g.needs(b)) g.accumulate(b, g.value(a).transpose() * dy);
  });
}

Var Graph::matmul_nt(Var a, Var b) {
  Matrix v = value(a) * value(b).transpose();
  return push(std::move(v), needs(a) || needs(b), [a, b](Graph& g, const Matrix& dy) {
    if (g.needs(a)) g.accumulate(a, dy * g.value(b));
    if (g.needs(b)) g.accumulate(b, dy.transpose() * g.value(a));
  });
}

Var Graph::add(Var a, Var b) {
  assert(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols());
  Matrix v = value(a) + value(b);
  return push(std::move(v), needs(a) || needs(b), [a, b](Graph& g, const Matrix& dy) {
    g.accumulate(a, dy);
    g.accumulate(b, dy);
  });
}

Var Graph::add_row(Var a, Var row) {
  assert(value(row).rows() == 1 && value(row).cols() == value(a).cols());
  Matrix v = value(a).rowwise() + value(row).row(0);
  return push(std::move(v), needs(a) || needs(row), [a, row](Graph& g, const Matrix& dy) {
    g.accumulate(a, dy);
    if (g.needs(row)) g.accumulate(row, dy.colwise().sum());
  });
}

Var Graph::scale(Var a, double s) {
  Matrix v = s * value(a);
  return push(std::move(v), needs(a), [a, s](Graph& g, const Matrix& dy) { g.accumulate(a, s * dy); });
}

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;
}  // namespace

Var Graph::gelu(Var a) {
  const Matrix& x = value(a);
  Matrix v = x.unaryExpr([](double z) { return 0.5 * z * (1.0 + std::tanh(kGeluC * (z + kGeluA * z * z * z))); });
  return push(std::move(v), needs(a), [a](Graph& g, const Matrix& dy) {
    const Matrix d = g.value(a).unaryExpr([](double z) {
      const double th = std::tanh(kGeluC * (z + kGeluA * z * z * z));
      return 0.5 * (1.0 + th) + 0.5 * z * (1.0 - th * th) * kGeluC * (1.0 + 3.0 * kGeluA * z * z);
    });
    g.accumulate(a, dy.cwiseProduct(d));
  });
}

Var Graph::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Matrix& in = value(x);
  const Eigen::Index n = in.cols();
  Matrix xhat(in.rows(), n);
  Eigen::VectorXd inv_std(in.rows());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const double var = (in.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (in.row(r).array() - mean) * inv_std(r);
  }
  Matrix v = (xhat.array().rowwise() * value(gain).row(0).array()).matrix();
  v.rowwise() += value(bias).row(0);
  return push(std::move(v), needs(x) || needs(gain) || needs(bias),
              [x, gain, bias, xhat, inv_std, n](Graph& g, const Matrix& dy) {
                if (g.needs(gain)) g.accumulate(gain, dy.cwiseProduct(xhat).colwise().sum());
                if (g.needs(bias)) g.accumulate(bias, dy.colwise().sum());
                if (!g.needs(x)) return;
                const Matrix dxhat = (dy.array().rowwise() * g.value(gain).row(0).array()).matrix();
                Matrix dx(dy.rows(), n);
                const double nd = static_cast<double>(n);
                for (Eigen::Index r = 0; r < dy.rows(); ++r) {
                  const double s1 = dxhat.row(r).sum();
                  const double s2 = dxhat.row(r).dot(xhat.row(r));
                  dx.row(r) = (inv_std(r) / nd) * (nd * dxhat.row(r).array() - s1 - xhat.row(r).array() * s2).matrix();
                }
                g.accumulate(x, dx);
              });
}

Var Graph::softmax_rows(Var a, bool causal) {
  const Matrix& in = value(a);
  Matrix p = Matrix::Zero(in.rows(), in.cols());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const Eigen::Index visible = causal ? std::min<Eigen::Index>(r + 1, in.cols()) : in.cols();
    const double m = in.row(r).head(visible).maxCoeff();
    double total = 0.0;
    for (Eigen::Index c = 0; c < visible; ++c) {
      p(r, c) = std::exp(in(r, c) - m);
      total += p(r, c);
    }
    p.row(r).head(visible) /= total;
  }
  Matrix v = p;
  return push(std::move(v), needs(a), [a, p](Graph& g, const Matrix& dy) {
    Matrix dx = p.cwiseProduct(dy);
    const Eigen::VectorXd row_dot = dx.rowwise().sum();
    dx -= (p.array().colwise() * row_dot.array()).matrix();
    g.accumulate(a, dx);
  });
}

Var Graph::cols(Var a, int start, int count) {
  Matrix v = value(a).middleCols(start, count);
  return push(std::move(v), needs(a), [a, start, count](Graph& g, const Matrix& dy) {
    Matrix full = Matrix::Zero(g.value(a).rows(), g.value(a).cols());
    full.middleCols(start, count) = dy;
    g.accumulate(a, full);
  });
}

Var Graph::rows(Var a, int start, int count) {
  Matrix v = value(a).middleRows(start, count);
  return push(std::move(v), needs(a), [a, start, count](Graph& g, const Matrix& dy) {
    Matrix full = Matrix::Zero(g.value(a).rows(), g.value(a).cols());
    full.middleRows(start, count) = dy;
    g.accumulate(a, full);
  });
}

Var Graph::hconcat(const std::vector<Var>& parts) {
  Eigen::Index total = 0;
  bool any = false;
  for (Var p : parts) {
    total += value(p).cols();
    any = any || needs(p);
  }
  Matrix v(value(parts.front()).rows(), total);
  Eigen::Index at = 0;
  for (Var p : parts) {
    v.middleCols(at, value(p).cols()) = value(p);
    at += value(p).cols();
  }
  return push(std::move(v), any, [parts](Graph& g, const Matrix& dy) {
    Eigen::Index off = 0;
    for (Var p : parts) {
      const Eigen::Index c = g.value(p).cols();
      if (g.needs(p)) g.accumulate(p, dy.middleCols(off, c));
      off += c;
    }
  });
}

Var Graph::vconcat(Var top, Var bottom) {
  const Eigen::Index rt = value(top).rows();
  Matrix v(rt + value(bottom).rows(), value(top).cols());
  v.topRows(rt) = value(top);
  v.bottomRows(value(bottom).rows()) = value(bottom);
  return push(std::move(v), needs(top) || needs(bottom), [top, bottom, rt](Graph& g, const Matrix& dy) {
    if (g.needs(top)) g.accumulate(top, dy.topRows(rt));
    if (g.needs(bottom)) g.accumulate(bottom, dy.bottomRows(dy.rows() - rt));
  });
}

Var Graph::mean_rows(Var a) {
  Matrix v = value(a).colwise().mean();
  return push(std::move(v), needs(a), [a](Graph& g, const Matrix& dy) {
    const Eigen::Index r = g.value(a).rows();
    g.accumulate(a, dy.replicate(r, 1) / static_cast<double>(r));
  });
}

Var Graph::mse(Var a, const Matrix& target, double weight) {
  const Matrix diff = value(a) - target;
  const double count = static_cast<double>(diff.size());
  Matrix v(1, 1);
  v(0, 0) = weight * diff.squaredNorm() / count;
  return push(std::move(v), needs(a), [a, diff, weight, count](Graph& g, const Matrix& dy) {
    g.accumulate(a, (2.0 * weight * dy(0, 0) / count) * diff);
  });
}

Var Graph::external_loss(Var a, double loss, Matrix grad_wrt_a) {
  Matrix v(1, 1);
  v(0, 0) = loss;
  return push(std::move(v), needs(a), [a, grad = std::move(grad_wrt_a)](Graph& g, const Matrix& dy) {
    g.accumulate(a, dy(0, 0) * grad);
  });
}

Var Graph::sum(const std::vector<Var>& scalars) {
  Matrix v = Matrix::Zero(1, 1);
  bool any = false;
  for (Var s : scalars) {
    v(0, 0) += scalar(s);
    any = any || needs(s);
  }
  return push(std::move(v), any, [scalars](Graph& g, const Matrix& dy) {
    for (Var s : scalars) g.accumulate(s, dy);
  });
}

}  // namespace arflow::ad
