#pragma once

#include <cmath>
#include <vector>

namespace arflow::ad {

class ScalarTape;

/// Reverse-mode scalar. A Real with id < 0 is a constant and records nothing.
struct Real {
  double v = 0.0;
  int id = -1;
  ScalarTape* tape = nullptr;

  Real() = default;
  Real(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Real(double value, int node, ScalarTape* owner) : v(value), id(node), tape(owner) {}
};

/// Wengert list with at most two parents per node. Nodes are appended in
/// evaluation order, so a single reverse sweep computes all adjoints.
class ScalarTape {
 public:
  Real variable(double value) { return push(value, -1, 0.0, -1, 0.0); }

  Real push(double value, int a, double da, int b, double db) {
    nodes_.push_back({a, da, b, db});
    return Real(value, static_cast<int>(nodes_.size()) - 1, this);
  }

  /// Adjoints of every node with respect to `output`.
  std::vector<double> gradient(const Real& output) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (output.id < 0) return adj;
    adj[output.id] = 1.0;
    for (int i = output.id; i >= 0; --i) {
      const double g = adj[i];
      if (g == 0.0) continue;
      const Node& n = nodes_[i];
      if (n.a >= 0) adj[n.a] += g * n.da;
      if (n.b >= 0) adj[n.b] += g * n.db;
    }
    return adj;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    int a;
    double da;
    int b;
    double db;
  };
  std::vector<Node> nodes_;
};

namespace detail {
inline ScalarTape* owner(const Real& a, const Real& b) { return a.tape ? a.tape : b.tape; }

inline Real binary(const Real& a, const Real& b, double value, double da, double db) {
  ScalarTape* t = owner(a, b);
  if (t == nullptr) return Real(value);
  return t->push(value, a.id, da, b.id, db);
}
}  // namespace detail

inline Real operator+(const Real& a, const Real& b) { return detail::binary(a, b, a.v + b.v, 1.0, 1.0); }
inline Real operator-(const Real& a, const Real& b) { return detail::binary(a, b, a.v - b.v, 1.0, -1.0); }
inline Real operator*(const Real& a, const Real& b) { return detail::binary(a, b, a.v * b.v, b.v, a.v); }
inline Real operator/(const Real& a, const Real& b) {
  return detail::binary(a, b, a.v / b.v, 1.0 / b.v, -a.v / (b.v * b.v));
}
inline Real operator-(const Real& a) { return detail::binary(a, Real(), -a.v, -1.0, 0.0); }
inline Real& operator+=(Real& a, const Real& b) { return a = a + b; }
inline Real& operator-=(Real& a, const Real& b) { return a = a - b; }

inline Real sqrt(const Real& a) {
  const double s = std::sqrt(a.v);
  return detail::binary(a, Real(), s, 0.5 / s, 0.0);
}

inline double value_of(const Real& a) { return a.v; }

}  // namespace arflow::ad

namespace arflow {
inline double value_of(double a) { return a; }
}  // namespace arflow
