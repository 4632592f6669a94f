#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradeslab/tensor.hpp"

namespace tradeslab {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Reverse-mode tape. Nodes are created in topological order; backward walks
// them in reverse exactly once. Single-writer per graph.
//
// Primitive set is closed: matmul, bias add, relu, log-softmax, exp, log,
// elementwise add/sub/mul, scale-by-constant, sum/mean, l1/l2 norms.
class Graph {
 public:
  enum class Op {
    Leaf,
    MatMul,
    Add,
    Sub,
    Mul,
    AddBias,
    Relu,
    Exp,
    Log,
    LogSoftmax,
    Sum,
    Mean,
    Scale,
    L1Norm,
    L2Norm,
  };

  int leaf(Tensor value, bool requires_grad = false);

  int matmul(int a, int b);        // [m x k] . [k x n] -> [m x n]
  int add(int a, int b);           // same shape
  int sub(int a, int b);
  int mul(int a, int b);
  int add_bias(int a, int bias);   // [m x n] + [n]
  int relu(int a);
  int exp_(int a);
  int log_(int a);
  int log_softmax(int a);          // rows of [m x n]
  int sum(int a);                  // -> scalar [1]
  int mean(int a);
  int scale(int a, double c);
  int l1_norm_(int a);             // -> scalar [1]
  int l2_norm_(int a);

  const Tensor& value(int id) const { return nodes_[check(id)].value; }
  double scalar_value(int id) const;

  // Leaf gradients accumulate across backward calls; internal node gradients
  // are zeroed at the start of each backward so the same graph can be
  // differentiated from several scalar roots.
  void backward(int root);

  // Zero every gradient buffer, including leaves.
  void zero_grad();

  bool has_grad(int id) const;
  std::span<const double> grad(int id) const;

  std::size_t num_nodes() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::array<int, 2> in{-1, -1};
    Tensor value;
    std::vector<double> grad;  // empty unless needs_grad
    bool needs_grad = false;
    double scalar = 0.0;  // payload for Scale
  };

  int push(Node n);
  int check(int id) const;
  int unary(Op op, int a, const char* name);
  int binary_same_shape(Op op, int a, int b, const char* name);
  void backprop_node(int id);

  std::vector<Node> nodes_;
};

}  // namespace tradeslab
