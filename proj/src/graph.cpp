#include "tradeslab/graph.hpp"

#include <algorithm>
#include <cmath>

namespace tradeslab {

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  Node& nn = nodes_.back();
  if (nn.needs_grad) nn.grad.assign(nn.value.size(), 0.0);
  return static_cast<int>(nodes_.size()) - 1;
}

int Graph::check(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size()))
    throw ContractError("Graph: invalid node id");
  return id;
}

int Graph::leaf(Tensor value, bool requires_grad) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(value);
  n.needs_grad = requires_grad;
  return push(std::move(n));
}

int Graph::matmul(int a, int b) {
  check(a);
  check(b);
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.shape.size() != 2 || tb.shape.size() != 2 || ta.shape[1] != tb.shape[0])
    throw ShapeError("matmul: shapes do not conform");
  const std::size_t m = ta.shape[0], k = ta.shape[1], nn = tb.shape[1];
  Node n;
  n.op = Op::MatMul;
  n.in = {a, b};
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  n.value = Tensor({m, nn});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ta.data[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &tb.data[p * nn];
      double* crow = &n.value.data[i * nn];
      for (std::size_t j = 0; j < nn; ++j) crow[j] += av * brow[j];
    }
  }
  return push(std::move(n));
}

int Graph::binary_same_shape(Op op, int a, int b, const char* name) {
  check(a);
  check(b);
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.shape != tb.shape) throw ShapeError(std::string(name) + ": shape mismatch");
  Node n;
  n.op = op;
  n.in = {a, b};
  n.needs_grad = nodes_[a].needs_grad || nodes_[b].needs_grad;
  n.value = Tensor(ta.shape);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    switch (op) {
      case Op::Add: n.value.data[i] = ta.data[i] + tb.data[i]; break;
      case Op::Sub: n.value.data[i] = ta.data[i] - tb.data[i]; break;
      case Op::Mul: n.value.data[i] = ta.data[i] * tb.data[i]; break;
      default: throw ContractError("binary_same_shape: bad op");
    }
  }
  return push(std::move(n));
}

int Graph::add(int a, int b) { return binary_same_shape(Op::Add, a, b, "add"); }
int Graph::sub(int a, int b) { return binary_same_shape(Op::Sub, a, b, "sub"); }
int Graph::mul(int a, int b) { return binary_same_shape(Op::Mul, a, b, "mul"); }

int Graph::add_bias(int a, int bias) {
  check(a);
  check(bias);
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[bias].value;
  if (ta.shape.size() != 2 || tb.shape.size() != 1 || tb.shape[0] != ta.shape[1])
    throw ShapeError("add_bias: bias length must match columns");
  Node n;
  n.op = Op::AddBias;
  n.in = {a, bias};
  n.needs_grad = nodes_[a].needs_grad || nodes_[bias].needs_grad;
  n.value = Tensor(ta.shape);
  const std::size_t m = ta.shape[0], c = ta.shape[1];
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < c; ++j)
      n.value.data[i * c + j] = ta.data[i * c + j] + tb.data[j];
  return push(std::move(n));
}

int Graph::unary(Op op, int a, const char* name) {
  check(a);
  const Tensor& ta = nodes_[a].value;
  Node n;
  n.op = op;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  n.value = Tensor(ta.shape);
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const double x = ta.data[i];
    switch (op) {
      case Op::Relu: n.value.data[i] = x > 0.0 ? x : 0.0; break;
      case Op::Exp: n.value.data[i] = std::exp(x); break;
      case Op::Log:
        if (x <= 0.0) throw std::domain_error(std::string(name) + ": log of non-positive value");
        n.value.data[i] = std::log(x);
        break;
      default: throw ContractError("unary: bad op");
    }
  }
  return push(std::move(n));
}

int Graph::relu(int a) { return unary(Op::Relu, a, "relu"); }
int Graph::exp_(int a) { return unary(Op::Exp, a, "exp"); }
int Graph::log_(int a) { return unary(Op::Log, a, "log"); }

int Graph::log_softmax(int a) {
  check(a);
  const Tensor& ta = nodes_[a].value;
  if (ta.shape.size() != 2) throw ShapeError("log_softmax: expects a 2-d tensor");
  Node n;
  n.op = Op::LogSoftmax;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  n.value = Tensor(ta.shape);
  const std::size_t m = ta.shape[0], c = ta.shape[1];
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = &ta.data[i * c];
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double lse = 0.0;
    for (std::size_t j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
    lse = mx + std::log(lse);
    for (std::size_t j = 0; j < c; ++j) n.value.data[i * c + j] = row[j] - lse;
  }
  return push(std::move(n));
}

int Graph::sum(int a) {
  check(a);
  Node n;
  n.op = Op::Sum;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  double s = 0.0;
  for (double v : nodes_[a].value.data) s += v;
  n.value = Tensor({1}, {s});
  return push(std::move(n));
}

int Graph::mean(int a) {
  check(a);
  if (nodes_[a].value.size() == 0) throw ShapeError("mean: empty tensor");
  Node n;
  n.op = Op::Mean;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  double s = 0.0;
  for (double v : nodes_[a].value.data) s += v;
  n.value = Tensor({1}, {s / static_cast<double>(nodes_[a].value.size())});
  return push(std::move(n));
}

int Graph::scale(int a, double c) {
  check(a);
  Node n;
  n.op = Op::Scale;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  n.scalar = c;
  n.value = Tensor(nodes_[a].value.shape);
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value.data[i] = c * nodes_[a].value.data[i];
  return push(std::move(n));
}

int Graph::l1_norm_(int a) {
  check(a);
  Node n;
  n.op = Op::L1Norm;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  n.value = Tensor({1}, {l1_norm(nodes_[a].value.data)});
  return push(std::move(n));
}

int Graph::l2_norm_(int a) {
  check(a);
  Node n;
  n.op = Op::L2Norm;
  n.in = {a, -1};
  n.needs_grad = nodes_[a].needs_grad;
  n.value = Tensor({1}, {l2_norm(nodes_[a].value.data)});
  return push(std::move(n));
}

double Graph::scalar_value(int id) const {
  const Tensor& t = nodes_[check(id)].value;
  if (t.size() != 1) throw ContractError("scalar_value: node is not scalar");
  return t.data[0];
}

bool Graph::has_grad(int id) const { return nodes_[check(id)].needs_grad; }

std::span<const double> Graph::grad(int id) const {
  const Node& n = nodes_[check(id)];
  if (!n.needs_grad) throw ContractError("grad: node does not require grad");
  return n.grad;
}

void Graph::zero_grad() {
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Graph::backward(int root) {
  check(root);
  Node& r = nodes_[root];
  if (r.value.size() != 1) throw ContractError("backward: loss must be scalar");
  if (!r.needs_grad) return;
  // Internal grads are scratch per backward call; leaf grads accumulate.
  for (Node& n : nodes_)
    if (n.op != Op::Leaf) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  r.grad[0] += 1.0;
  for (int id = root; id >= 0; --id) {
    if (nodes_[id].op == Op::Leaf || !nodes_[id].needs_grad) continue;
    backprop_node(id);
  }
  // The seed must not persist into a later backward from another root.
  if (r.op == Op::Leaf) return;  // already consumed by the loop above
}

void Graph::backprop_node(int id) {
  Node& n = nodes_[id];
  const std::vector<double>& g = n.grad;
  auto acc = [&](int input) -> std::vector<double>* {
    Node& in = nodes_[input];
    return in.needs_grad ? &in.grad : nullptr;
  };
  switch (n.op) {
    case Op::MatMul: {
      const Node& a = nodes_[n.in[0]];
      const Node& b = nodes_[n.in[1]];
      const std::size_t m = a.value.shape[0], k = a.value.shape[1],
                        c = b.value.shape[1];
      if (auto* ga = acc(n.in[0])) {
        // gA += gC . B^T
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            double s = 0.0;
            const double* grow = &g[i * c];
            const double* brow = &b.value.data[p * c];
            for (std::size_t j = 0; j < c; ++j) s += grow[j] * brow[j];
            (*ga)[i * k + p] += s;
          }
      }
      if (auto* gb = acc(n.in[1])) {
        // gB += A^T . gC
        for (std::size_t i = 0; i < m; ++i) {
          const double* arow = &a.value.data[i * k];
          const double* grow = &g[i * c];
          for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* brow = &(*gb)[p * c];
            for (std::size_t j = 0; j < c; ++j) brow[j] += av * grow[j];
          }
        }
      }
      break;
    }
    case Op::Add:
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
      if (auto* gb = acc(n.in[1]))
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
      break;
    case Op::Sub:
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
      if (auto* gb = acc(n.in[1]))
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
      break;
    case Op::Mul: {
      const Node& a = nodes_[n.in[0]];
      const Node& b = nodes_[n.in[1]];
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * b.value.data[i];
      if (auto* gb = acc(n.in[1]))
        for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * a.value.data[i];
      break;
    }
    case Op::AddBias: {
      const std::size_t m = n.value.shape[0], c = n.value.shape[1];
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
      if (auto* gb = acc(n.in[1]))
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) (*gb)[j] += g[i * c + j];
      break;
    }
    case Op::Relu: {
      const Node& a = nodes_[n.in[0]];
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i)
          if (a.value.data[i] > 0.0) (*ga)[i] += g[i];
      break;
    }
    case Op::Exp:
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * n.value.data[i];
      break;
    case Op::Log: {
      const Node& a = nodes_[n.in[0]];
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] / a.value.data[i];
      break;
    }
    case Op::LogSoftmax: {
      if (auto* ga = acc(n.in[0])) {
        const std::size_t m = n.value.shape[0], c = n.value.shape[1];
        for (std::size_t i = 0; i < m; ++i) {
          double gsum = 0.0;
          for (std::size_t j = 0; j < c; ++j) gsum += g[i * c + j];
          for (std::size_t j = 0; j < c; ++j)
            (*ga)[i * c + j] += g[i * c + j] - std::exp(n.value.data[i * c + j]) * gsum;
        }
      }
      break;
    }
    case Op::Sum:
      if (auto* ga = acc(n.in[0]))
        for (auto& v : *ga) v += g[0];
      break;
    case Op::Mean: {
      if (auto* ga = acc(n.in[0])) {
        const double inv = 1.0 / static_cast<double>(ga->size());
        for (auto& v : *ga) v += g[0] * inv;
      }
      break;
    }
    case Op::Scale:
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += n.scalar * g[i];
      break;
    case Op::L1Norm: {
      const Node& a = nodes_[n.in[0]];
      if (auto* ga = acc(n.in[0]))
        for (std::size_t i = 0; i < ga->size(); ++i) {
          const double x = a.value.data[i];
          (*ga)[i] += g[0] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
      break;
    }
    case Op::L2Norm: {
      const Node& a = nodes_[n.in[0]];
      const double norm = n.value.data[0];
      if (norm > 0.0) {
        if (auto* ga = acc(n.in[0]))
          for (std::size_t i = 0; i < ga->size(); ++i)
            (*ga)[i] += g[0] * a.value.data[i] / norm;
      }
      break;
    }
    case Op::Leaf:
      break;
  }
}

}  // namespace tradeslab
