#include "tradeslab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tradeslab {

void validate(const MlpSpec& spec) {
  if (spec.input_dim == 0) throw std::invalid_argument("MlpSpec: input_dim must be positive");
  if (spec.hidden_dims.empty())
    throw std::invalid_argument("MlpSpec: at least one hidden layer required");
  for (auto h : spec.hidden_dims)
    if (h == 0) throw std::invalid_argument("MlpSpec: hidden dims must be positive");
  if (spec.num_classes < 2) throw std::invalid_argument("MlpSpec: num_classes must be >= 2");
}

std::size_t Params::total_size() const {
  std::size_t n = 0;
  for (const auto& p : items) n += p.value.size();
  return n;
}

Params init_mlp(const MlpSpec& spec, Rng& rng) {
  validate(spec);
  Params params;
  params.spec = spec;
  std::vector<std::size_t> dims;
  dims.push_back(spec.input_dim);
  for (auto h : spec.hidden_dims) dims.push_back(h);
  dims.push_back(spec.num_classes);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t fan_in = dims[l], fan_out = dims[l + 1];
    const double b = std::sqrt(6.0 / static_cast<double>(fan_in));
    Param w;
    w.name = "w" + std::to_string(l);
    w.value = Tensor({fan_in, fan_out});
    for (auto& v : w.value.data) v = rng.uniform(-b, b);
    w.grad.assign(w.value.size(), 0.0);
    params.items.push_back(std::move(w));
    Param bias;
    bias.name = "b" + std::to_string(l);
    bias.value = Tensor({fan_out});
    bias.grad.assign(fan_out, 0.0);
    params.items.push_back(std::move(bias));
  }
  return params;
}

void zero_grads(Params& params) {
  for (auto& p : params.items) std::fill(p.grad.begin(), p.grad.end(), 0.0);
}

std::vector<double> flatten_values(const Params& params) {
  std::vector<double> flat;
  flat.reserve(params.total_size());
  for (const auto& p : params.items)
    flat.insert(flat.end(), p.value.data.begin(), p.value.data.end());
  return flat;
}

std::vector<double> flatten_grads(const Params& params) {
  std::vector<double> flat;
  flat.reserve(params.total_size());
  for (const auto& p : params.items) {
    if (p.grad.size() != p.value.size())
      throw ContractError("flatten_grads: missing gradient buffer for " + p.name);
    flat.insert(flat.end(), p.grad.begin(), p.grad.end());
  }
  return flat;
}

void unflatten_values(Params& params, std::span<const double> flat) {
  if (flat.size() != params.total_size())
    throw std::invalid_argument("unflatten_values: length mismatch");
  std::size_t off = 0;
  for (auto& p : params.items) {
    std::copy(flat.begin() + off, flat.begin() + off + p.value.size(), p.value.data.begin());
    off += p.value.size();
  }
}

void unflatten_grads(Params& params, std::span<const double> flat) {
  if (flat.size() != params.total_size())
    throw std::invalid_argument("unflatten_grads: length mismatch");
  std::size_t off = 0;
  for (auto& p : params.items) {
    p.grad.assign(flat.begin() + off, flat.begin() + off + p.value.size());
    off += p.value.size();
  }
}

std::vector<int> register_params(Graph& g, const Params& params, bool requires_grad) {
  std::vector<int> ids;
  ids.reserve(params.items.size());
  for (const auto& p : params.items) ids.push_back(g.leaf(p.value, requires_grad));
  return ids;
}

int mlp_forward_node(Graph& g, const MlpSpec& spec, std::span<const int> param_ids, int x) {
  validate(spec);
  if (param_ids.size() != 2 * (spec.hidden_dims.size() + 1))
    throw ContractError("mlp_forward_node: wrong parameter count");
  const Tensor& xin = g.value(x);
  if (xin.shape.size() != 2 || xin.shape[1] != spec.input_dim)
    throw ShapeError("mlp_forward: input second dimension must equal input_dim");
  int h = x;
  const std::size_t layers = spec.hidden_dims.size() + 1;
  for (std::size_t l = 0; l < layers; ++l) {
    h = g.add_bias(g.matmul(h, param_ids[2 * l]), param_ids[2 * l + 1]);
    if (l + 1 < layers) h = g.relu(h);
  }
  return h;
}

ForwardHandles mlp_forward(Graph& g, const Params& params, const Tensor& x,
                           bool input_requires_grad, bool params_require_grad) {
  ForwardHandles h;
  h.params = register_params(g, params, params_require_grad);
  h.input = g.leaf(x, input_requires_grad);
  h.logits = mlp_forward_node(g, params.spec, h.params, h.input);
  return h;
}

Tensor mlp_logits(const Params& params, const Tensor& x) {
  Graph g;
  auto h = mlp_forward(g, params, x, false, false);
  return g.value(h.logits);
}

void accumulate_grads(const Graph& g, std::span<const int> param_ids, Params& params) {
  if (param_ids.size() != params.items.size())
    throw ContractError("accumulate_grads: id count mismatch");
  for (std::size_t i = 0; i < param_ids.size(); ++i) {
    auto grad = g.grad(param_ids[i]);
    auto& dst = params.items[i].grad;
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += grad[j];
  }
}

std::vector<double> leaf_grads_flat(const Graph& g, std::span<const int> param_ids) {
  std::vector<double> flat;
  for (int id : param_ids) {
    auto grad = g.grad(id);
    flat.insert(flat.end(), grad.begin(), grad.end());
  }
  return flat;
}

namespace {

Tensor one_hot(const std::vector<int>& labels, std::size_t classes) {
  Tensor t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw std::invalid_argument("label out of range");
    t.data[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return t;
}

}  // namespace

int cross_entropy_node(Graph& g, int logits, const std::vector<int>& labels,
                       Reduction reduction) {
  const Shape lshape = g.value(logits).shape;  // copy: pushes below may reallocate
  if (lshape.size() != 2 || lshape[0] != labels.size())
    throw ShapeError("cross_entropy: logits rows must match label count");
  const int lp = g.log_softmax(logits);
  const int oh = g.leaf(one_hot(labels, lshape[1]), false);
  const int picked = g.sum(g.mul(lp, oh));
  const double denom =
      reduction == Reduction::Mean ? static_cast<double>(labels.size()) : 1.0;
  return g.scale(picked, -1.0 / denom);
}

int kl_divergence_node(Graph& g, int clean_logits, int adv_logits, Reduction reduction) {
  const Shape cshape = g.value(clean_logits).shape;  // copy: pushes below may reallocate
  if (cshape != g.value(adv_logits).shape)
    throw ShapeError("kl_divergence: logit shapes must match");
  const int lp_clean = g.log_softmax(clean_logits);
  const int lp_adv = g.log_softmax(adv_logits);
  const int p_clean = g.exp_(lp_clean);
  const int kl = g.sum(g.mul(p_clean, g.sub(lp_clean, lp_adv)));
  const double denom =
      reduction == Reduction::Mean ? static_cast<double>(cshape[0]) : 1.0;
  return g.scale(kl, 1.0 / denom);
}

int kl_vs_fixed_node(Graph& g, const Tensor& clean_logits, int adv_logits,
                     Reduction reduction) {
  const int fixed = g.leaf(clean_logits, false);
  return kl_divergence_node(g, fixed, adv_logits, reduction);
}

std::vector<int> predict(const Params& params, const Tensor& x) {
  const Tensor logits = mlp_logits(params, x);
  const std::size_t m = logits.shape[0], c = logits.shape[1];
  std::vector<int> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (logits.data[i * c + j] > logits.data[i * c + best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

double accuracy_of_logits(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t m = logits.shape[0], c = logits.shape[1];
  if (m != labels.size()) throw ShapeError("accuracy: row count mismatch");
  if (m == 0) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < m; ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (logits.data[i * c + j] > logits.data[i * c + best]) best = j;
    if (static_cast<int>(best) == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(m);
}

}  // namespace tradeslab
