#pragma once

#include <string>
#include <vector>

#include "tradeslab/graph.hpp"

namespace tradeslab {

// MLP classifier producing logits for k-class problems. ReLU activations,
// no convolutions or normalization layers.
struct MlpSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 0;

  bool operator==(const MlpSpec&) const = default;
};

void validate(const MlpSpec& spec);

struct Param {
  std::string name;
  Tensor value;
  std::vector<double> grad;  // same length as value.data
};

struct Params {
  MlpSpec spec;
  std::vector<Param> items;

  std::size_t total_size() const;
};

// Weights ~ Uniform(-b, b) with b = sqrt(6 / fan_in); biases zero.
Params init_mlp(const MlpSpec& spec, Rng& rng);

void zero_grads(Params& params);

std::vector<double> flatten_values(const Params& params);
std::vector<double> flatten_grads(const Params& params);
void unflatten_values(Params& params, std::span<const double> flat);
void unflatten_grads(Params& params, std::span<const double> flat);

// Register every parameter as a graph leaf, in declared order.
std::vector<int> register_params(Graph& g, const Params& params, bool requires_grad);

// Forward pass through an already-registered parameter list.
int mlp_forward_node(Graph& g, const MlpSpec& spec, std::span<const int> param_ids, int x);

struct ForwardHandles {
  int input = -1;
  std::vector<int> params;
  int logits = -1;
};

ForwardHandles mlp_forward(Graph& g, const Params& params, const Tensor& x,
                           bool input_requires_grad, bool params_require_grad);

// Value-only forward.
Tensor mlp_logits(const Params& params, const Tensor& x);

// Add flattened leaf gradients from the graph into Param::grad buffers.
void accumulate_grads(const Graph& g, std::span<const int> param_ids, Params& params);

// Read the flattened leaf gradients without touching Param::grad.
std::vector<double> leaf_grads_flat(const Graph& g, std::span<const int> param_ids);

// Mean cross-entropy / KL loss nodes built from the closed primitive set.
enum class Reduction { Mean, Sum };
int cross_entropy_node(Graph& g, int logits, const std::vector<int>& labels,
                       Reduction reduction = Reduction::Mean);
// KL(softmax(clean) || softmax(adv)), averaged (or summed) over rows.
// Differentiates through both arguments.
int kl_divergence_node(Graph& g, int clean_logits, int adv_logits,
                       Reduction reduction = Reduction::Mean);
// Same KL but with the clean distribution held fixed at the given logits.
int kl_vs_fixed_node(Graph& g, const Tensor& clean_logits, int adv_logits,
                     Reduction reduction = Reduction::Mean);

std::vector<int> predict(const Params& params, const Tensor& x);
double accuracy_of_logits(const Tensor& logits, const std::vector<int>& labels);

}  // namespace tradeslab
