#pragma once

#include <functional>

#include "tradeslab/data.hpp"
#include "tradeslab/model.hpp"

namespace tradeslab {

enum class AttackObjective { CrossEntropy, KlVsCleanLogits };

struct AttackConfig {
  double epsilon = 8.0 / 255.0;  // l-inf budget in feature units
  double alpha = 2.0 / 255.0;    // step size
  int steps = 10;
  bool random_start = false;
  AttackObjective objective = AttackObjective::CrossEntropy;
  std::uint64_t seed = 0;
  double jitter_std = 0.001;  // TPGD start jitter
};

void validate(const AttackConfig& cfg);

struct DomainBounds {
  std::vector<double> lo, hi;
};

DomainBounds bounds_of(const Dataset& ds);

// Per-step iterates and input-gradient signs for a batch; the substrate for
// FOSC and SGCS. Rows index samples.
struct AttackTrace {
  Tensor x_clean;                   // ball centers
  Tensor x_start;                   // after random start / jitter
  std::vector<Tensor> iterates;     // x^1 .. x^k
  std::vector<Tensor> grad_signs;   // sign gradients at x^0 .. x^{k-1}
  Tensor x_adv;                     // == iterates.back()
  Tensor final_grad;                // d loss / d x at x^k
  double epsilon = 0.0;
};

// Batch loss gradient w.r.t. the input; rows must be independent so each row
// is the per-sample gradient.
using InputGradFn = std::function<Tensor(const Tensor& x)>;

// Generic projected sign-ascent driver; pgd/tpgd/fgsm are thin wrappers.
AttackTrace sign_ascent(const InputGradFn& grad_fn, const Tensor& x_clean,
                        const Tensor& x_start, const AttackConfig& cfg,
                        const DomainBounds& bounds);

// Gradient of summed cross-entropy w.r.t. the input.
Tensor ce_input_grad(const Params& params, const Tensor& x, const std::vector<int>& y);

AttackTrace fgsm(const Params& params, const Tensor& x, const std::vector<int>& y,
                 const AttackConfig& cfg, const DomainBounds& bounds);
AttackTrace pgd(const Params& params, const Tensor& x, const std::vector<int>& y,
                const AttackConfig& cfg, const DomainBounds& bounds);
// Label-free: ascends KL(softmax(f(x)) || softmax(f(x^i))) with the clean
// logits held fixed.
AttackTrace tpgd(const Params& params, const Tensor& x, const AttackConfig& cfg,
                 const DomainBounds& bounds);

struct SquareResult {
  Tensor x_adv;
  std::vector<bool> success;
  std::vector<int> queries_used;
};

// Gradient-free random search: proposes contiguous coordinate windows set to
// +-epsilon and keeps proposals that increase the margin loss. Forward
// evaluations only.
SquareResult square_search(const Params& params, const Tensor& x,
                           const std::vector<int>& y, double epsilon, int queries,
                           Rng& rng, const DomainBounds& bounds);

// Maps a clean batch to an adversarial batch.
using AttackFn = std::function<Tensor(const Tensor& x, const std::vector<int>& y,
                                      std::size_t batch_index)>;

double clean_accuracy(const Params& params, const Dataset& ds,
                      std::size_t batch_size = 256);
double robust_accuracy(const Params& params, const Dataset& ds, const AttackFn& attack,
                       std::size_t batch_size = 256);

}  // namespace tradeslab
