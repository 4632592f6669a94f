#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradeslab/tensor.hpp"

namespace tradeslab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable after construction. domain_lo/domain_hi are the per-feature
// clamp bounds that attacks project back into.
struct Dataset {
  Tensor features;  // [n x d]
  std::vector<int> labels;
  std::vector<double> domain_lo, domain_hi;
  std::size_t num_classes = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.shape.size() == 2 ? features.shape[1] : 0; }
};

// k Gaussian clusters with centers drawn from rng, features affinely
// rescaled to [0,1]^d, labels by cluster.
Dataset gen_blobs(std::size_t k, std::size_t per_class, std::size_t d, double spread,
                  Rng& rng);

// CSV: comma-separated, no header, d float columns then one integer label,
// newline-terminated rows.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

struct SplitFractions {
  double train = 0.7, val = 0.15, test = 0.15;
};

struct Splits {
  Dataset train, val, test;
};

// Stratified, disjoint, exhaustive, seed-deterministic.
Splits split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

struct BatchPlan {
  std::size_t batch_size = 256;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
};

struct Batch {
  Tensor x;  // [b x d]
  std::vector<int> y;
  std::vector<std::size_t> indices;
};

// ceil(n / batch_size) batches covering every sample exactly once;
// order is a pure function of (seed, epoch).
std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan);

}  // namespace tradeslab
