#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tradeslab/rng.hpp"

namespace tradeslab {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

// Plain n-dimensional value in row-major order. Differentiation bookkeeping
// (requires_grad, grad buffers) lives on graph nodes; a Tensor with no live
// graph is an immutable value.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(Shape s, double fill = 0.0);
  Tensor(Shape s, std::vector<double> d);

  std::size_t size() const { return data.size(); }
  bool all_finite() const;
};

Tensor sample_gaussian(Rng& rng, const Shape& shape, double mean, double std);
Tensor sample_rademacher(Rng& rng, const Shape& shape);

double l1_norm(std::span<const double> v);
double l2_norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

// Cosine similarity; pairs involving a zero vector map to 0.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace tradeslab
