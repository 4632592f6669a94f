#include "tradeslab/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace tradeslab {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape s, double fill) : shape(std::move(s)) {
  data.assign(numel(shape), fill);
}

Tensor::Tensor(Shape s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != numel(shape))
    throw std::invalid_argument("Tensor: data length does not match shape");
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor sample_gaussian(Rng& rng, const Shape& shape, double mean, double std) {
  if (std < 0.0) throw std::invalid_argument("sample_gaussian: std must be >= 0");
  Tensor t(shape);
  for (auto& v : t.data) v = rng.gaussian(mean, std);
  return t;
}

Tensor sample_rademacher(Rng& rng, const Shape& shape) {
  Tensor t(shape);
  for (auto& v : t.data) v = rng.rademacher();
  return t;
}

double l1_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace tradeslab
