#include "tradeslab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tradeslab {

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(idx[i - 1], idx[j]);
  }
}

Dataset take(const Dataset& ds, const std::vector<std::size_t>& idx) {
  Dataset out;
  const std::size_t d = ds.dim();
  out.features = Tensor({idx.size(), d});
  out.labels.reserve(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    std::copy_n(&ds.features.data[idx[r] * d], d, &out.features.data[r * d]);
    out.labels.push_back(ds.labels[idx[r]]);
  }
  out.domain_lo = ds.domain_lo;
  out.domain_hi = ds.domain_hi;
  out.num_classes = ds.num_classes;
  return out;
}

}  // namespace

Dataset gen_blobs(std::size_t k, std::size_t per_class, std::size_t d, double spread,
                  Rng& rng) {
  if (k < 2) throw std::invalid_argument("gen_blobs: k must be >= 2");
  if (d < 2) throw std::invalid_argument("gen_blobs: d must be >= 2");
  if (per_class == 0) throw std::invalid_argument("gen_blobs: per_class must be positive");
  const std::size_t n = k * per_class;
  std::vector<double> centers(k * d);
  for (auto& c : centers) c = rng.uniform();
  Dataset ds;
  ds.features = Tensor({n, d});
  ds.labels.resize(n);
  ds.num_classes = k;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::size_t row = c * per_class + s;
      ds.labels[row] = static_cast<int>(c);
      for (std::size_t j = 0; j < d; ++j)
        ds.features.data[row * d + j] = centers[c * d + j] + rng.gaussian(0.0, spread);
    }
  }
  // Min-max rescale each dimension to [0,1] so the image-style epsilon budget
  // keeps its meaning.
  for (std::size_t j = 0; j < d; ++j) {
    double mn = ds.features.data[j], mx = ds.features.data[j];
    for (std::size_t r = 1; r < n; ++r) {
      const double v = ds.features.data[r * d + j];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    const double range = mx - mn;
    for (std::size_t r = 0; r < n; ++r) {
      double& v = ds.features.data[r * d + j];
      v = range > 1e-12 ? (v - mn) / range : 0.5;
    }
  }
  ds.domain_lo.assign(d, 0.0);
  ds.domain_hi.assign(d, 1.0);
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path);
  Dataset ds;
  std::string line;
  std::size_t lineno = 0, d = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      std::size_t pos = 0;
      double v;
      try {
        v = std::stod(field, &pos);
      } catch (const std::exception&) {
        throw ParseError("load_csv: non-numeric field at line " + std::to_string(lineno));
      }
      while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
      if (pos != field.size())
        throw ParseError("load_csv: malformed field at line " + std::to_string(lineno));
      row.push_back(v);
    }
    if (row.size() < 2)
      throw ParseError("load_csv: too few columns at line " + std::to_string(lineno));
    if (d == 0) {
      d = row.size() - 1;
    } else if (row.size() - 1 != d) {
      throw ParseError("load_csv: inconsistent column count at line " + std::to_string(lineno));
    }
    const double lbl = row.back();
    if (lbl < 0 || lbl != std::floor(lbl))
      throw ParseError("load_csv: label must be a nonnegative integer at line " +
                       std::to_string(lineno));
    ds.labels.push_back(static_cast<int>(lbl));
    values.insert(values.end(), row.begin(), row.end() - 1);
  }
  if (ds.labels.empty()) throw ParseError("load_csv: empty file " + path);
  const std::size_t n = ds.labels.size();
  ds.features = Tensor({n, d}, std::move(values));
  ds.num_classes = static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
  ds.domain_lo.resize(d);
  ds.domain_hi.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double mn = ds.features.data[j], mx = ds.features.data[j];
    for (std::size_t r = 1; r < n; ++r) {
      const double v = ds.features.data[r * d + j];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    ds.domain_lo[j] = mn;
    ds.domain_hi[j] = mx;
  }
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_csv: cannot open " + path);
  const std::size_t n = ds.size(), d = ds.dim();
  char buf[48];
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", ds.features.data[r * d + j]);
      out << buf << ',';
    }
    out << ds.labels[r] << '\n';
  }
}

Splits split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed) {
  const double fr[3] = {fractions.train, fractions.val, fractions.test};
  double total = 0.0;
  for (double f : fr) {
    if (f < 0.0) throw std::invalid_argument("split: fractions must be nonnegative");
    total += f;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must sum to 1");
  // Check that every nonzero split can hold at least one sample per class.
  for (double f : fr)
    if (f > 0.0 && static_cast<std::size_t>(f * static_cast<double>(ds.size())) < ds.num_classes)
      throw std::invalid_argument("split: a nonzero split is smaller than the class count");

  std::vector<std::vector<std::size_t>> per_class(ds.num_classes);
  for (std::size_t i = 0; i < ds.size(); ++i)
    per_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  std::vector<std::size_t> out_idx[3];
  Rng rng(seed);
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    auto& idx = per_class[c];
    Rng class_rng = rng.fork(c);
    shuffle_indices(idx, class_rng);
    const std::size_t n = idx.size();
    // Largest-remainder allocation keeps per-class counts within +-1 of the
    // proportional share.
    std::size_t counts[3];
    double rem[3];
    std::size_t used = 0;
    for (int s = 0; s < 3; ++s) {
      const double share = fr[s] * static_cast<double>(n);
      counts[s] = static_cast<std::size_t>(std::floor(share));
      rem[s] = share - std::floor(share);
      used += counts[s];
    }
    while (used < n) {
      int best = 0;
      for (int s = 1; s < 3; ++s)
        if (rem[s] > rem[best]) best = s;
      ++counts[best];
      rem[best] = -1.0;
      ++used;
    }
    std::size_t off = 0;
    for (int s = 0; s < 3; ++s) {
      for (std::size_t i = 0; i < counts[s]; ++i) out_idx[s].push_back(idx[off + i]);
      off += counts[s];
    }
  }
  for (auto& v : out_idx) std::sort(v.begin(), v.end());
  return Splits{take(ds, out_idx[0]), take(ds, out_idx[1]), take(ds, out_idx[2])};
}

std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan) {
  if (plan.batch_size == 0) throw std::invalid_argument("batches: batch_size must be positive");
  if (plan.batch_size > ds.size())
    throw std::invalid_argument("batches: batch_size exceeds dataset size");
  std::vector<std::size_t> perm(ds.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(mix_seed(plan.seed, plan.epoch));
  shuffle_indices(perm, rng);
  std::vector<Batch> out;
  const std::size_t d = ds.dim();
  for (std::size_t start = 0; start < perm.size(); start += plan.batch_size) {
    const std::size_t b = std::min(plan.batch_size, perm.size() - start);
    Batch batch;
    batch.x = Tensor({b, d});
    batch.y.reserve(b);
    batch.indices.reserve(b);
    for (std::size_t r = 0; r < b; ++r) {
      const std::size_t src = perm[start + r];
      std::copy_n(&ds.features.data[src * d], d, &batch.x.data[r * d]);
      batch.y.push_back(ds.labels[src]);
      batch.indices.push_back(src);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

}  // namespace tradeslab
