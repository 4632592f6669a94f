#include "tradeslab/attack.hpp"

#include <algorithm>
#include <cmath>

#include "tradeslab/parallel.hpp"

namespace tradeslab {

void validate(const AttackConfig& cfg) {
  if (cfg.epsilon < 0.0) throw std::invalid_argument("AttackConfig: epsilon must be >= 0");
  if (cfg.alpha <= 0.0) throw std::invalid_argument("AttackConfig: alpha must be > 0");
  if (cfg.steps < 1) throw std::invalid_argument("AttackConfig: steps must be >= 1");
  if (cfg.jitter_std < 0.0) throw std::invalid_argument("AttackConfig: jitter_std must be >= 0");
}

DomainBounds bounds_of(const Dataset& ds) {
  return DomainBounds{ds.domain_lo, ds.domain_hi};
}

namespace {

// Clamp to the epsilon ball around x_clean intersected with the domain.
void project(Tensor& x, const Tensor& x_clean, double eps, const DomainBounds& bounds) {
  const std::size_t d = x.shape.back();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = i % d;
    double v = std::clamp(x.data[i], x_clean.data[i] - eps, x_clean.data[i] + eps);
    v = std::clamp(v, bounds.lo[j], bounds.hi[j]);
    x.data[i] = v;
  }
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Tensor kl_input_grad(const Params& params, const Tensor& clean_logits, const Tensor& x) {
  Graph g;
  auto h = mlp_forward(g, params, x, true, false);
  const int kl = kl_vs_fixed_node(g, clean_logits, h.logits, Reduction::Sum);
  g.backward(kl);
  return Tensor(x.shape, std::vector<double>(g.grad(h.input).begin(), g.grad(h.input).end()));
}

}  // namespace

Tensor ce_input_grad(const Params& params, const Tensor& x, const std::vector<int>& y) {
  Graph g;
  auto h = mlp_forward(g, params, x, true, false);
  const int loss = cross_entropy_node(g, h.logits, y, Reduction::Sum);
  g.backward(loss);
  return Tensor(x.shape, std::vector<double>(g.grad(h.input).begin(), g.grad(h.input).end()));
}

AttackTrace sign_ascent(const InputGradFn& grad_fn, const Tensor& x_clean,
                        const Tensor& x_start, const AttackConfig& cfg,
                        const DomainBounds& bounds) {
  validate(cfg);
  AttackTrace trace;
  trace.epsilon = cfg.epsilon;
  trace.x_clean = x_clean;
  trace.x_start = x_start;
  project(trace.x_start, x_clean, cfg.epsilon, bounds);
  Tensor cur = trace.x_start;
  for (int i = 0; i < cfg.steps; ++i) {
    const Tensor g = grad_fn(cur);
    Tensor s(g.shape);
    for (std::size_t j = 0; j < g.size(); ++j) s.data[j] = sign_of(g.data[j]);
    trace.grad_signs.push_back(s);
    for (std::size_t j = 0; j < cur.size(); ++j) cur.data[j] += cfg.alpha * s.data[j];
    project(cur, x_clean, cfg.epsilon, bounds);
    trace.iterates.push_back(cur);
  }
  trace.x_adv = cur;
  trace.final_grad = grad_fn(cur);
  return trace;
}

AttackTrace pgd(const Params& params, const Tensor& x, const std::vector<int>& y,
                const AttackConfig& cfg, const DomainBounds& bounds) {
  validate(cfg);
  if (cfg.objective != AttackObjective::CrossEntropy)
    throw ContractError("pgd: objective must be cross-entropy");
  Tensor start = x;
  if (cfg.random_start) {
    Rng rng(cfg.seed);
    for (auto& v : start.data) v += rng.uniform(-cfg.epsilon, cfg.epsilon);
  }
  auto grad_fn = [&](const Tensor& xi) { return ce_input_grad(params, xi, y); };
  return sign_ascent(grad_fn, x, start, cfg, bounds);
}

AttackTrace fgsm(const Params& params, const Tensor& x, const std::vector<int>& y,
                 const AttackConfig& cfg, const DomainBounds& bounds) {
  if (cfg.objective != AttackObjective::CrossEntropy)
    throw ContractError("fgsm: objective must be cross-entropy");
  AttackConfig one = cfg;
  one.steps = 1;
  one.alpha = cfg.epsilon > 0.0 ? cfg.epsilon : cfg.alpha;
  one.random_start = false;
  return pgd(params, x, y, one, bounds);
}

AttackTrace tpgd(const Params& params, const Tensor& x, const AttackConfig& cfg,
                 const DomainBounds& bounds) {
  validate(cfg);
  if (cfg.objective != AttackObjective::KlVsCleanLogits)
    throw ContractError("tpgd: objective must be kl-vs-clean-logits");
  const Tensor clean_logits = mlp_logits(params, x);
  Tensor start = x;
  Rng rng(cfg.seed);
  for (auto& v : start.data) v += rng.gaussian(0.0, cfg.jitter_std);
  auto grad_fn = [&](const Tensor& xi) { return kl_input_grad(params, clean_logits, xi); };
  return sign_ascent(grad_fn, x, start, cfg, bounds);
}

namespace {

// Margin loss for one row: max_{j != y} z_j - z_y. Positive iff misclassified.
double margin_of(const Tensor& logits, std::size_t row, int y) {
  const std::size_t c = logits.shape[1];
  double best_other = -1e300;
  for (std::size_t j = 0; j < c; ++j)
    if (static_cast<int>(j) != y) best_other = std::max(best_other, logits.data[row * c + j]);
  return best_other - logits.data[row * c + static_cast<std::size_t>(y)];
}

bool misclassified(const Tensor& logits, std::size_t row, int y) {
  const std::size_t c = logits.shape[1];
  std::size_t best = 0;
  for (std::size_t j = 1; j < c; ++j)
    if (logits.data[row * c + j] > logits.data[row * c + best]) best = j;
  return static_cast<int>(best) != y;
}

}  // namespace

SquareResult square_search(const Params& params, const Tensor& x,
                           const std::vector<int>& y, double epsilon, int queries,
                           Rng& rng, const DomainBounds& bounds) {
  if (queries < 1) throw std::invalid_argument("square_search: queries must be >= 1");
  const std::size_t n = x.shape[0], d = x.shape[1];
  SquareResult res;
  res.x_adv = x;
  res.success.assign(n, false);
  res.queries_used.assign(n, 0);

  for (std::size_t i = 0; i < n; ++i) {
    Rng srng = rng.fork(i);
    Tensor row({1, d});
    std::copy_n(&x.data[i * d], d, row.data.begin());
    auto eval = [&](const Tensor& cand) {
      const Tensor logits = mlp_logits(params, cand);
      return std::pair<double, bool>(margin_of(logits, 0, y[i]),
                                     misclassified(logits, 0, y[i]));
    };
    int used = 1;
    auto [margin, hit] = eval(row);
    if (hit) {
      std::copy_n(row.data.begin(), d, &res.x_adv.data[i * d]);
      res.success[i] = true;
      res.queries_used[i] = used;
      continue;
    }
    // Initial stripes: every coordinate pushed to a random face of the ball.
    Tensor best = row;
    if (used < queries) {
      Tensor cand = row;
      for (std::size_t j = 0; j < d; ++j) cand.data[j] += epsilon * srng.rademacher();
      project(cand, row, epsilon, bounds);
      ++used;
      auto [m2, h2] = eval(cand);
      if (m2 > margin) {
        margin = m2;
        best = cand;
      }
      if (h2) {
        std::copy_n(cand.data.begin(), d, &res.x_adv.data[i * d]);
        res.success[i] = true;
        res.queries_used[i] = used;
        continue;
      }
    }
    // Window side length halves across the budget.
    while (used < queries) {
      const int stage = static_cast<int>(6L * used / std::max(queries, 1));
      const std::size_t w =
          std::max<std::size_t>(1, (d / 2) >> std::min(stage, 62));
      const std::size_t start = w >= d ? 0 : srng.next_u64() % (d - w + 1);
      const double sigma = srng.rademacher();
      Tensor cand = best;
      for (std::size_t j = start; j < start + w; ++j)
        cand.data[j] = row.data[j] + sigma * epsilon;
      project(cand, row, epsilon, bounds);
      ++used;
      auto [m2, h2] = eval(cand);
      if (m2 > margin) {
        margin = m2;
        best = cand;
      }
      if (h2) {
        best = cand;
        res.success[i] = true;
        break;
      }
    }
    std::copy_n(best.data.begin(), d, &res.x_adv.data[i * d]);
    res.queries_used[i] = used;
  }
  return res;
}

double clean_accuracy(const Params& params, const Dataset& ds, std::size_t batch_size) {
  if (ds.size() == 0) return 0.0;
  const Tensor logits = mlp_logits(params, ds.features);
  return accuracy_of_logits(logits, ds.labels);
}

double robust_accuracy(const Params& params, const Dataset& ds, const AttackFn& attack,
                       std::size_t batch_size) {
  if (ds.size() == 0) return 0.0;
  const std::size_t bs = std::min(batch_size, ds.size());
  auto bb = batches(ds, BatchPlan{bs, 0, 0});
  std::vector<std::size_t> correct(bb.size(), 0);
  parallel_for(bb.size(), [&](std::size_t bi) {
    const Batch& batch = bb[bi];
    const Tensor x_adv = attack(batch.x, batch.y, bi);
    const Tensor logits = mlp_logits(params, x_adv);
    const std::size_t c = logits.shape[1];
    std::size_t ok = 0;
    for (std::size_t r = 0; r < batch.y.size(); ++r) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < c; ++j)
        if (logits.data[r * c + j] > logits.data[r * c + best]) best = j;
      if (static_cast<int>(best) == batch.y[r]) ++ok;
    }
    correct[bi] = ok;
  });
  std::size_t total = 0;
  for (auto cnt : correct) total += cnt;
  return static_cast<double>(total) / static_cast<double>(ds.size());
}

}  // namespace tradeslab
