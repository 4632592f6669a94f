#include "tradeslab/metrics.hpp"

#include <cmath>
#include <ostream>

namespace tradeslab {

double fosc_closed_form(std::span<const double> x_clean, std::span<const double> x_adv,
                        std::span<const double> grad, double epsilon) {
  if (x_clean.size() != x_adv.size() || x_clean.size() != grad.size())
    throw std::invalid_argument("fosc_closed_form: size mismatch");
  double l1 = 0.0, inner = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    l1 += std::abs(grad[i]);
    inner += (x_adv[i] - x_clean[i]) * grad[i];
  }
  return epsilon * l1 - inner;
}

FoscReport fosc(const AttackTrace& trace, double epsilon) {
  if (trace.final_grad.size() != trace.x_adv.size() || trace.final_grad.size() == 0)
    throw ContractError("fosc: trace carries no final gradient");
  const std::size_t n = trace.x_adv.shape[0];
  const std::size_t d = trace.x_adv.shape[1];
  FoscReport report;
  report.per_sample.reserve(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = fosc_closed_form(
        std::span(trace.x_clean.data).subspan(i * d, d),
        std::span(trace.x_adv.data).subspan(i * d, d),
        std::span(trace.final_grad.data).subspan(i * d, d), epsilon);
    report.per_sample.push_back(v);
    total += v;
  }
  report.mean = n > 0 ? total / static_cast<double>(n) : 0.0;
  return report;
}

double sgcs(const std::vector<AttackTrace>& traces) {
  double total = 0.0;
  std::size_t samples = 0;
  for (const AttackTrace& trace : traces) {
    const std::size_t k = trace.grad_signs.size();
    if (k < 2) throw ContractError("sgcs: requires at least 2 attack steps");
    const std::size_t n = trace.grad_signs[0].shape[0];
    const std::size_t d = trace.grad_signs[0].shape[1];
    for (std::size_t s = 0; s < n; ++s) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
          acc += cosine_similarity(
              std::span(trace.grad_signs[i].data).subspan(s * d, d),
              std::span(trace.grad_signs[j].data).subspan(s * d, d));
        }
      }
      // Ordered-pair average: unordered sum doubled over k(k-1).
      total += 2.0 * acc / static_cast<double>(k * (k - 1));
      ++samples;
    }
  }
  return samples > 0 ? total / static_cast<double>(samples) : 0.0;
}

TermGrads loss_term_grads(const Params& params, const Tensor& x_clean,
                          const Tensor& x_adv, const std::vector<int>& y, double beta,
                          LossMode mode) {
  Graph g;
  const LossNodes nodes = build_loss(g, params, x_clean, x_adv, y, beta, mode, true);
  TermGrads out;
  out.loss = g.scalar_value(nodes.loss);
  out.clean_acc = accuracy_of_logits(g.value(nodes.clean_logits), y);
  out.adv_acc = accuracy_of_logits(g.value(nodes.adv_logits), y);
  g.backward(nodes.loss);
  out.full = leaf_grads_flat(g, nodes.param_ids);
  g.zero_grad();
  g.backward(nodes.ce_term);
  out.ce = leaf_grads_flat(g, nodes.param_ids);
  if (nodes.kl_term >= 0) {
    g.zero_grad();
    g.backward(nodes.kl_term);
    out.kl = leaf_grads_flat(g, nodes.param_ids);
  } else {
    out.kl.assign(out.full.size(), 0.0);
  }
  return out;
}

double gap(double clean_train_acc, double adv_train_acc) {
  return clean_train_acc - adv_train_acc;
}

LandscapeGrid landscape(const Params& params, const Tensor& x, int y,
                        const DomainBounds& bounds, double range, int resolution,
                        Rng& rng) {
  if (resolution < 3 || resolution % 2 == 0)
    throw std::invalid_argument("landscape: resolution must be odd and >= 3");
  if (x.shape.size() != 2 || x.shape[0] != 1)
    throw std::invalid_argument("landscape: expects a single-row input");
  const std::size_t d = x.shape[1];
  LandscapeGrid grid;
  grid.resolution = resolution;
  grid.range = range;

  const Tensor g0 = ce_input_grad(params, x, {y});
  grid.direction_grad_sign = Tensor(x.shape);
  for (std::size_t j = 0; j < d; ++j) {
    const double v = g0.data[j];
    grid.direction_grad_sign.data[j] = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  }
  grid.direction_rademacher = sample_rademacher(rng, x.shape);

  const std::vector<int> label{y};
  for (int ia = 0; ia < resolution; ++ia) {
    const double a = -range + 2.0 * range * ia / (resolution - 1);
    for (int ib = 0; ib < resolution; ++ib) {
      const double b = -range + 2.0 * range * ib / (resolution - 1);
      Tensor pt(x.shape);
      for (std::size_t j = 0; j < d; ++j) {
        double v = x.data[j] + a * grid.direction_grad_sign.data[j] +
                   b * grid.direction_rademacher.data[j];
        pt.data[j] = std::clamp(v, bounds.lo[j], bounds.hi[j]);
      }
      Graph graph;
      auto h = mlp_forward(graph, params, pt, false, false);
      const double z = graph.scalar_value(cross_entropy_node(graph, h.logits, label));
      grid.a.push_back(a);
      grid.b.push_back(b);
      grid.z.push_back(z);
    }
  }
  return grid;
}

void write_landscape_csv(const LandscapeGrid& grid, std::ostream& out) {
  out << "a,b,z\n";
  char buf[128];
  for (std::size_t i = 0; i < grid.z.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", grid.a[i], grid.b[i], grid.z[i]);
    out << buf;
  }
}

bool masking_verdict(double pgd_acc, double blackbox_acc, double threshold) {
  if (pgd_acc < 0.0 || pgd_acc > 1.0 || blackbox_acc < 0.0 || blackbox_acc > 1.0)
    throw std::invalid_argument("masking_verdict: accuracies must be in [0,1]");
  return pgd_acc - blackbox_acc >= threshold;
}

bool self_healing_flag(const EpochWindowPoint& prev, const EpochWindowPoint& cur,
                       const EpochWindowPoint& next, double fosc_threshold) {
  return prev.fosc > fosc_threshold && cur.fosc < 0.1 * fosc_threshold &&
         cur.clean_train_acc < prev.clean_train_acc &&
         next.w_grad_norm < cur.w_grad_norm;
}

}  // namespace tradeslab
