#include "tradeslab/losses.hpp"

#include <stdexcept>

namespace tradeslab {

const char* to_string(LossMode mode) {
  switch (mode) {
    case LossMode::Trades: return "trades";
    case LossMode::PgdAt: return "pgd_at";
    case LossMode::ModifiedTrades: return "modified_trades";
  }
  return "?";
}

LossMode loss_mode_from_string(const std::string& s) {
  if (s == "trades") return LossMode::Trades;
  if (s == "pgd_at") return LossMode::PgdAt;
  if (s == "modified_trades") return LossMode::ModifiedTrades;
  throw std::invalid_argument("unknown loss_mode: " + s);
}

LossNodes build_loss(Graph& g, const Params& params, const Tensor& x_clean,
                     const Tensor& x_adv, const std::vector<int>& y, double beta,
                     LossMode mode, bool params_require_grad) {
  if (beta < 0.0) throw std::invalid_argument("build_loss: beta must be >= 0");
  LossNodes nodes;
  nodes.param_ids = register_params(g, params, params_require_grad);
  const int x_adv_id = g.leaf(x_adv, false);
  nodes.adv_logits = mlp_forward_node(g, params.spec, nodes.param_ids, x_adv_id);
  if (mode == LossMode::PgdAt) {
    nodes.ce_term = cross_entropy_node(g, nodes.adv_logits, y);
    nodes.loss = nodes.ce_term;
    // Clean logits kept for accuracy bookkeeping only.
    const int x_clean_id = g.leaf(x_clean, false);
    nodes.clean_logits = mlp_forward_node(g, params.spec, nodes.param_ids, x_clean_id);
    return nodes;
  }
  const int x_clean_id = g.leaf(x_clean, false);
  nodes.clean_logits = mlp_forward_node(g, params.spec, nodes.param_ids, x_clean_id);
  nodes.ce_term = cross_entropy_node(g, nodes.clean_logits, y);
  nodes.kl_term = g.scale(kl_divergence_node(g, nodes.clean_logits, nodes.adv_logits), beta);
  nodes.loss = g.add(nodes.ce_term, nodes.kl_term);
  return nodes;
}

double trades_loss(const Params& params, const Tensor& x_clean, const Tensor& x_adv,
                   const std::vector<int>& y, double beta) {
  Graph g;
  return g.scalar_value(
      build_loss(g, params, x_clean, x_adv, y, beta, LossMode::Trades, false).loss);
}

double pgd_at_loss(const Params& params, const Tensor& x_adv, const std::vector<int>& y) {
  Graph g;
  return g.scalar_value(
      build_loss(g, params, x_adv, x_adv, y, 0.0, LossMode::PgdAt, false).loss);
}

double modified_trades_loss(const Params& params, const Tensor& x_clean,
                            const Tensor& x_adv, const std::vector<int>& y, double beta) {
  Graph g;
  return g.scalar_value(
      build_loss(g, params, x_clean, x_adv, y, beta, LossMode::ModifiedTrades, false).loss);
}

}  // namespace tradeslab
