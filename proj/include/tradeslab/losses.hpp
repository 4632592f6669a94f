#pragma once

#include "tradeslab/model.hpp"

namespace tradeslab {

enum class LossMode { Trades, PgdAt, ModifiedTrades };

const char* to_string(LossMode mode);
LossMode loss_mode_from_string(const std::string& s);

// One graph holding the full training loss and its two terms. The KL term
// node carries the beta weight, so its gradient norm is the weighted norm.
struct LossNodes {
  int loss = -1;
  int ce_term = -1;
  int kl_term = -1;  // -1 for PgdAt
  int clean_logits = -1;
  int adv_logits = -1;
  std::vector<int> param_ids;
};

// Trades / ModifiedTrades: CE(f(x_clean), y) + beta * KL(f(x_clean) || f(x_adv)).
// PgdAt: CE(f(x_adv), y). Batch means throughout.
LossNodes build_loss(Graph& g, const Params& params, const Tensor& x_clean,
                     const Tensor& x_adv, const std::vector<int>& y, double beta,
                     LossMode mode, bool params_require_grad = true);

// Value-only conveniences.
double trades_loss(const Params& params, const Tensor& x_clean, const Tensor& x_adv,
                   const std::vector<int>& y, double beta);
double pgd_at_loss(const Params& params, const Tensor& x_adv, const std::vector<int>& y);
double modified_trades_loss(const Params& params, const Tensor& x_clean,
                            const Tensor& x_adv, const std::vector<int>& y, double beta);

}  // namespace tradeslab
