#pragma once

#include <iosfwd>
#include <optional>

#include "tradeslab/attack.hpp"
#include "tradeslab/losses.hpp"

namespace tradeslab {

struct FoscReport {
  std::vector<double> per_sample;
  double mean = 0.0;
};

// Closed form of the ball-constrained linear maximum:
//   eps * ||grad||_1 - <x_adv - x_clean, grad>
// computed against the ball center, never negative up to rounding.
double fosc_closed_form(std::span<const double> x_clean, std::span<const double> x_adv,
                        std::span<const double> grad, double epsilon);

FoscReport fosc(const AttackTrace& trace, double epsilon);

// Mean over samples of the pairwise cosine similarity of per-step sign
// gradients. Requires k >= 2 steps; zero sign vectors contribute 0.
double sgcs(const std::vector<AttackTrace>& traces);

struct GradTelemetry {
  double w_grad_norm = 0.0;
  double ce_norm = 0.0;
  double kl_norm = 0.0;
  double grad_cosine_similarity = 1.0;
  std::size_t step = 0;
};

// Flattened parameter gradients of the full loss and of each term, from
// separate backward passes over one graph.
struct TermGrads {
  std::vector<double> full, ce, kl;
  double loss = 0.0;
  double clean_acc = 0.0;
  double adv_acc = 0.0;
};

TermGrads loss_term_grads(const Params& params, const Tensor& x_clean,
                          const Tensor& x_adv, const std::vector<int>& y, double beta,
                          LossMode mode);

// clean minus adversarial; negative values are the anomalous signature.
double gap(double clean_train_acc, double adv_train_acc);

struct LandscapeGrid {
  int resolution = 0;
  double range = 0.0;
  Tensor direction_grad_sign;  // r1
  Tensor direction_rademacher; // r2
  std::vector<double> a, b, z; // row-major, a outer
};

// z(a,b) = CE(f(clamp(x + a*r1 + b*r2)), y) with r1 the input-gradient sign
// at x and r2 ~ Rademacher(0.5). resolution must be odd so (0,0) is a grid
// point.
LandscapeGrid landscape(const Params& params, const Tensor& x, int y,
                        const DomainBounds& bounds, double range, int resolution,
                        Rng& rng);

void write_landscape_csv(const LandscapeGrid& grid, std::ostream& out);

// White-box accuracy significantly above black-box accuracy flags masking.
bool masking_verdict(double pgd_acc, double blackbox_acc, double threshold = 0.08);

struct EpochWindowPoint {
  double fosc = 0.0;
  double clean_train_acc = 0.0;
  double w_grad_norm = 0.0;
};

// Window covers epochs e-1, e, e+1. True iff FOSC collapses from above the
// threshold to near zero while clean accuracy dips, and the weight gradient
// norm falls the epoch after.
bool self_healing_flag(const EpochWindowPoint& prev, const EpochWindowPoint& cur,
                       const EpochWindowPoint& next, double fosc_threshold);

}  // namespace tradeslab
