#pragma once

#include <functional>
#include <optional>

#include "tradeslab/metrics.hpp"

namespace tradeslab {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  LossMode loss_mode = LossMode::Trades;
  double beta = 3.0;
  std::size_t epochs = 30;
  std::size_t batch_size = 256;
  double lr0 = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  std::vector<std::size_t> lr_decay_epochs = {100, 150};
  double lr_gamma = 0.1;
  AttackConfig attack;  // training adversary
  std::size_t val_attack_steps = 10;
  double fosc_threshold = 0.1;
  double noise_std = 0.1;
  std::size_t noise_batches = 10;
  std::uint64_t seed = 0;
  MlpSpec model;
  std::string config_digest;  // recorded into checkpoints

  // Test hook: replaces the epoch FOSC the guard sees. Not serialized.
  std::function<double(std::size_t epoch, double computed)> fosc_override;
};

void validate(const TrainConfig& cfg);

struct BatchTelemetry {
  std::size_t step = 0;  // global, strictly increasing
  double w_grad_norm = 0.0;
  double ce_norm = 0.0;
  double kl_norm = 0.0;
  double grad_cosine_similarity = 1.0;
};

struct EpochTelemetry {
  std::size_t epoch = 0;  // 1-based
  double lr = 0.0;
  double clean_train_acc = 0.0;
  double adv_train_acc = 0.0;
  double gap = 0.0;
  double clean_val_acc = 0.0;
  double pgd_val_acc = 0.0;
  double fosc_mean = 0.0;
  double sgcs_mean = 0.0;
  double w_grad_norm_mean = 0.0;
  double ce_norm_mean = 0.0;
  double kl_norm_mean = 0.0;
  double grad_cos_mean = 0.0;
  bool guard_triggered = false;
  std::size_t noise_batches_applied = 0;
  std::vector<BatchTelemetry> batches;
};

struct Checkpoint {
  MlpSpec spec;
  std::vector<std::pair<std::string, Tensor>> params;
  std::size_t epoch = 0;
  std::string config_digest;
  std::string rng_algorithm;
  double adv_acc = 0.0;
  double fosc = 0.0;
};

Checkpoint make_checkpoint(const Params& params, std::size_t epoch,
                           const std::string& config_digest, double adv_acc, double fosc);
Params params_of(const Checkpoint& ckpt);

// Binary layout: one line of JSON metadata terminated by '\n', then the raw
// little-endian float64 parameter buffers concatenated in declared order.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

struct GuardState {
  std::size_t add_noise_batches = 0;
  double best_adv_acc = 0.0;
  std::optional<Checkpoint> best;
  double fosc_threshold = 0.1;
};

struct SgdState {
  std::vector<double> velocity;
};

// Nesterov update: g <- grad + wd*w; v <- mu*v + g; w <- w - lr*(g + mu*v).
void sgd_step(Params& params, double lr, double momentum, double weight_decay,
              SgdState& state);

// lr0 multiplied by gamma once per decay epoch reached (1-based epochs).
double lr_at(std::size_t epoch, const TrainConfig& cfg);

struct TrainContext {
  Params params;
  SgdState opt;
  GuardState guard;
  std::size_t global_step = 0;
  Rng noise_rng;
};

EpochTelemetry train_epoch(TrainContext& ctx, const Dataset& train_ds,
                           const TrainConfig& cfg, std::size_t epoch);

// Computes validation metrics, applies the checkpoint-selection rule and
// arms the noise countdown when the epoch FOSC exceeds the threshold.
void validate_and_guard(TrainContext& ctx, const Dataset& val_ds, const TrainConfig& cfg,
                        std::size_t epoch, EpochTelemetry& telemetry);

struct FitResult {
  std::optional<Checkpoint> best;
  std::vector<EpochTelemetry> epochs;
  Params params;  // final parameters
};

FitResult fit(const TrainConfig& cfg, const Dataset& train_ds, const Dataset& val_ds);

}  // namespace tradeslab
