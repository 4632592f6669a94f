#include "tradeslab/train.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "tradeslab/parallel.hpp"

namespace tradeslab {

namespace {

constexpr std::uint64_t kInitStream = 0x494e4954;   // "INIT"
constexpr std::uint64_t kNoiseStream = 0x4e4f4953;  // "NOIS"
constexpr std::uint64_t kTrainAtk = 0x5452414b;     // "TRAK"
constexpr std::uint64_t kValAtk = 0x56414c4b;       // "VALK"

std::vector<double> full_grad_flat(const Params& params, const Tensor& x_clean,
                                   const Tensor& x_adv, const std::vector<int>& y,
                                   double beta, LossMode mode) {
  Graph g;
  const LossNodes nodes = build_loss(g, params, x_clean, x_adv, y, beta, mode, true);
  g.backward(nodes.loss);
  return leaf_grads_flat(g, nodes.param_ids);
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (cfg.beta < 0.0) throw std::invalid_argument("TrainConfig: beta must be >= 0");
  if (cfg.lr0 <= 0.0) throw std::invalid_argument("TrainConfig: lr0 must be > 0");
  if (cfg.lr_gamma <= 0.0 || cfg.lr_gamma > 1.0)
    throw std::invalid_argument("TrainConfig: lr_gamma must be in (0,1]");
  if (cfg.batch_size == 0) throw std::invalid_argument("TrainConfig: batch_size must be > 0");
  if (cfg.noise_std < 0.0) throw std::invalid_argument("TrainConfig: noise_std must be >= 0");
  if (cfg.fosc_threshold < 0.0)
    throw std::invalid_argument("TrainConfig: fosc_threshold must be >= 0");
  validate(cfg.attack);
}

Checkpoint make_checkpoint(const Params& params, std::size_t epoch,
                           const std::string& config_digest, double adv_acc, double fosc) {
  Checkpoint ckpt;
  ckpt.spec = params.spec;
  for (const auto& p : params.items) ckpt.params.emplace_back(p.name, p.value);
  ckpt.epoch = epoch;
  ckpt.config_digest = config_digest;
  ckpt.rng_algorithm = std::string(Rng::kAlgorithm);
  ckpt.adv_acc = adv_acc;
  ckpt.fosc = fosc;
  return ckpt;
}

Params params_of(const Checkpoint& ckpt) {
  Params params;
  params.spec = ckpt.spec;
  for (const auto& [name, value] : ckpt.params) {
    Param p;
    p.name = name;
    p.value = value;
    p.grad.assign(value.size(), 0.0);
    params.items.push_back(std::move(p));
  }
  return params;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint layout assumes a little-endian host");
  nlohmann::json header;
  header["format"] = "tradeslab-ckpt-v1";
  header["spec"] = {{"input_dim", ckpt.spec.input_dim},
                    {"hidden_dims", ckpt.spec.hidden_dims},
                    {"num_classes", ckpt.spec.num_classes}};
  nlohmann::json plist = nlohmann::json::array();
  for (const auto& [name, value] : ckpt.params)
    plist.push_back({{"name", name}, {"shape", value.shape}});
  header["params"] = plist;
  header["epoch"] = ckpt.epoch;
  header["config_digest"] = ckpt.config_digest;
  header["rng_algorithm"] = ckpt.rng_algorithm;
  header["adv_acc"] = ckpt.adv_acc;
  header["fosc"] = ckpt.fosc;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  out << header.dump() << '\n';
  for (const auto& [name, value] : ckpt.params)
    out.write(reinterpret_cast<const char*>(value.data.data()),
              static_cast<std::streamsize>(value.data.size() * sizeof(double)));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_checkpoint: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("load_checkpoint: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("load_checkpoint: bad header: ") + e.what());
  }
  if (header.value("format", "") != "tradeslab-ckpt-v1")
    throw ParseError("load_checkpoint: unknown format");
  Checkpoint ckpt;
  try {
    ckpt.spec.input_dim = header.at("spec").at("input_dim").get<std::size_t>();
    ckpt.spec.hidden_dims = header.at("spec").at("hidden_dims").get<std::vector<std::size_t>>();
    ckpt.spec.num_classes = header.at("spec").at("num_classes").get<std::size_t>();
    ckpt.epoch = header.at("epoch").get<std::size_t>();
    ckpt.config_digest = header.at("config_digest").get<std::string>();
    ckpt.rng_algorithm = header.at("rng_algorithm").get<std::string>();
    ckpt.adv_acc = header.at("adv_acc").get<double>();
    ckpt.fosc = header.at("fosc").get<double>();
    for (const auto& pj : header.at("params")) {
      const auto name = pj.at("name").get<std::string>();
      const auto shape = pj.at("shape").get<Shape>();
      Tensor t(shape);
      in.read(reinterpret_cast<char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
      if (!in) throw ParseError("load_checkpoint: truncated parameter blob");
      ckpt.params.emplace_back(name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("load_checkpoint: bad header field: ") + e.what());
  }
  return ckpt;
}

void sgd_step(Params& params, double lr, double momentum, double weight_decay,
              SgdState& state) {
  const std::size_t total = params.total_size();
  if (state.velocity.empty()) state.velocity.assign(total, 0.0);
  if (state.velocity.size() != total)
    throw ContractError("sgd_step: velocity size mismatch");
  std::size_t off = 0;
  for (auto& p : params.items) {
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const double g = p.grad[j] + weight_decay * p.value.data[j];
      double& v = state.velocity[off + j];
      v = momentum * v + g;
      p.value.data[j] -= lr * (g + momentum * v);
    }
    off += p.value.size();
  }
}

double lr_at(std::size_t epoch, const TrainConfig& cfg) {
  double lr = cfg.lr0;
  for (auto d : cfg.lr_decay_epochs)
    if (epoch >= d) lr *= cfg.lr_gamma;
  return lr;
}

EpochTelemetry train_epoch(TrainContext& ctx, const Dataset& train_ds,
                           const TrainConfig& cfg, std::size_t epoch) {
  EpochTelemetry et;
  et.epoch = epoch;
  et.lr = lr_at(epoch, cfg);
  const auto bs = batches(train_ds, BatchPlan{std::min(cfg.batch_size, train_ds.size()),
                                              cfg.seed, epoch});
  const DomainBounds bounds = bounds_of(train_ds);
  double clean_acc_w = 0.0, adv_acc_w = 0.0;
  double wn = 0.0, cn = 0.0, kn = 0.0, gc = 0.0;
  std::size_t samples = 0;

  for (std::size_t bi = 0; bi < bs.size(); ++bi) {
    Tensor x = bs[bi].x;
    const std::vector<int>& y = bs[bi].y;
    const std::size_t b = y.size();

    if (ctx.guard.add_noise_batches > 0) {
      const std::size_t d = x.shape[1];
      for (std::size_t i = 0; i < x.size(); ++i) {
        x.data[i] += ctx.noise_rng.gaussian(0.0, cfg.noise_std);
        x.data[i] = std::clamp(x.data[i], bounds.lo[i % d], bounds.hi[i % d]);
      }
      --ctx.guard.add_noise_batches;
      ++et.noise_batches_applied;
    }

    AttackConfig atk = cfg.attack;
    atk.seed = mix_seed(mix_seed(cfg.seed, kTrainAtk), epoch, bi);
    Tensor x_adv;
    if (cfg.loss_mode == LossMode::Trades) {
      atk.objective = AttackObjective::KlVsCleanLogits;
      x_adv = tpgd(ctx.params, x, atk, bounds).x_adv;
    } else {
      atk.objective = AttackObjective::CrossEntropy;
      atk.random_start = true;
      x_adv = pgd(ctx.params, x, y, atk, bounds).x_adv;
    }

    Graph g;
    const LossNodes nodes = build_loss(g, ctx.params, x, x_adv, y, cfg.beta,
                                       cfg.loss_mode, true);
    const double loss = g.scalar_value(nodes.loss);
    if (!std::isfinite(loss))
      throw NumericError("non-finite loss at epoch " + std::to_string(epoch) +
                         ", batch " + std::to_string(bi));
    clean_acc_w += accuracy_of_logits(g.value(nodes.clean_logits), y) * static_cast<double>(b);
    adv_acc_w += accuracy_of_logits(g.value(nodes.adv_logits), y) * static_cast<double>(b);

    g.backward(nodes.loss);
    const std::vector<double> full = leaf_grads_flat(g, nodes.param_ids);
    g.zero_grad();
    g.backward(nodes.ce_term);
    const std::vector<double> ce = leaf_grads_flat(g, nodes.param_ids);
    std::vector<double> kl(full.size(), 0.0);
    if (nodes.kl_term >= 0) {
      g.zero_grad();
      g.backward(nodes.kl_term);
      kl = leaf_grads_flat(g, nodes.param_ids);
    }

    unflatten_grads(ctx.params, full);
    sgd_step(ctx.params, et.lr, cfg.momentum, cfg.weight_decay, ctx.opt);

    // Same batch, same adversarial examples, updated parameters: the cosine
    // isolates the effect of the parameter step.
    const std::vector<double> after =
        full_grad_flat(ctx.params, x, x_adv, y, cfg.beta, cfg.loss_mode);

    BatchTelemetry bt;
    bt.step = ++ctx.global_step;
    bt.w_grad_norm = l2_norm(full);
    bt.ce_norm = l2_norm(ce);
    bt.kl_norm = l2_norm(kl);
    bt.grad_cosine_similarity = cosine_similarity(full, after);
    et.batches.push_back(bt);

    const double w = static_cast<double>(b);
    wn += bt.w_grad_norm * w;
    cn += bt.ce_norm * w;
    kn += bt.kl_norm * w;
    gc += bt.grad_cosine_similarity * w;
    samples += b;
  }

  const double inv = samples > 0 ? 1.0 / static_cast<double>(samples) : 0.0;
  et.clean_train_acc = clean_acc_w * inv;
  et.adv_train_acc = adv_acc_w * inv;
  et.gap = gap(et.clean_train_acc, et.adv_train_acc);
  et.w_grad_norm_mean = wn * inv;
  et.ce_norm_mean = cn * inv;
  et.kl_norm_mean = kn * inv;
  et.grad_cos_mean = gc * inv;
  return et;
}

void validate_and_guard(TrainContext& ctx, const Dataset& val_ds, const TrainConfig& cfg,
                        std::size_t epoch, EpochTelemetry& et) {
  const DomainBounds bounds = bounds_of(val_ds);
  const auto vb = batches(val_ds, BatchPlan{std::min(cfg.batch_size, val_ds.size()),
                                            mix_seed(cfg.seed, kValAtk), 0});
  std::vector<AttackTrace> traces(vb.size());
  parallel_for(vb.size(), [&](std::size_t bi) {
    AttackConfig atk = cfg.attack;
    atk.objective = AttackObjective::CrossEntropy;
    atk.steps = static_cast<int>(cfg.val_attack_steps);
    atk.random_start = true;
    atk.seed = mix_seed(mix_seed(cfg.seed, kValAtk), epoch, bi);
    traces[bi] = pgd(ctx.params, vb[bi].x, vb[bi].y, atk, bounds);
  });

  double fosc_sum = 0.0;
  std::size_t correct = 0, total = 0;
  for (std::size_t bi = 0; bi < vb.size(); ++bi) {
    const FoscReport report = fosc(traces[bi], cfg.attack.epsilon);
    for (double v : report.per_sample) fosc_sum += v;
    const std::vector<int> pred = predict(ctx.params, traces[bi].x_adv);
    for (std::size_t r = 0; r < pred.size(); ++r)
      if (pred[r] == vb[bi].y[r]) ++correct;
    total += vb[bi].y.size();
  }
  et.clean_val_acc = clean_accuracy(ctx.params, val_ds);
  et.pgd_val_acc = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  const double fosc_computed = total > 0 ? fosc_sum / static_cast<double>(total) : 0.0;
  et.sgcs_mean = cfg.val_attack_steps >= 2 ? sgcs(traces) : 0.0;
  et.fosc_mean = cfg.fosc_override ? cfg.fosc_override(epoch, fosc_computed) : fosc_computed;

  // Checkpoint rule: best adversarial accuracy, but never from an epoch whose
  // FOSC exceeds the threshold.
  if (et.pgd_val_acc > ctx.guard.best_adv_acc &&
      et.fosc_mean <= ctx.guard.fosc_threshold) {
    ctx.guard.best = make_checkpoint(ctx.params, epoch, cfg.config_digest,
                                     et.pgd_val_acc, et.fosc_mean);
    ctx.guard.best_adv_acc = et.pgd_val_acc;
  }
  if (et.fosc_mean > ctx.guard.fosc_threshold) {
    ctx.guard.add_noise_batches = cfg.noise_batches;
    et.guard_triggered = true;
  }
}

FitResult fit(const TrainConfig& cfg, const Dataset& train_ds, const Dataset& val_ds) {
  validate(cfg);
  TrainConfig resolved = cfg;
  if (resolved.model.input_dim == 0) {
    resolved.model.input_dim = train_ds.dim();
    if (resolved.model.hidden_dims.empty()) resolved.model.hidden_dims = {64, 64};
    resolved.model.num_classes = train_ds.num_classes;
  }
  Rng init_rng(mix_seed(resolved.seed, kInitStream));
  TrainContext ctx{init_mlp(resolved.model, init_rng), SgdState{}, GuardState{},
                   0, Rng(mix_seed(resolved.seed, kNoiseStream))};
  ctx.guard.fosc_threshold = resolved.fosc_threshold;

  FitResult result;
  for (std::size_t epoch = 1; epoch <= resolved.epochs; ++epoch) {
    EpochTelemetry et = train_epoch(ctx, train_ds, resolved, epoch);
    validate_and_guard(ctx, val_ds, resolved, epoch, et);
    result.epochs.push_back(std::move(et));
  }
  result.best = std::move(ctx.guard.best);
  result.params = std::move(ctx.params);
  return result;
}

}  // namespace tradeslab
