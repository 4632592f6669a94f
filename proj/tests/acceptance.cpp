// Acceptance gate: ten checks, one pass/fail line each. Exit code is the
// number of failed checks. Tolerances are pinned in-line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tradeslab/cli.hpp"
#include "tradeslab/telemetry.hpp"

using namespace tradeslab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", id, what,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!ok) ++failures;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Smallest |pre-activation| feeding a relu anywhere in the network; finite
// differences are only valid when every unit is clear of the kink.
double relu_margin(const Params& p, const Tensor& x) {
  double margin = 1e300;
  const std::size_t layers = p.spec.hidden_dims.size() + 1;
  Tensor h = x;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& w = p.items[2 * l].value;
    const Tensor& bias = p.items[2 * l + 1].value;
    const std::size_t m = h.shape[0], k = h.shape[1], n = w.shape[1];
    Tensor z({m, n});
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double acc = bias.data[j];
        for (std::size_t q = 0; q < k; ++q) acc += h.data[i * k + q] * w.data[q * n + j];
        z.data[i * n + j] = acc;
      }
    if (l + 1 < layers) {
      for (double v : z.data) margin = std::min(margin, std::abs(v));
      for (auto& v : z.data) v = v > 0.0 ? v : 0.0;
    }
    h = std::move(z);
  }
  return margin;
}

// ---------------------------------------------------------------------------
// 1. Gradient oracle: >= 50 random MLPs (<= 3 hidden layers, width <= 16);
//    parameter and input gradients of CE, KL and the full combined loss match
//    central finite differences with max relative error < 1e-4.
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng master(1001);
  double worst = 0.0;
  int models = 0;
  const double beta = 3.0;

  for (int m = 0; m < 50; ++m) {
    const std::size_t depth = 1 + master.next_u64() % 3;
    MlpSpec spec;
    spec.input_dim = 2 + master.next_u64() % 5;             // 2..6
    spec.num_classes = 2 + master.next_u64() % 3;           // 2..4
    for (std::size_t l = 0; l < depth; ++l)
      spec.hidden_dims.push_back(2 + master.next_u64() % 15);  // 2..16
    Rng init = master.fork(100 + m);
    const Params p = init_mlp(spec, init);

    const std::size_t b = 2;
    Rng xr = master.fork(200 + m);
    Tensor xc, xa;
    // Resample until every relu unit is well clear of its kink, where the
    // central-difference oracle is ill-defined.
    for (int attempt = 0; attempt < 200; ++attempt) {
      xc = sample_gaussian(xr, {b, spec.input_dim}, 0.5, 0.15);
      xa = xc;
      for (auto& v : xa.data) v += xr.uniform(-0.05, 0.05);
      if (relu_margin(p, xc) > 1e-3 && relu_margin(p, xa) > 1e-3) break;
    }
    std::vector<int> y(b);
    for (auto& label : y) label = static_cast<int>(xr.next_u64() % spec.num_classes);

    // One graph with all three scalar roots, inputs and params differentiable.
    struct Roots {
      std::vector<double> params_g, xc_g, xa_g;
    };
    const auto grads_of = [&](int which) {
      Graph g;
      const auto ids = register_params(g, p, true);
      const int nx = g.leaf(xc, true);
      const int na = g.leaf(xa, true);
      const int lc = mlp_forward_node(g, spec, ids, nx);
      const int la = mlp_forward_node(g, spec, ids, na);
      const int ce = cross_entropy_node(g, lc, y);
      const int kl = kl_divergence_node(g, lc, la);
      const int full = g.add(ce, g.scale(kl, beta));
      g.backward(which == 0 ? ce : which == 1 ? kl : full);
      Roots r;
      r.params_g = leaf_grads_flat(g, ids);
      r.xc_g.assign(g.grad(nx).begin(), g.grad(nx).end());
      r.xa_g.assign(g.grad(na).begin(), g.grad(na).end());
      return r;
    };
    const auto value_of = [&](int which, const std::vector<double>& pf,
                              const std::vector<double>& xcf,
                              const std::vector<double>& xaf) {
      Params q = p;
      unflatten_values(q, pf);
      Graph g;
      const auto ids = register_params(g, q, false);
      const int nx = g.leaf(Tensor(xc.shape, xcf));
      const int na = g.leaf(Tensor(xa.shape, xaf));
      const int lc = mlp_forward_node(g, spec, ids, nx);
      const int la = mlp_forward_node(g, spec, ids, na);
      const int ce = cross_entropy_node(g, lc, y);
      if (which == 0) return g.scalar_value(ce);
      const int kl = kl_divergence_node(g, lc, la);
      if (which == 1) return g.scalar_value(kl);
      return g.scalar_value(g.add(ce, g.scale(kl, beta)));
    };

    const std::vector<double> pf = flatten_values(p);
    for (int which = 0; which < 3; ++which) {
      const Roots got = grads_of(which);
      const auto fd_p = oracles::finite_diff(
          [&](const std::vector<double>& v) { return value_of(which, v, xc.data, xa.data); },
          pf);
      const auto fd_xc = oracles::finite_diff(
          [&](const std::vector<double>& v) { return value_of(which, pf, v, xa.data); },
          xc.data);
      const auto fd_xa = oracles::finite_diff(
          [&](const std::vector<double>& v) { return value_of(which, pf, xc.data, v); },
          xa.data);
      worst = std::max(worst, oracles::max_rel_error(got.params_g, fd_p));
      worst = std::max(worst, oracles::max_rel_error(got.xc_g, fd_xc));
      worst = std::max(worst, oracles::max_rel_error(got.xa_g, fd_xa));
    }
    ++models;
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%d models, max rel err %.3g, %.1fs", models,
                worst, elapsed_s(t0));
  report(1, "gradients match finite differences (< 1e-4)",
         models >= 50 && worst < 1e-4 && elapsed_s(t0) < 60.0, detail);
}

// ---------------------------------------------------------------------------
// 2. FOSC closed form equals corner enumeration within 1e-9 on 200 random
//    instances (d <= 12); zero on stationary and boundary-aligned cases.
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2002);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + rng.next_u64() % 11;
    const double eps = rng.uniform(0.01, 0.2);
    std::vector<double> x(d), xa(d), g(d);
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = rng.uniform(0.2, 0.8);
      xa[j] = x[j] + rng.uniform(-eps, eps);
      g[j] = rng.uniform(-2.0, 2.0);
    }
    const double got = fosc_closed_form(x, xa, g, eps);
    const double want = oracles::fosc_corner_enumeration(x, xa, g, eps);
    worst = std::max(worst, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }

  // Stationary point: zero gradient.
  const std::vector<double> x{0.5, 0.5}, xa{0.52, 0.47}, zero{0.0, 0.0};
  const double stationary = fosc_closed_form(x, xa, zero, 0.05);
  // Boundary-aligned: x_adv = x + eps * sign(grad).
  const std::vector<double> g{1.5, -0.75};
  const std::vector<double> aligned{0.55, 0.45};
  const double boundary = fosc_closed_form(x, aligned, g, 0.05);

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max dev %.3g, stationary %.3g, boundary %.3g",
                worst, stationary, boundary);
  report(2, "FOSC closed form vs corner enumeration (<= 1e-9)",
         worst <= 1e-9 && stationary == 0.0 && std::abs(boundary) <= 1e-12 &&
             elapsed_s(t0) < 10.0,
         detail);
}

// ---------------------------------------------------------------------------
// 3. 1-D relation: with k*alpha > eps and no random start, any smooth trace
//    with FOSC > 1e-6 must have SGCS < 1 - 1e-9.
void criterion_3() {
  const auto t0 = std::chrono::steady_clock::now();
  const double eps = 0.1, alpha = 0.02;
  const int steps = 10;  // k*alpha = 0.2 > eps
  const DomainBounds unit{{0.0}, {1.0}};
  AttackConfig cfg;
  cfg.epsilon = eps;
  cfg.alpha = alpha;
  cfg.steps = steps;

  Rng rng(3003);
  int fixtures = 0, exercised = 0;
  bool ok = true;
  for (int trial = 0; trial < 24; ++trial) {
    const double x0 = 0.5;
    std::function<double(double)> grad1d;
    if (trial % 2 == 0) {
      // Concave quadratic with a random peak in or near the ball.
      const double c = x0 + rng.uniform(-2.0 * eps, 2.0 * eps);
      const double a = rng.uniform(0.5, 3.0);
      grad1d = [c, a](double v) { return -2.0 * a * (v - c); };
    } else {
      // Smooth sinusoid.
      const double omega = rng.uniform(5.0, 25.0);
      const double phase = rng.uniform(0.0, 6.28318);
      grad1d = [omega, phase](double v) { return std::cos(omega * v + phase); };
    }
    const InputGradFn grad_fn = [&](const Tensor& xi) {
      Tensor g(xi.shape);
      for (std::size_t i = 0; i < xi.size(); ++i) g.data[i] = grad1d(xi.data[i]);
      return g;
    };
    const Tensor x({1, 1}, {x0});
    const AttackTrace tr = sign_ascent(grad_fn, x, x, cfg, unit);
    const double f = fosc(tr, eps).mean;
    const double s = sgcs({tr});
    ++fixtures;
    if (f > 1e-6) {
      ++exercised;
      if (!(s < 1.0 - 1e-9)) ok = false;
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%d fixtures, %d with FOSC > 1e-6", fixtures,
                exercised);
  report(3, "nonzero FOSC implies sign-gradient disagreement (SGCS < 1)",
         ok && fixtures >= 20 && exercised >= 5 && elapsed_s(t0) < 10.0, detail);
}

// ---------------------------------------------------------------------------
// 4. Gradient-telemetry identities over 50 random batches: full = ce + kl
//    within 1e-9; norm triangle inequality; cosine = 1 under an lr = 0 step;
//    beta = 0 zeroes the kl norm.
void criterion_4() {
  Rng master(4004);
  bool sum_ok = true, tri_ok = true, beta0_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    MlpSpec spec{3 + master.next_u64() % 4, {8}, 2 + master.next_u64() % 3};
    Rng init = master.fork(trial);
    const Params p = init_mlp(spec, init);
    Rng xr = master.fork(1000 + trial);
    const std::size_t b = 1 + master.next_u64() % 8;
    const Tensor xc = sample_gaussian(xr, {b, spec.input_dim}, 0.5, 0.2);
    Tensor xa = xc;
    for (auto& v : xa.data) v += xr.uniform(-0.05, 0.05);
    std::vector<int> y(b);
    for (auto& label : y) label = static_cast<int>(xr.next_u64() % spec.num_classes);

    const TermGrads t = loss_term_grads(p, xc, xa, y, 3.0, LossMode::Trades);
    for (std::size_t i = 0; i < t.full.size(); ++i) {
      const double want = t.ce[i] + t.kl[i];
      if (std::abs(t.full[i] - want) > 1e-9 * std::max(1.0, std::abs(want)))
        sum_ok = false;
    }
    if (l2_norm(t.full) > l2_norm(t.ce) + l2_norm(t.kl) + 1e-9) tri_ok = false;

    const TermGrads z = loss_term_grads(p, xc, xa, y, 0.0, LossMode::Trades);
    if (l2_norm(z.kl) != 0.0) beta0_ok = false;
  }

  // lr = 0: the optimizer step is a no-op, so the re-evaluated gradient is the
  // same vector and the reported cosine must be 1.
  Rng drng(4104);
  const Dataset ds = gen_blobs(2, 24, 4, 0.1, drng);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 16;
  cfg.lr0 = 1e-300;  // validation requires > 0; numerically a zero step
  cfg.momentum = 0.0;
  cfg.weight_decay = 0.0;
  cfg.attack.epsilon = 0.05;
  cfg.attack.alpha = 0.02;
  cfg.attack.steps = 2;
  cfg.val_attack_steps = 2;
  cfg.model = MlpSpec{4, {8}, 2};
  Rng init(5);
  TrainContext ctx{init_mlp(cfg.model, init), SgdState{}, GuardState{}, 0, Rng(6)};
  const EpochTelemetry et = train_epoch(ctx, ds, cfg, 1);
  bool cos_ok = !et.batches.empty();
  for (const auto& bt : et.batches)
    if (std::abs(bt.grad_cosine_similarity - 1.0) > 1e-12) cos_ok = false;

  report(4, "telemetry identities (sum, triangle, lr=0 cosine, beta=0)",
         sum_ok && tri_ok && beta0_ok && cos_ok);
}

// ---------------------------------------------------------------------------
// 5. Guard mechanics: an injected over-threshold epoch FOSC noises exactly
//    min(10, #batches) leading batches of the next epoch, and an
//    over-threshold epoch is never checkpointed even at maximum accuracy.
void criterion_5() {
  bool ok = true;
  std::string detail;

  {  // Small epoch: 3 batches -> all 3 noised.
    Rng drng(5005);
    const Dataset ds = gen_blobs(2, 24, 4, 0.1, drng);  // 48 samples / 16 = 3 batches
    Rng vrng(5006);
    const Dataset val = gen_blobs(2, 12, 4, 0.1, vrng);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.attack.epsilon = 0.05;
    cfg.attack.alpha = 0.02;
    cfg.attack.steps = 2;
    cfg.val_attack_steps = 2;
    cfg.fosc_override = [](std::size_t epoch, double) { return epoch == 1 ? 0.2 : 0.01; };
    const FitResult res = fit(cfg, ds, val);
    if (!(res.epochs[0].guard_triggered && res.epochs[1].noise_batches_applied == 3)) {
      ok = false;
      detail += "short-epoch noise count wrong; ";
    }
  }
  {  // Long epoch: 12 batches -> exactly 10 noised.
    Rng drng(5007);
    const Dataset ds = gen_blobs(2, 96, 4, 0.1, drng);  // 192 samples / 16 = 12 batches
    Rng vrng(5008);
    const Dataset val = gen_blobs(2, 12, 4, 0.1, vrng);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 16;
    cfg.attack.epsilon = 0.05;
    cfg.attack.alpha = 0.02;
    cfg.attack.steps = 2;
    cfg.val_attack_steps = 2;
    cfg.fosc_override = [](std::size_t epoch, double) { return epoch == 1 ? 0.2 : 0.01; };
    const FitResult res = fit(cfg, ds, val);
    if (!(res.epochs[1].noise_batches_applied == 10)) {
      ok = false;
      detail += "capped noise count wrong; ";
    }
  }
  {  // Checkpoint exclusion with the rejected epoch at maximum accuracy.
    Dataset val;
    val.features = Tensor({4, 2}, {0.9, 0.1, 0.9, 0.1, 0.1, 0.9, 0.1, 0.9});
    val.labels = {0, 0, 1, 1};
    val.domain_lo = {0.0, 0.0};
    val.domain_hi = {1.0, 1.0};
    val.num_classes = 2;

    Params strong;  // identity logits: perfect accuracy, margin 0.8 >> eps
    strong.spec = MlpSpec{2, {2}, 2};
    strong.items = {
        {"w0", Tensor({2, 2}, {1, 0, 0, 1}), {}},
        {"b0", Tensor({2}, {0, 0}), {}},
        {"w1", Tensor({2, 2}, {1, 0, 0, 1}), {}},
        {"b1", Tensor({2}, {0, 0}), {}},
    };
    Params weak = strong;  // constant logits: 50% accuracy
    weak.items[2].value = Tensor({2, 2}, {0, 0, 0, 0});

    TrainConfig cfg;
    cfg.attack.epsilon = 0.05;
    cfg.attack.alpha = 0.02;
    cfg.attack.steps = 2;
    cfg.val_attack_steps = 2;
    cfg.fosc_override = [](std::size_t epoch, double) { return epoch == 1 ? 0.01 : 0.2; };

    TrainContext ctx{weak, SgdState{}, GuardState{}, 0, Rng(1)};
    ctx.guard.fosc_threshold = cfg.fosc_threshold;
    EpochTelemetry e1;
    validate_and_guard(ctx, val, cfg, 1, e1);

    ctx.params = strong;
    EpochTelemetry e2;
    validate_and_guard(ctx, val, cfg, 2, e2);

    const bool acc_max = e2.pgd_val_acc > e1.pgd_val_acc && e2.pgd_val_acc == 1.0;
    const bool excluded = ctx.guard.best && ctx.guard.best->epoch == 1;
    const bool armed = e2.guard_triggered && ctx.guard.add_noise_batches == 10;
    if (!(acc_max && excluded && armed)) {
      ok = false;
      detail += "checkpoint exclusion failed; ";
    }
  }
  report(5, "stability guard noise count and checkpoint exclusion", ok, detail);
}

// ---------------------------------------------------------------------------
// 6. Masking verdict fixtures: (0.2872, 0.1215) flags masking at the 8%
//    threshold; (0.2441, 0.2426) does not.
void criterion_6() {
  const bool unstable = masking_verdict(0.2872, 0.1215, 0.08);
  const bool regular = masking_verdict(0.2441, 0.2426, 0.08);
  report(6, "masking verdict fixtures (>= 8% white/black-box gap)",
         unstable && !regular);
}

// ---------------------------------------------------------------------------
// 7. Attack feasibility: >= 1e4 per-sample traces across pgd/tpgd/fgsm/square
//    all stay inside the epsilon ball and the domain; fgsm is bit-identical
//    to single-step pgd with alpha = epsilon.
void criterion_7() {
  const auto t0 = std::chrono::steady_clock::now();
  const MlpSpec spec{8, {8}, 3};
  Rng prng(7007);
  const Params p = init_mlp(spec, prng);
  const DomainBounds bounds{std::vector<double>(8, 0.0), std::vector<double>(8, 1.0)};
  const double eps = 0.08;

  Rng rng(7008);
  std::size_t traces = 0;
  bool feasible = true, identical = true;
  const auto check_trace = [&](const AttackTrace& tr) {
    for (const Tensor* t : {&tr.x_start, &tr.x_adv}) {
      for (std::size_t i = 0; i < t->size(); ++i) {
        const double dv = std::abs(t->data[i] - tr.x_clean.data[i]);
        if (dv > eps + 1e-12 || t->data[i] < -1e-12 || t->data[i] > 1.0 + 1e-12)
          feasible = false;
      }
    }
    for (const Tensor& it : tr.iterates)
      for (std::size_t i = 0; i < it.size(); ++i) {
        const double dv = std::abs(it.data[i] - tr.x_clean.data[i]);
        if (dv > eps + 1e-12 || it.data[i] < -1e-12 || it.data[i] > 1.0 + 1e-12)
          feasible = false;
      }
    traces += tr.x_clean.shape[0];
  };

  for (int round = 0; round < 34; ++round) {
    const std::size_t b = 100;
    Tensor x = sample_gaussian(rng, {b, 8}, 0.5, 0.25);
    for (auto& v : x.data) v = std::clamp(v, 0.0, 1.0);
    std::vector<int> y(b);
    for (auto& label : y) label = static_cast<int>(rng.next_u64() % 3);

    AttackConfig pc;
    pc.epsilon = eps;
    pc.alpha = 0.02;
    pc.steps = 5;
    pc.random_start = true;
    pc.seed = mix_seed(7100, round);
    check_trace(pgd(p, x, y, pc, bounds));

    AttackConfig tc = pc;
    tc.objective = AttackObjective::KlVsCleanLogits;
    tc.random_start = false;
    check_trace(tpgd(p, x, tc, bounds));

    AttackConfig fc;
    fc.epsilon = eps;
    fc.alpha = 0.02;
    check_trace(fgsm(p, x, y, fc, bounds));

    // Bit-exact identity against single-step pgd.
    AttackConfig one;
    one.epsilon = eps;
    one.alpha = eps;
    one.steps = 1;
    one.random_start = false;
    const AttackTrace a = fgsm(p, x, y, fc, bounds);
    const AttackTrace b2 = pgd(p, x, y, one, bounds);
    if (a.x_adv.data != b2.x_adv.data || a.grad_signs[0].data != b2.grad_signs[0].data)
      identical = false;
  }
  {  // Square search feasibility on one batch.
    Tensor x = sample_gaussian(rng, {100, 8}, 0.5, 0.25);
    for (auto& v : x.data) v = std::clamp(v, 0.0, 1.0);
    std::vector<int> y(100);
    for (auto& label : y) label = static_cast<int>(rng.next_u64() % 3);
    Rng srng(7200);
    const SquareResult res = square_search(p, x, y, eps, 40, srng, bounds);
    for (std::size_t i = 0; i < res.x_adv.size(); ++i) {
      const double dv = std::abs(res.x_adv.data[i] - x.data[i]);
      if (dv > eps + 1e-12 || res.x_adv.data[i] < -1e-12 || res.x_adv.data[i] > 1.0 + 1e-12)
        feasible = false;
    }
    traces += 100;
  }

  char detail[128];
  std::snprintf(detail, sizeof(detail), "%zu traces, %.1fs", traces, elapsed_s(t0));
  report(7, "attack iterates feasible; fgsm == pgd-1 bit-exact",
         feasible && identical && traces >= 10000, detail);
}

// ---------------------------------------------------------------------------
// 8. End-to-end smoke on the default synthetic task (20 classes, 5000 points,
//    32 dims): combined loss beta=3, eps=0.05, 30 epochs. Thresholds frozen
//    from the committed reference run (clean 1.00, robust 1.00) minus the 2%
//    re-run tolerance. Budget: 5 minutes.
void criterion_8(const fs::path& tmp) {
  const auto t0 = std::chrono::steady_clock::now();
  const char* config = R"({
  "dataset": {"type": "blobs", "classes": 20, "per_class": 250, "dim": 32, "spread": 0.1, "seed": 1},
  "train": {
    "loss_mode": "trades",
    "beta": 3.0,
    "epochs": 30,
    "batch_size": 256,
    "lr0": 0.1,
    "seed": 0,
    "attack": {"epsilon": 0.05, "alpha": 0.00784313725490196, "steps": 10},
    "val_attack_steps": 10
  }
})";
  const fs::path cfg = tmp / "smoke-config.json";
  std::ofstream(cfg, std::ios::binary) << config;
  const fs::path out = tmp / "smoke-run";
  const int rc = cmd_train(cfg.string(), out.string());
  bool ok = rc == kExitOk;
  double clean = 0.0, robust = 0.0;
  if (ok) {
    const auto epochs = read_epochs_csv((out / "epochs.csv").string());
    ok = epochs.size() == 30;
    if (ok) {
      clean = epochs.back().clean_val_acc;
      robust = epochs.back().pgd_val_acc;
      ok = clean >= 0.98 && robust >= 0.98;  // frozen baseline 1.00 / 1.00, -2%
    }
  }
  const double secs = elapsed_s(t0);
  char detail[160];
  std::snprintf(detail, sizeof(detail), "clean %.4f (>= 0.98), pgd-10 %.4f (>= 0.98), %.0fs",
                clean, robust, secs);
  report(8, "end-to-end training reaches the frozen baseline", ok && secs < 300.0, detail);
}

// ---------------------------------------------------------------------------
// 9. Determinism: identical config and seed give byte-identical epochs.csv,
//    batches.jsonl and checkpoint files.
void criterion_9(const fs::path& tmp) {
  const char* config = R"({
  "dataset": {"type": "blobs", "classes": 5, "per_class": 40, "dim": 8, "spread": 0.1, "seed": 3},
  "train": {
    "epochs": 3, "batch_size": 32, "lr0": 0.05, "seed": 11,
    "hidden_dims": [16],
    "attack": {"epsilon": 0.05, "alpha": 0.02, "steps": 3},
    "val_attack_steps": 3
  }
})";
  const fs::path cfg = tmp / "det-config.json";
  std::ofstream(cfg, std::ios::binary) << config;
  const fs::path a = tmp / "det-a", b = tmp / "det-b";
  bool ok = cmd_train(cfg.string(), a.string()) == kExitOk &&
            cmd_train(cfg.string(), b.string()) == kExitOk;
  if (ok)
    for (const char* f : {"epochs.csv", "batches.jsonl", "best.ckpt"})
      if (slurp(a / f) != slurp(b / f)) ok = false;
  report(9, "byte-identical telemetry and checkpoints across reruns", ok);
}

// ---------------------------------------------------------------------------
// 10. LR schedule: 0.1 / 0.01 / 0.001 at epochs 99 / 100 / 150.
void criterion_10() {
  TrainConfig cfg;
  cfg.lr0 = 0.1;
  cfg.lr_decay_epochs = {100, 150};
  cfg.lr_gamma = 0.1;
  const bool ok = std::abs(lr_at(99, cfg) - 0.1) < 1e-15 &&
                  std::abs(lr_at(100, cfg) - 0.01) < 1e-15 &&
                  std::abs(lr_at(150, cfg) - 0.001) < 1e-15;
  report(10, "learning-rate schedule hits 0.1/0.01/0.001 at 99/100/150", ok);
}

}  // namespace

int main() {
  const fs::path tmp = fs::temp_directory_path() / "tradeslab-acceptance";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  // The pass/fail lines go through printf; silence command-level std::cout
  // chatter from the CLI entry points so only the verdicts appear.
  std::ostringstream sink;
  std::streambuf* old = std::cout.rdbuf(sink.rdbuf());

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8(tmp);
  criterion_9(tmp);
  criterion_10();

  std::cout.rdbuf(old);

  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures;
}
