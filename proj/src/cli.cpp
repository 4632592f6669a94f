#include "tradeslab/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "tradeslab/telemetry.hpp"

namespace tradeslab {

namespace fs = std::filesystem;

namespace {

struct LoadedRun {
  ExperimentConfig cfg;
  Splits splits;
};

LoadedRun load_run(const std::string& config_path,
                   std::optional<std::uint64_t> seed_override) {
  LoadedRun run;
  run.cfg = parse_config_file(config_path);
  if (seed_override) {
    run.cfg.train.seed = *seed_override;
    run.cfg.train.config_digest = config_digest(run.cfg);
  }
  const Dataset ds = build_dataset(run.cfg.dataset);
  run.splits = split(ds, run.cfg.split_fractions, run.cfg.split_seed);
  return run;
}

Params load_matching_params(const std::string& ckpt_path, const Dataset& ds) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (ckpt.spec.input_dim != ds.dim())
    throw ConfigError("checkpoint input_dim does not match the dataset");
  if (ckpt.spec.num_classes != ds.num_classes)
    throw ConfigError("checkpoint num_classes does not match the dataset");
  return params_of(ckpt);
}

}  // namespace

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
  try {
    LoadedRun run = load_run(config_path, seed_override);
    fs::create_directories(out_dir);
    {
      std::ofstream out(fs::path(out_dir) / "resolved-config.json", std::ios::binary);
      out << resolved_json(run.cfg).dump(2) << '\n';
    }
    const FitResult result = fit(run.cfg.train, run.splits.train, run.splits.val);
    write_epochs_csv(result.epochs, (fs::path(out_dir) / "epochs.csv").string());
    write_batches_jsonl(result.epochs, (fs::path(out_dir) / "batches.jsonl").string());
    if (result.best) {
      save_checkpoint(*result.best, (fs::path(out_dir) / "best.ckpt").string());
    } else if (!result.epochs.empty()) {
      // No epoch passed the guard; persist the final parameters so the run is
      // still inspectable, flagged by epoch 0 metadata.
      save_checkpoint(make_checkpoint(result.params, 0, run.cfg.train.config_digest,
                                      0.0, 0.0),
                      (fs::path(out_dir) / "best.ckpt").string());
      std::cout << "warning: no checkpoint satisfied the FOSC guard; "
                   "best.ckpt holds the final parameters\n";
    }
    std::cout << "trained " << result.epochs.size() << " epochs; outputs in " << out_dir
              << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_eval(const std::string& ckpt_path, const std::string& config_path,
             const std::string& attacks, const std::string& out_path,
             std::optional<std::uint64_t> seed_override) {
  try {
    LoadedRun run = load_run(config_path, seed_override);
    const Dataset& test = run.splits.test;
    const Params params = load_matching_params(ckpt_path, test);
    const DomainBounds bounds = bounds_of(test);

    bool want_pgd = true, want_square = true;
    if (!attacks.empty()) {
      want_pgd = attacks.find("pgd") != std::string::npos;
      want_square = attacks.find("square") != std::string::npos;
      if (!want_pgd && !want_square) throw ConfigError("unknown attack list: " + attacks);
    }

    nlohmann::json report;
    report["checkpoint"] = ckpt_path;
    report["epsilon"] = run.cfg.train.attack.epsilon;
    report["clean_acc"] = clean_accuracy(params, test);

    double pgd_acc = -1.0, square_acc = -1.0;
    if (want_pgd) {
      AttackConfig atk = run.cfg.train.attack;
      atk.objective = AttackObjective::CrossEntropy;
      atk.steps = static_cast<int>(run.cfg.train.val_attack_steps);
      atk.random_start = true;
      pgd_acc = robust_accuracy(
          params, test,
          [&](const Tensor& x, const std::vector<int>& y, std::size_t bi) {
            AttackConfig local = atk;
            local.seed = mix_seed(run.cfg.train.seed, 0x4556414cULL, bi);
            return pgd(params, x, y, local, bounds).x_adv;
          },
          run.cfg.train.batch_size);
      report["pgd_acc"] = pgd_acc;
    }
    if (want_square) {
      square_acc = robust_accuracy(
          params, test,
          [&](const Tensor& x, const std::vector<int>& y, std::size_t bi) {
            Rng rng(mix_seed(run.cfg.train.seed, 0x53515541ULL, bi));
            return square_search(params, x, y, run.cfg.train.attack.epsilon,
                                 run.cfg.square_queries, rng, bounds)
                .x_adv;
          },
          run.cfg.train.batch_size);
      report["square_acc"] = square_acc;
      report["square_queries"] = run.cfg.square_queries;
    }
    if (want_pgd && want_square) {
      report["whitebox_blackbox_gap"] = pgd_acc - square_acc;
      report["masking_verdict"] =
          masking_verdict(pgd_acc, square_acc, run.cfg.masking_threshold);
      report["masking_threshold"] = run.cfg.masking_threshold;
    }

    const std::string text = report.dump(2);
    std::cout << text << '\n';
    if (!out_path.empty()) {
      std::ofstream out(out_path, std::ios::binary);
      out << text << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_landscape(const std::string& ckpt_path, const std::string& config_path,
                  std::size_t sample_index, const std::string& out_csv,
                  std::optional<std::uint64_t> seed_override) {
  try {
    LoadedRun run = load_run(config_path, seed_override);
    const Dataset& test = run.splits.test;
    const Params params = load_matching_params(ckpt_path, test);
    if (sample_index >= test.size())
      throw ConfigError("sample index out of range (test split has " +
                        std::to_string(test.size()) + " samples)");
    const std::size_t d = test.dim();
    Tensor x({1, d});
    std::copy_n(&test.features.data[sample_index * d], d, x.data.begin());
    const double range = run.cfg.landscape_range > 0.0 ? run.cfg.landscape_range
                                                       : run.cfg.train.attack.epsilon;
    Rng rng(mix_seed(run.cfg.train.seed, 0x4c414e44ULL, sample_index));
    const LandscapeGrid grid =
        landscape(params, x, test.labels[sample_index], bounds_of(test), range,
                  run.cfg.landscape_resolution, rng);
    std::ofstream out(out_csv, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + out_csv);
    write_landscape_csv(grid, out);
    std::cout << "wrote " << grid.z.size() << " grid points to " << out_csv << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_report(const std::string& telemetry_dir) {
  try {
    const fs::path dir(telemetry_dir);
    const fs::path epochs_path = dir / "epochs.csv";
    if (!fs::exists(epochs_path))
      throw ParseError("missing " + epochs_path.string());
    const auto epochs = read_epochs_csv(epochs_path.string());

    double threshold = 0.1;
    const fs::path cfg_path = dir / "resolved-config.json";
    if (fs::exists(cfg_path)) {
      std::ifstream in(cfg_path);
      nlohmann::json j;
      in >> j;
      threshold = j.at("train").at("fosc_threshold").get<double>();
    }

    std::vector<std::size_t> excursions, guard_epochs, healing, negative_gap;
    for (const auto& e : epochs) {
      if (e.fosc_mean > threshold) excursions.push_back(e.epoch);
      if (e.guard_triggered) guard_epochs.push_back(e.epoch);
      if (e.gap < 0.0) negative_gap.push_back(e.epoch);
    }
    for (std::size_t i = 1; i + 1 < epochs.size(); ++i) {
      const auto pt = [](const EpochTelemetry& e) {
        return EpochWindowPoint{e.fosc_mean, e.clean_train_acc, e.w_grad_norm_mean};
      };
      if (self_healing_flag(pt(epochs[i - 1]), pt(epochs[i]), pt(epochs[i + 1]), threshold))
        healing.push_back(epochs[i].epoch);
    }

    auto list = [](const std::vector<std::size_t>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? ", " : "") + std::to_string(v[i]);
      return s.empty() ? std::string("none") : s;
    };

    std::cout << "telemetry: " << epochs.size() << " epochs, FOSC threshold "
              << threshold << "\n";
    std::cout << "FOSC excursions (epochs): " << list(excursions) << "\n";
    std::cout << "guard activations (epochs): " << list(guard_epochs) << "\n";
    std::cout << "self-healing signatures (epochs): " << list(healing) << "\n";
    std::cout << "negative-gap epochs: " << list(negative_gap) << "\n";
    if (excursions.empty() && negative_gap.empty()) {
      std::cout << "verdict: no instability detected\n";
    } else {
      std::cout << "verdict: instability detected";
      if (!excursions.empty())
        std::cout << " (FOSC above threshold at epoch " << excursions.front() << ")";
      std::cout << "\n";
    }
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

int cmd_calibrate_fosc(const std::string& config_path, std::size_t epochs,
                       std::optional<std::uint64_t> seed_override) {
  try {
    LoadedRun run = load_run(config_path, seed_override);
    run.cfg.train.epochs = epochs;
    // Calibration observes the raw FOSC distribution; disable the guard.
    run.cfg.train.fosc_threshold = std::numeric_limits<double>::infinity();
    const FitResult result = fit(run.cfg.train, run.splits.train, run.splits.val);
    std::vector<double> foscs;
    for (const auto& e : result.epochs) foscs.push_back(e.fosc_mean);
    std::cout << "epoch FOSC means over " << foscs.size() << " epochs:\n";
    for (const auto& e : result.epochs)
      std::cout << "  epoch " << e.epoch << ": fosc=" << e.fosc_mean
                << " sgcs=" << e.sgcs_mean << " pgd_val_acc=" << e.pgd_val_acc << "\n";
    if (!foscs.empty()) {
      std::vector<double> sorted = foscs;
      std::sort(sorted.begin(), sorted.end());
      auto pct = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
      };
      std::cout << "min=" << sorted.front() << " p50=" << pct(0.5)
                << " p90=" << pct(0.9) << " max=" << sorted.back() << "\n";
      std::cout << "suggested threshold (3x median): " << 3.0 * pct(0.5) << "\n";
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace tradeslab
