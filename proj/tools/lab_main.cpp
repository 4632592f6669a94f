#include <CLI11.hpp>

#include "tradeslab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tradeslab: TRADES adversarial training with gradient-masking "
               "instrumentation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "run", ckpt_path, out_path, attacks, dir;
  std::size_t sample_index = 0, calib_epochs = 5;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Override the training seed from the config")
        ->each([&](const std::string&) { seed_set = true; });
  };
  auto seed_opt = [&]() -> std::optional<std::uint64_t> {
    return seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;
  };

  auto* train = app.add_subcommand("train", "Train a model and write telemetry");
  train->add_option("--config", config_path, "Experiment config JSON")->required();
  train->add_option("--out", out_dir, "Output directory");
  add_seed(train);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with white- and "
                                          "black-box attacks");
  eval->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  eval->add_option("--config", config_path, "Experiment config JSON")->required();
  eval->add_option("--attacks", attacks, "Comma-separated: pgd,square (default both)");
  eval->add_option("--out", out_path, "Write the report JSON here too");
  add_seed(eval);

  auto* land = app.add_subcommand("landscape", "Write a loss-landscape grid CSV");
  land->add_option("--ckpt", ckpt_path, "Checkpoint file")->required();
  land->add_option("--config", config_path, "Experiment config JSON")->required();
  land->add_option("--index", sample_index, "Test-split sample index");
  land->add_option("--out", out_path, "Output CSV path")->required();
  add_seed(land);

  auto* report = app.add_subcommand("report", "Summarize a run's telemetry");
  report->add_option("--dir", dir, "Run directory containing epochs.csv")->required();

  auto* calib = app.add_subcommand("calibrate-fosc",
                                   "Short run reporting the FOSC distribution");
  calib->add_option("--config", config_path, "Experiment config JSON")->required();
  calib->add_option("--epochs", calib_epochs, "Number of calibration epochs");
  add_seed(calib);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : tradeslab::kExitUsage;
  }

  if (train->parsed()) return tradeslab::cmd_train(config_path, out_dir, seed_opt());
  if (eval->parsed())
    return tradeslab::cmd_eval(ckpt_path, config_path, attacks, out_path, seed_opt());
  if (land->parsed())
    return tradeslab::cmd_landscape(ckpt_path, config_path, sample_index, out_path,
                                    seed_opt());
  if (report->parsed()) return tradeslab::cmd_report(dir);
  if (calib->parsed())
    return tradeslab::cmd_calibrate_fosc(config_path, calib_epochs, seed_opt());
  return tradeslab::kExitUsage;
}
