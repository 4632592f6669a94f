#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tradeslab/cli.hpp"
#include "tradeslab/telemetry.hpp"

using namespace tradeslab;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string small_config_text() {
  return R"({
  "dataset": {"type": "blobs", "classes": 3, "per_class": 30, "dim": 6, "spread": 0.08, "seed": 5},
  "train": {
    "epochs": 2, "batch_size": 32, "lr0": 0.05, "seed": 7,
    "hidden_dims": [8],
    "attack": {"epsilon": 0.05, "alpha": 0.02, "steps": 2},
    "val_attack_steps": 2
  },
  "eval": {"square_queries": 40}
})";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path path = dir / "config.json";
  std::ofstream out(path, std::ios::binary);
  out << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs fn with std::cout captured.
template <typename F>
std::string capture_stdout(F&& fn) {
  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  fn();
  std::cout.rdbuf(old);
  return captured.str();
}

}  // namespace

TEST_CASE("config parsing and digests") {
  const nlohmann::json base = nlohmann::json::parse(small_config_text());
  SUBCASE("valid config parses with defaults filled in") {
    const ExperimentConfig cfg = parse_config_json(base);
    CHECK(cfg.train.epochs == 2);
    CHECK(cfg.train.beta == 3.0);  // default
    CHECK(cfg.square_queries == 40);
    CHECK(cfg.masking_threshold == 0.08);
    CHECK(cfg.train.config_digest.size() == 16);
  }
  SUBCASE("unknown keys are rejected with their path") {
    nlohmann::json bad = base;
    bad["train"]["bogus"] = 1;
    CHECK_THROWS_WITH_AS(parse_config_json(bad), doctest::Contains("train.bogus"),
                         ConfigError);
    nlohmann::json bad2 = base;
    bad2["train"]["attack"]["oops"] = 1;
    CHECK_THROWS_WITH_AS(parse_config_json(bad2), doctest::Contains("train.attack.oops"),
                         ConfigError);
    nlohmann::json bad3 = base;
    bad3["extra"] = 1;
    CHECK_THROWS_WITH_AS(parse_config_json(bad3), doctest::Contains("extra"), ConfigError);
  }
  SUBCASE("bad values are config errors") {
    nlohmann::json bad = base;
    bad["train"]["loss_mode"] = "nonsense";
    CHECK_THROWS_AS(parse_config_json(bad), ConfigError);
    nlohmann::json bad2 = base;
    bad2["train"]["lr0"] = 0.0;
    CHECK_THROWS_AS(parse_config_json(bad2), ConfigError);
    nlohmann::json bad3 = base;
    bad3["dataset"]["type"] = "csv";  // no path given
    CHECK_THROWS_AS(parse_config_json(bad3), ConfigError);
  }
  SUBCASE("digest is stable and sensitive") {
    const ExperimentConfig a = parse_config_json(base);
    const ExperimentConfig b = parse_config_json(base);
    CHECK(config_digest(a) == config_digest(b));
    nlohmann::json other = base;
    other["train"]["seed"] = 8;
    CHECK(config_digest(parse_config_json(other)) != config_digest(a));
  }
  SUBCASE("resolved json records the rng algorithm") {
    const nlohmann::json r = resolved_json(parse_config_json(base));
    CHECK(r.at("rng_algorithm").get<std::string>() == std::string(Rng::kAlgorithm));
    // Resolving twice is a fixed point.
    CHECK(resolved_json(parse_config_json(base)) == r);
  }
}

TEST_CASE("cmd_train writes the full artifact set deterministically") {
  const fs::path dir = fresh_dir("tradeslab_cli_train");
  const fs::path cfg = write_config(dir, small_config_text());

  const fs::path out1 = dir / "run1";
  int rc = 0;
  capture_stdout([&] { rc = cmd_train(cfg.string(), out1.string()); });
  REQUIRE(rc == kExitOk);
  for (const char* f : {"resolved-config.json", "epochs.csv", "batches.jsonl", "best.ckpt"})
    CHECK(fs::exists(out1 / f));

  const std::string epochs_text = slurp(out1 / "epochs.csv");
  CHECK(epochs_text.rfind(kEpochsCsvHeader, 0) == 0);
  std::size_t lines = 0;
  for (char c : epochs_text)
    if (c == '\n') ++lines;
  CHECK(lines == 3);  // header + 2 epochs

  // 63 train samples (70% of 90), batch 32 -> 2 batches per epoch.
  const std::string batches_text = slurp(out1 / "batches.jsonl");
  std::size_t blines = 0;
  for (char c : batches_text)
    if (c == '\n') ++blines;
  CHECK(blines == 4);
  const auto first = nlohmann::json::parse(batches_text.substr(0, batches_text.find('\n')));
  for (const char* k :
       {"step", "w_grad_norm", "ce_norm", "kl_norm", "grad_cosine_similarity"})
    CHECK(first.contains(k));
  CHECK(first.at("step").get<std::size_t>() == 1);

  SUBCASE("same seed gives byte-identical outputs") {
    const fs::path out2 = dir / "run2";
    capture_stdout([&] { rc = cmd_train(cfg.string(), out2.string()); });
    REQUIRE(rc == kExitOk);
    for (const char* f : {"resolved-config.json", "epochs.csv", "batches.jsonl", "best.ckpt"})
      CHECK(slurp(out1 / f) == slurp(out2 / f));
  }
  SUBCASE("seed override changes outputs and the recorded digest") {
    const fs::path out3 = dir / "run3";
    capture_stdout([&] { rc = cmd_train(cfg.string(), out3.string(), 99); });
    REQUIRE(rc == kExitOk);
    CHECK(slurp(out1 / "epochs.csv") != slurp(out3 / "epochs.csv"));
    const auto r1 = nlohmann::json::parse(slurp(out1 / "resolved-config.json"));
    const auto r3 = nlohmann::json::parse(slurp(out3 / "resolved-config.json"));
    CHECK(r3.at("train").at("seed").get<std::uint64_t>() == 99);
    CHECK(r1.at("train").at("seed").get<std::uint64_t>() == 7);
  }
  SUBCASE("config errors exit with the usage code") {
    const fs::path bad = dir / "bad.json";
    std::ofstream(bad) << R"({"train": {"bogus": 1}})";
    CHECK(cmd_train(bad.string(), (dir / "nope").string()) == kExitUsage);
    CHECK(cmd_train((dir / "missing.json").string(), (dir / "nope").string()) == kExitUsage);
  }
}

TEST_CASE("cmd_eval produces the masking report") {
  const fs::path dir = fresh_dir("tradeslab_cli_eval");
  const fs::path cfg = write_config(dir, small_config_text());
  const fs::path out = dir / "run";
  int rc = 0;
  capture_stdout([&] { rc = cmd_train(cfg.string(), out.string()); });
  REQUIRE(rc == kExitOk);
  const std::string ckpt = (out / "best.ckpt").string();

  SUBCASE("both attacks yield the verdict fields") {
    const fs::path report_path = dir / "report.json";
    capture_stdout([&] { rc = cmd_eval(ckpt, cfg.string(), "", report_path.string()); });
    REQUIRE(rc == kExitOk);
    const auto report = nlohmann::json::parse(slurp(report_path));
    for (const char* k : {"clean_acc", "pgd_acc", "square_acc", "whitebox_blackbox_gap",
                          "masking_verdict", "masking_threshold", "epsilon"})
      CHECK(report.contains(k));
    CHECK(report.at("whitebox_blackbox_gap").get<double>() ==
          doctest::Approx(report.at("pgd_acc").get<double>() -
                          report.at("square_acc").get<double>()));
    // Deterministic across invocations.
    const fs::path report2 = dir / "report2.json";
    capture_stdout([&] { rc = cmd_eval(ckpt, cfg.string(), "", report2.string()); });
    REQUIRE(rc == kExitOk);
    CHECK(slurp(report_path) == slurp(report2));
  }
  SUBCASE("attack filter drops the other attack") {
    const fs::path report_path = dir / "pgd-only.json";
    capture_stdout([&] { rc = cmd_eval(ckpt, cfg.string(), "pgd", report_path.string()); });
    REQUIRE(rc == kExitOk);
    const auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report.contains("pgd_acc"));
    CHECK_FALSE(report.contains("square_acc"));
    CHECK_FALSE(report.contains("masking_verdict"));
  }
  SUBCASE("unknown attack list is a usage error") {
    CHECK(cmd_eval(ckpt, cfg.string(), "bogus") == kExitUsage);
  }
  SUBCASE("corrupt checkpoint is a usage error") {
    const fs::path broken = dir / "broken.ckpt";
    std::ofstream(broken, std::ios::binary) << "garbage\n";
    CHECK(cmd_eval(broken.string(), cfg.string()) == kExitUsage);
  }
  SUBCASE("checkpoint/dataset mismatch is a usage error") {
    std::string other = small_config_text();
    const auto pos = other.find("\"dim\": 6");
    REQUIRE(pos != std::string::npos);
    other.replace(pos, 8, "\"dim\": 7");
    const fs::path cfg2 = dir / "config7.json";
    std::ofstream(cfg2, std::ios::binary) << other;
    CHECK(cmd_eval(ckpt, cfg2.string()) == kExitUsage);
  }
}

TEST_CASE("cmd_landscape writes a grid csv") {
  const fs::path dir = fresh_dir("tradeslab_cli_landscape");
  std::string text = small_config_text();
  text.insert(text.rfind('}'), R"(, "landscape": {"resolution": 5})");
  const fs::path cfg = write_config(dir, text);
  const fs::path out = dir / "run";
  int rc = 0;
  capture_stdout([&] { rc = cmd_train(cfg.string(), out.string()); });
  REQUIRE(rc == kExitOk);
  const std::string ckpt = (out / "best.ckpt").string();

  const fs::path csv = dir / "grid.csv";
  capture_stdout([&] { rc = cmd_landscape(ckpt, cfg.string(), 0, csv.string()); });
  REQUIRE(rc == kExitOk);
  const std::string grid_text = slurp(csv);
  CHECK(grid_text.rfind("a,b,z\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : grid_text)
    if (c == '\n') ++lines;
  CHECK(lines == 26);  // header + 5*5 cells

  const fs::path csv2 = dir / "grid2.csv";
  capture_stdout([&] { rc = cmd_landscape(ckpt, cfg.string(), 0, csv2.string()); });
  REQUIRE(rc == kExitOk);
  CHECK(slurp(csv) == slurp(csv2));

  // Out-of-range sample index (test split has 15% of 90 = 13 samples).
  CHECK(cmd_landscape(ckpt, cfg.string(), 5000, (dir / "x.csv").string()) == kExitUsage);
}

TEST_CASE("cmd_report reads telemetry and states a verdict") {
  const fs::path dir = fresh_dir("tradeslab_cli_report");

  const auto epoch_row = [](std::size_t e, double fosc, double clean, double adv,
                            double wnorm, bool guard) {
    EpochTelemetry et;
    et.epoch = e;
    et.lr = 0.1;
    et.clean_train_acc = clean;
    et.adv_train_acc = adv;
    et.gap = clean - adv;
    et.fosc_mean = fosc;
    et.w_grad_norm_mean = wnorm;
    et.guard_triggered = guard;
    return et;
  };

  SUBCASE("quiet run reports no instability") {
    const std::vector<EpochTelemetry> rows = {
        epoch_row(1, 0.02, 0.8, 0.6, 1.0, false),
        epoch_row(2, 0.03, 0.82, 0.62, 0.9, false),
    };
    write_epochs_csv(rows, (dir / "epochs.csv").string());
    int rc = 0;
    const std::string text = capture_stdout([&] { rc = cmd_report(dir.string()); });
    CHECK(rc == kExitOk);
    CHECK(text.find("verdict: no instability detected") != std::string::npos);
  }
  SUBCASE("excursion, guard, and self-healing window are all reported") {
    const std::vector<EpochTelemetry> rows = {
        epoch_row(1, 0.02, 0.80, 0.60, 1.0, false),
        epoch_row(2, 0.20, 0.85, 0.65, 1.2, true),   // excursion + guard
        epoch_row(3, 0.005, 0.80, 0.62, 1.0, false), // collapse + clean dip
        epoch_row(4, 0.01, 0.81, 0.63, 0.5, false),  // grad norm falls after
    };
    write_epochs_csv(rows, (dir / "epochs.csv").string());
    std::ofstream(dir / "resolved-config.json")
        << R"({"train": {"fosc_threshold": 0.1}})";
    int rc = 0;
    const std::string text = capture_stdout([&] { rc = cmd_report(dir.string()); });
    CHECK(rc == kExitOk);
    CHECK(text.find("FOSC excursions (epochs): 2") != std::string::npos);
    CHECK(text.find("guard activations (epochs): 2") != std::string::npos);
    CHECK(text.find("self-healing signatures (epochs): 3") != std::string::npos);
    CHECK(text.find("instability detected (FOSC above threshold at epoch 2)") !=
          std::string::npos);
  }
  SUBCASE("missing telemetry is a usage error") {
    CHECK(cmd_report((dir / "nowhere").string()) == kExitUsage);
  }
}

TEST_CASE("cmd_calibrate_fosc prints the distribution and a suggestion") {
  const fs::path dir = fresh_dir("tradeslab_cli_calibrate");
  const fs::path cfg = write_config(dir, small_config_text());
  int rc = 0;
  const std::string text =
      capture_stdout([&] { rc = cmd_calibrate_fosc(cfg.string(), 2); });
  CHECK(rc == kExitOk);
  CHECK(text.find("epoch FOSC means over 2 epochs") != std::string::npos);
  CHECK(text.find("suggested threshold (3x median):") != std::string::npos);
  CHECK(cmd_calibrate_fosc((dir / "missing.json").string(), 2) == kExitUsage);
}

TEST_CASE("epochs csv round trip") {
  const fs::path dir = fresh_dir("tradeslab_csv_roundtrip");
  EpochTelemetry et;
  et.epoch = 3;
  et.lr = 0.01;
  et.clean_train_acc = 0.875;
  et.adv_train_acc = 0.625;
  et.gap = 0.25;
  et.clean_val_acc = 0.8;
  et.pgd_val_acc = 0.6;
  et.fosc_mean = 0.0625;
  et.sgcs_mean = 0.5;
  et.w_grad_norm_mean = 1.5;
  et.ce_norm_mean = 1.0;
  et.kl_norm_mean = 0.75;
  et.grad_cos_mean = 0.9;
  et.guard_triggered = true;
  et.noise_batches_applied = 4;
  write_epochs_csv({et}, (dir / "epochs.csv").string());
  const auto back = read_epochs_csv((dir / "epochs.csv").string());
  REQUIRE(back.size() == 1);
  CHECK(back[0].epoch == 3);
  CHECK(back[0].fosc_mean == doctest::Approx(0.0625));
  CHECK(back[0].guard_triggered);
  CHECK(back[0].noise_batches_applied == 4);
  CHECK(back[0].gap == doctest::Approx(0.25));

  // Header tampering is rejected.
  std::ofstream(dir / "bad.csv") << "epoch,nope\n1,2\n";
  CHECK_THROWS_AS(read_epochs_csv((dir / "bad.csv").string()), ParseError);
}
