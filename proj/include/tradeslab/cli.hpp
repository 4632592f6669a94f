#pragma once

#include <optional>
#include <string>

#include "tradeslab/config.hpp"

namespace tradeslab {

// Exit codes: 0 success, 2 usage/config error, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

// Writes resolved-config.json, epochs.csv, batches.jsonl and best.ckpt into
// out_dir.
int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override = std::nullopt);

// attacks: comma-separated subset of {pgd,square}; empty means both.
// Writes the report JSON to out_path when given, always prints it.
int cmd_eval(const std::string& ckpt_path, const std::string& config_path,
             const std::string& attacks = "", const std::string& out_path = "",
             std::optional<std::uint64_t> seed_override = std::nullopt);

int cmd_landscape(const std::string& ckpt_path, const std::string& config_path,
                  std::size_t sample_index, const std::string& out_csv,
                  std::optional<std::uint64_t> seed_override = std::nullopt);

int cmd_report(const std::string& telemetry_dir);

// Short training run printing the epoch FOSC distribution, to help pick a
// threshold.
int cmd_calibrate_fosc(const std::string& config_path, std::size_t epochs,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace tradeslab
