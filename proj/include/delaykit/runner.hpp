#pragma once

#include "delaykit/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace delaykit {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAssertion = 2;

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // overrides config `outputs`
  std::optional<std::uint64_t> seed;             // overrides config `seed`
  unsigned threads = 0;                          // 0 = hardware concurrency
};

struct RunResult {
  int exit_code = kExitOk;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> data_files;  // every file except the manifest
  std::filesystem::path manifest;
  std::vector<std::string> messages;              // human-readable summary lines
};

/// Exhaustive pair scan of a shift system against the circulant oracle and
/// the M/2 bound. Writes lemma_pairs.csv and lemma_summary.json.
RunResult run_lemma_check(const ExperimentConfig& config, const RunOptions& options);

/// Conditioning against the number of delays. Writes scaling.csv and
/// scaling.json.
RunResult run_scaling_study(const ExperimentConfig& config, const RunOptions& options);

/// Embedding report for a single M. Writes embedding_report.json, pairs.csv,
/// geometry.json and, with theorem constants, theorem_check.json.
RunResult run_full_report(const ExperimentConfig& config, const RunOptions& options);

std::string sha256_hex(std::string_view bytes);

}  // namespace delaykit
