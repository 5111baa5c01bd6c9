#pragma once

#include "delaykit/delay_map.hpp"
#include "delaykit/dynamics.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace delaykit {

enum class SystemKind { shift, linear };

struct TheoremConstants {
  double c_user = 0.0;
  double dim = 1.0;
  std::optional<double> epsilon;  // defaults to the measured median epsilon
};

/// A validated experiment description.
///
/// Text format: one `key = value` per line, `#` starts a comment, list
/// values are comma-separated. Every key is listed in kKnownKeys; anything
/// else is rejected.
struct ExperimentConfig {
  SystemKind kind = SystemKind::shift;
  int ambient_dim = 0;
  std::filesystem::path matrix_path;   // linear systems only
  double sampling_interval = 1.0;

  StateVector origin;                  // defaults to e_1
  int sample_count = 0;                // defaults to N
  std::filesystem::path states_path;   // explicit sample list, overrides origin/samples

  std::vector<int> delays;
  Ensemble ensemble = Ensemble::rademacher;
  std::size_t draws = 100;
  std::uint64_t seed = 0;
  std::filesystem::path outputs = "out";
  std::vector<double> target_eps{0.1, 0.25, 0.5, 0.75, 1.0};
  std::optional<TheoremConstants> theorem;
  int mi_bins = 16;
  int lyapunov_steps = 1000;
  double lyapunov_perturbation = 1e-8;
  int series_length = 0;               // 0: max(64, 8N)

  /// Key/value pairs as written, in file order, for the run manifest.
  std::vector<std::pair<std::string, std::string>> entries;
};

inline constexpr std::string_view kKnownKeys[] = {
    "kind",          "N",           "matrix",        "sampling_interval", "origin",
    "samples",       "states",      "delays",        "ensemble",          "draws",
    "seed",          "outputs",     "target_eps",    "theorem_c",         "theorem_dim",
    "theorem_eps",   "mi_bins",     "lyapunov_steps", "lyapunov_perturbation",
    "series_length",
};

/// Parses config text. Relative paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

FlowSpec build_flow(const ExperimentConfig& config);

struct SampleSet {
  std::vector<StateVector> states;
  std::optional<int> period;  // set when drawn from a periodic orbit
};

SampleSet build_samples(const ExperimentConfig& config, const FlowSpec& flow);

}  // namespace delaykit
