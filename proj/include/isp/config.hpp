#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isp/measures.hpp"
#include "isp/process.hpp"
#include "isp/pulses.hpp"
#include "isp/regimes.hpp"

namespace isp {

struct GridConfig {
  double T = 1.0;
  /// Exactly one of steps, levels (dyadic) or times is used.
  std::optional<int> steps;
  std::optional<int> levels;
  std::vector<double> times;
};

struct TruncationConfig {
  double u_min = 1e-3;
  double u_max = 1e6;
  double variance_budget = 1e-2;
  SmallJumps small_jumps = SmallJumps::Drop;
};

struct ExperimentConfig {
  /// Components of Z = sum_i Z^i. A config with top-level lambda, duration,
  /// rate and pulse has exactly one.
  std::vector<ComponentSpec> components;
  ScalingRegime regime = Unscaled{};
  GridConfig grid;
  TruncationConfig truncation;
  std::uint64_t seed = 1;
  std::int64_t paths = 100;
  bool raw = false;
  int workers = 1;
};

/// Parses JSON text. Every problem is reported with its field path, all in a
/// single ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& file);

/// Canonical JSON (sorted keys, all defaults spelled out).
std::string serialize_config(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical form, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

PathGrid make_grid(const GridConfig& grid);

/// Cross-module validation; throws ConfigError listing every issue.
void validate_config(const ExperimentConfig& cfg);

EnsembleSpec to_ensemble_spec(const ExperimentConfig& cfg);

}  // namespace isp
