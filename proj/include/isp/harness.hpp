#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "isp/config.hpp"
#include "isp/limits.hpp"
#include "isp/process.hpp"

namespace isp {

struct Metric {
  double value;
  double stderr;
};

struct RunRecord {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, Metric> metrics;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
  double wall_time = 0.0;
};

/// Grid time at which the scalar metrics are taken: t = 1 when on the grid,
/// otherwise the horizon.
double metric_time(const PathGrid& grid);

/// Simulates cfg.paths paths with cfg.seed and writes paths.csv and run.meta
/// into out_dir (created if missing). Metrics: mean_Z1, var_Z1, atoms.
RunRecord run_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

/// Same ensemble without touching the file system.
Ensemble simulate_config(const ExperimentConfig& cfg);

enum class ConvergeTarget { Hurst, StableIndex, Variance, Ecf };
ConvergeTarget parse_target(const std::string& name);
std::string target_name(ConvergeTarget t);

struct ConvergeRow {
  double n;
  double estimate;
  double stderr;
  double limit;
  double abs_gap;
};

struct ConvergeResult {
  RunRecord record;
  std::vector<ConvergeRow> rows;
};

/// For each n the regime is re-scaled and the ensemble rerun with the same
/// master seed and path substreams. Writes summary.csv, estimates.csv,
/// ecf.csv and run.meta when out_dir is non-empty.
ConvergeResult run_converge(const ExperimentConfig& cfg, const std::vector<double>& n_list,
                            ConvergeTarget target, const std::string& out_dir);

/// Limit value of the variance target at time t: sigma^2 t^(3-delta) for the
/// intermediate and Gaussian regimes (same integral), the exact value for
/// unscaled runs.
double limit_variance(const ExperimentConfig& cfg, double t);

/// Limit characteristic function of Z(t); ConfigError for Unscaled configs.
std::complex<double> limit_char_function(const ExperimentConfig& cfg, double t, double xi);

/// Frequency grid of the ecf target: 30 points spaced evenly on [0.1, 3].
std::vector<double> ecf_grid();

struct SelftestItem {
  std::string name;
  bool pass;
  double achieved;
  double tolerance;
};

struct SelftestOptions {
  /// Gamma function seen by the stable-scale check.
  GammaFn gamma = nullptr;
};

struct SelftestReport {
  std::vector<SelftestItem> items;
  bool all_passed() const;
};

SelftestReport run_selftest(std::ostream& out, const SelftestOptions& opts = {});

}  // namespace isp
