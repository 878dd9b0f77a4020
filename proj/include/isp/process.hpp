#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isp/measures.hpp"
#include "isp/pulses.hpp"
#include "isp/quadrature.hpp"
#include "isp/regimes.hpp"
#include "isp/sampler.hpp"

namespace isp {

/// Strictly increasing times starting at 0; the last one is the horizon T.
struct PathGrid {
  std::vector<double> times;

  double horizon() const { return times.back(); }
  std::size_t size() const { return times.size(); }

  static PathGrid uniform(double T, int steps);
  /// {0} + T * 2^-k, k = levels..0.
  static PathGrid dyadic(double T, int levels);
};

void validate(const PathGrid& grid);

using SamplePath = std::vector<double>;

/// Sums a r u increment(t_i, s, u) over atoms in arrival order. Grid times at
/// or past s + u see a constant, so they go through a difference array and
/// each atom touches only the times inside (s, s + u).
class PathAccumulator {
 public:
  PathAccumulator(const PathGrid& grid, const Pulse& pulse, double a);

  void add(const Atom& atom);
  /// Values minus centering (empty centering means none).
  SamplePath finish(const std::vector<double>& centering = {}) const;

 private:
  const std::vector<double>& times_;
  const Pulse& pulse_;
  double a_;
  double f_end_;
  std::vector<double> direct_;
  std::vector<double> diff_;
};

SamplePath evaluate_path(const std::vector<Atom>& atoms, const Pulse& pulse, double a,
                         const std::vector<double>& centering, const PathGrid& grid);

/// exp of each value; NumericalError if some |Z| exceeds the exponent range.
std::vector<double> price_path(const SamplePath& path);

// ---------------------------------------------------------------------------

/// What to do with the mass of a truncated power law below u_min.
enum class SmallJumps { Drop, Gaussian };

struct ComponentSpec {
  double lambda = 1.0;
  DurationLaw law = ParetoDuration{};
  RateLaw rate = TwoPointRate{};
  Pulse pulse = Pulse::linear_plateau();
};

struct EnsembleSpec {
  std::vector<ComponentSpec> components;
  ScalingRegime regime = Unscaled{};
  PathGrid grid;
  /// Force raw (uncentered) output; only valid for probability laws.
  bool raw = false;
  SmallJumps small_jumps = SmallJumps::Drop;
  QuadratureSettings quadrature{1e-8, 1e-13, 200'000'000};
};

/// Resolved parameters of one component after applying the regime.
struct ComponentReport {
  double lambda_n;
  DurationLaw law_n;
  double a;
  Compensation compensation;
  double total_intensity;
  double rate_mean;
  double rate_sq;
  /// Variance at T of the mass below u_min and above u_max (0 for Pareto).
  double lower_truncation_variance = 0.0;
  double upper_truncation_variance = 0.0;
  bool gaussian_small_jumps = false;
  std::vector<double> centering;
};

struct Ensemble {
  PathGrid grid;
  std::vector<SamplePath> paths;
  std::vector<ComponentReport> components;
  std::string regime;
  std::uint64_t seed = 0;
  std::int64_t total_atoms = 0;

  /// Values of every path at grid index i.
  std::vector<double> column(std::size_t i) const;
  /// M x K matrix of path values.
  Eigen::MatrixXd matrix() const;
};

class EnsembleSimulator {
 public:
  explicit EnsembleSimulator(EnsembleSpec spec);

  const std::vector<ComponentReport>& reports() const { return reports_; }
  const EnsembleSpec& spec() const { return spec_; }

  /// Path with index `path`; component c consumes substream substream_id(path, c).
  SamplePath simulate_path(std::uint64_t seed, std::uint64_t path,
                           std::int64_t* atoms = nullptr) const;

  /// M paths; identical output for any worker count.
  Ensemble run(std::int64_t M, std::uint64_t seed, int workers = 1) const;

 private:
  EnsembleSpec spec_;
  std::vector<ComponentReport> reports_;
  std::vector<AtomSampler> samplers_;
  std::vector<Eigen::MatrixXd> gaussian_factors_;
};

Ensemble simulate_ensemble(const EnsembleSpec& spec, std::int64_t M, std::uint64_t seed,
                           int workers = 1);

}  // namespace isp
