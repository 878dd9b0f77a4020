#include "isp/process.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "isp/errors.hpp"
#include "isp/limits.hpp"

namespace isp {

PathGrid PathGrid::uniform(double T, int steps) {
  if (!(T > 0.0) || steps < 1) throw ConfigError("grid: need T > 0 and steps >= 1");
  PathGrid g;
  g.times.reserve(steps + 1);
  for (int i = 0; i <= steps; ++i) g.times.push_back(T * i / steps);
  g.times.back() = T;
  return g;
}

PathGrid PathGrid::dyadic(double T, int levels) {
  if (!(T > 0.0) || levels < 0) throw ConfigError("grid: need T > 0 and levels >= 0");
  PathGrid g;
  g.times.push_back(0.0);
  for (int k = levels; k >= 0; --k) g.times.push_back(std::ldexp(T, -k));
  return g;
}

void validate(const PathGrid& grid) {
  if (grid.times.size() < 2) throw ConfigError("grid: need at least two times");
  if (grid.times.front() != 0.0) throw ConfigError("grid: first time must be 0");
  for (std::size_t i = 1; i < grid.times.size(); ++i) {
    if (!(grid.times[i] > grid.times[i - 1]) || !std::isfinite(grid.times[i])) {
      throw ConfigError("grid: times must be finite and strictly increasing");
    }
  }
}

// ---------------------------------------------------------------------------

PathAccumulator::PathAccumulator(const PathGrid& grid, const Pulse& pulse, double a)
    : times_(grid.times),
      pulse_(pulse),
      a_(a),
      f_end_(pulse.plateau_value()),
      direct_(grid.times.size(), 0.0),
      diff_(grid.times.size() + 1, 0.0) {}

void PathAccumulator::add(const Atom& atom) {
  const double c = a_ * atom.r * atom.u;
  const double f0 = pulse_.eval(-atom.s / atom.u);
  const auto first = std::upper_bound(times_.begin(), times_.end(), atom.s);
  const auto last = std::lower_bound(first, times_.end(), atom.s + atom.u);
  for (auto it = first; it != last; ++it) {
    direct_[it - times_.begin()] += c * (pulse_.eval((*it - atom.s) / atom.u) - f0);
  }
  diff_[last - times_.begin()] += c * (f_end_ - f0);
}

SamplePath PathAccumulator::finish(const std::vector<double>& centering) const {
  SamplePath out(times_.size());
  double run = 0.0;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    run += diff_[i];
    out[i] = direct_[i] + run;
    if (!centering.empty()) out[i] -= centering[i];
  }
  return out;
}

SamplePath evaluate_path(const std::vector<Atom>& atoms, const Pulse& pulse, double a,
                         const std::vector<double>& centering, const PathGrid& grid) {
  validate(grid);
  if (!centering.empty() && centering.size() != grid.size()) {
    throw ConfigError("evaluate_path: centering must match the grid");
  }
  PathAccumulator acc(grid, pulse, a);
  for (const auto& at : atoms) acc.add(at);
  return acc.finish(centering);
}

std::vector<double> price_path(const SamplePath& path) {
  constexpr double kMaxExp = 709.78;
  std::vector<double> y(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (std::abs(path[i]) > kMaxExp) {
      throw NumericalError("price_path: |Z| exceeds the exponent range", path[i], kMaxExp);
    }
    y[i] = std::exp(path[i]);
  }
  return y;
}

// ---------------------------------------------------------------------------

std::vector<double> Ensemble::column(std::size_t i) const {
  std::vector<double> c(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) c[p] = paths[p][i];
  return c;
}

Eigen::MatrixXd Ensemble::matrix() const {
  const auto m = static_cast<Eigen::Index>(paths.size());
  const auto k = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd x(m, k);
  for (Eigen::Index p = 0; p < m; ++p)
    for (Eigen::Index i = 0; i < k; ++i) x(p, i) = paths[p][i];
  return x;
}

namespace {

// Symmetric square root of a covariance that may carry rounding-size
// negative eigenvalues.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

EnsembleSimulator::EnsembleSimulator(EnsembleSpec spec) : spec_(std::move(spec)) {
  validate(spec_.grid);
  if (spec_.components.empty()) throw ConfigError("ensemble: need at least one component");
  if (spec_.components.size() > kMaxComponents) {
    throw ConfigError("ensemble: at most 64 components");
  }
  const double T = spec_.grid.horizon();
  for (const auto& comp : spec_.components) {
    validate(comp.rate);
    const double delta = tail_index(comp.law);
    auto [lambda_n, law_n] = intensity(spec_.regime, comp.lambda, comp.law);
    ComponentReport rep{};
    rep.lambda_n = lambda_n;
    rep.law_n = law_n;
    rep.a = rate_multiplier(spec_.regime, delta);
    rep.compensation = compensation_mode(spec_.regime, law_n);
    if (spec_.raw) {
      if (rep.compensation == Compensation::Compensated) {
        throw ConfigError("ensemble: raw output needs a probability duration law");
      }
      rep.compensation = Compensation::Raw;
    }
    if (is_stable_regime(spec_.regime) && comp.pulse.plateau_value() != 1.0) {
      throw ConfigError("ensemble: stable regimes need a pulse with f(1) = 1");
    }
    rep.rate_mean = rate_mean(comp.rate);
    rep.rate_sq = rate_second_moment(comp.rate);
    rep.centering.assign(spec_.grid.size(), 0.0);
    if (rep.compensation != Compensation::Raw) {
      for (std::size_t i = 0; i < spec_.grid.size(); ++i) {
        rep.centering[i] = compensator_value(comp.pulse, rep.a, lambda_n, rep.rate_mean, law_n,
                                             spec_.grid.times[i]);
      }
    }
    samplers_.emplace_back(lambda_n, law_n, comp.rate, T);
    rep.total_intensity = samplers_.back().total_intensity();

    Eigen::MatrixXd factor;
    if (const auto* pl = std::get_if<PowerLawInfinite>(&law_n)) {
      const double a2 = rep.a * rep.a * rep.rate_sq;
      rep.lower_truncation_variance =
          truncation_variance(comp.pulse, *pl, lambda_n, a2, T, pl->u_min, spec_.quadrature);
      rep.upper_truncation_variance =
          upper_truncation_variance(comp.pulse, *pl, lambda_n, a2, T, spec_.quadrature);
      if (spec_.small_jumps == SmallJumps::Gaussian) {
        rep.gaussian_small_jumps = true;
        const Eigen::MatrixXd c =
            lambda_n * a2 *
            shot_covariance(comp.pulse, PowerMeasure{1.0, delta, 0.0, pl->u_min},
                            spec_.grid.times, spec_.quadrature);
        factor = psd_factor(c);
      }
    }
    gaussian_factors_.push_back(std::move(factor));
    reports_.push_back(std::move(rep));
  }
}

SamplePath EnsembleSimulator::simulate_path(std::uint64_t seed, std::uint64_t path,
                                            std::int64_t* atoms) const {
  const std::size_t k = spec_.grid.size();
  SamplePath total(k, 0.0);
  std::int64_t count = 0;
  for (std::size_t c = 0; c < spec_.components.size(); ++c) {
    RngStream rng(seed, substream_id(path, c));
    PathAccumulator acc(spec_.grid, spec_.components[c].pulse, reports_[c].a);
    count += samplers_[c].generate(rng, [&](const Atom& at) { acc.add(at); });
    SamplePath z = acc.finish(reports_[c].centering);
    const auto& f = gaussian_factors_[c];
    if (f.size() > 0) {
      Eigen::VectorXd xi(f.cols());
      for (Eigen::Index j = 0; j < xi.size(); ++j) xi(j) = rng.normal();
      const Eigen::VectorXd g = f * xi;
      for (std::size_t i = 0; i < k; ++i) z[i] += g(static_cast<Eigen::Index>(i));
    }
    for (std::size_t i = 0; i < k; ++i) total[i] += z[i];
  }
  if (atoms) *atoms = count;
  return total;
}

Ensemble EnsembleSimulator::run(std::int64_t M, std::uint64_t seed, int workers) const {
  if (M < 1) throw ConfigError("ensemble: need M >= 1 paths");
  Ensemble ens;
  ens.grid = spec_.grid;
  ens.components = reports_;
  ens.regime = regime_name(spec_.regime);
  ens.seed = seed;
  ens.paths.resize(static_cast<std::size_t>(M));
  std::vector<std::int64_t> counts(static_cast<std::size_t>(M), 0);

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    try {
      for (std::int64_t p = next++; p < M; p = next++) {
        ens.paths[p] = simulate_path(seed, static_cast<std::uint64_t>(p), &counts[p]);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = M;
    }
  };
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(M)));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  for (auto c : counts) ens.total_atoms += c;
  return ens;
}

Ensemble simulate_ensemble(const EnsembleSpec& spec, std::int64_t M, std::uint64_t seed,
                           int workers) {
  return EnsembleSimulator(spec).run(M, seed, workers);
}

}  // namespace isp
