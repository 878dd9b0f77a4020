#include <doctest.h>

#include <cmath>
#include <vector>

#include "isp/errors.hpp"
#include "isp/estimators.hpp"
#include "isp/process.hpp"
#include "oracles.hpp"

using namespace isp;

namespace {

PathGrid grid_of(std::vector<double> t) { return PathGrid{std::move(t)}; }

// Direct O(atoms x grid) sum, written against the test-side pulse.
std::vector<double> naive_path(const std::vector<Atom>& atoms, const oracle::Fn& f, double a,
                               const std::vector<double>& times) {
  std::vector<double> z(times.size(), 0.0);
  for (const auto& at : atoms) {
    for (std::size_t i = 0; i < times.size(); ++i) {
      z[i] += a * at.r * at.u * (f((times[i] - at.s) / at.u) - f(-at.s / at.u));
    }
  }
  return z;
}

EnsembleSpec pareto_spec(double lambda, const RateLaw& rate, int steps = 8) {
  EnsembleSpec spec;
  spec.components.push_back({lambda, ParetoDuration{1.0, 1.5}, rate, Pulse::linear_plateau()});
  spec.grid = PathGrid::uniform(1.0, steps);
  return spec;
}

}  // namespace

TEST_CASE("grids") {
  const auto u = PathGrid::uniform(2.0, 4);
  CHECK(u.times == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  const auto d = PathGrid::dyadic(1.0, 3);
  CHECK(d.times == std::vector<double>{0.0, 0.125, 0.25, 0.5, 1.0});
  CHECK_THROWS_AS(validate(grid_of({0.1, 1.0})), ConfigError);
  CHECK_THROWS_AS(validate(grid_of({0.0, 1.0, 1.0})), ConfigError);
  CHECK_THROWS_AS(validate(grid_of({0.0})), ConfigError);
}

TEST_CASE("path evaluation examples") {
  const auto grid = grid_of({0.0, 0.5, 1.0, 2.0});
  const auto empty = evaluate_path({}, Pulse::linear_plateau(), 1.0, {0, 0, 0, 0}, grid);
  for (double z : empty) CHECK(z == 0.0);
  const auto z = evaluate_path({{0.0, 1.0, 2.0}}, Pulse::linear_plateau(), 1.0, {}, grid);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(1.0));
  CHECK(z[2] == doctest::Approx(2.0));
  CHECK(z[3] == doctest::Approx(2.0));
  const auto tz = evaluate_path({{0.0, 1.0, 1.0}}, Pulse::triangle(), 1.0, {}, grid);
  CHECK(tz[1] == doctest::Approx(0.5));
  CHECK(tz[2] == doctest::Approx(0.0));
  CHECK_THROWS_AS(evaluate_path({}, Pulse::linear_plateau(), 1.0, {0.0}, grid), ConfigError);
}

TEST_CASE("price paths") {
  const auto y = price_path({0.0, 2.0, -1.0});
  CHECK(y[0] == 1.0);
  CHECK(y[1] == doctest::Approx(7.389).epsilon(1e-4));
  CHECK((y[2] > 0.0 && y[2] < 1.0));
  CHECK_THROWS_AS(price_path({800.0}), NumericalError);
}

TEST_CASE("property: accumulator agrees with a naive double loop") {
  const std::vector<double> times{0.0, 0.1, 0.3, 0.35, 0.8, 1.0, 1.7, 2.4};
  const PathGrid grid{times};
  RngStream rng(2, 0);
  const auto atoms = sample_atoms(6.0, ParetoDuration{0.2, 1.3}, GaussianRate{0.2, 1.0}, 2.4, rng);
  REQUIRE(atoms.size() > 10);
  const auto lp = evaluate_path(atoms, Pulse::linear_plateau(), 0.7, {}, grid);
  const auto lref = naive_path(atoms, oracle::linear_plateau, 0.7, times);
  const auto tp = evaluate_path(atoms, Pulse::triangle(), 0.7, {}, grid);
  const auto tref = naive_path(atoms, oracle::triangle, 0.7, times);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(lp[i] == doctest::Approx(lref[i]).epsilon(1e-12).scale(1.0));
    CHECK(tp[i] == doctest::Approx(tref[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("property: superposition of atom sets") {
  const PathGrid grid = PathGrid::uniform(1.0, 16);
  RngStream r1(3, 0), r2(3, 1);
  const auto a = sample_atoms(5.0, ParetoDuration{1.0, 1.5}, GaussianRate{}, 1.0, r1);
  const auto b = sample_atoms(3.0, ParetoDuration{0.5, 1.2}, TwoPointRate{}, 1.0, r2);
  auto ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  for (const Pulse& p : {Pulse::linear_plateau(), Pulse::triangle()}) {
    const auto za = evaluate_path(a, p, 1.0, {}, grid);
    const auto zb = evaluate_path(b, p, 1.0, {}, grid);
    const auto zab = evaluate_path(ab, p, 1.0, {}, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      // Summation order differs between the union and the separate sums.
      CHECK(zab[i] == doctest::Approx(za[i] + zb[i]).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("ensemble with M = 1 equals evaluate_path on substream 0") {
  const EnsembleSpec spec = pareto_spec(2.0, TwoPointRate{0.6, 1.0, 1.0});
  const EnsembleSimulator sim(spec);
  const auto ens = sim.run(1, 99);
  RngStream rng(99, substream_id(0, 0));
  const auto atoms = sample_atoms(2.0, ParetoDuration{1.0, 1.5}, TwoPointRate{0.6, 1.0, 1.0},
                                  1.0, rng);
  const auto z = evaluate_path(atoms, Pulse::linear_plateau(), 1.0,
                               sim.reports()[0].centering, spec.grid);
  REQUIRE(ens.paths.size() == 1);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(ens.paths[0][i] == z[i]);
  CHECK(ens.total_atoms == static_cast<std::int64_t>(atoms.size()));
  CHECK(ens.paths[0][0] == 0.0);
}

TEST_CASE("property: determinism and worker independence") {
  const EnsembleSpec spec = pareto_spec(3.0, GaussianRate{0.1, 1.0});
  const auto a = simulate_ensemble(spec, 64, 5, 1);
  const auto b = simulate_ensemble(spec, 64, 5, 1);
  const auto c = simulate_ensemble(spec, 64, 5, 4);
  CHECK(a.paths == b.paths);
  CHECK(a.paths == c.paths);
  CHECK(a.total_atoms == c.total_atoms);
  const auto d = simulate_ensemble(spec, 64, 6, 1);
  CHECK(a.paths != d.paths);
}

TEST_CASE("centering uses the closed-form compensator") {
  const EnsembleSpec spec = pareto_spec(2.0, TwoPointRate{0.75, 1.0, 1.0}, 4);
  const EnsembleSimulator sim(spec);
  const auto& rep = sim.reports()[0];
  CHECK(rep.compensation == Compensation::Centered);
  // a lambda E R t f(1) E U = 2 * 0.5 * t * 3.
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    CHECK(rep.centering[i] == doctest::Approx(3.0 * spec.grid.times[i]));
  }
  CHECK(rep.total_intensity == doctest::Approx(8.0));
  EnsembleSpec raw = spec;
  raw.raw = true;
  CHECK(EnsembleSimulator(raw).reports()[0].compensation == Compensation::Raw);
  const auto ens = EnsembleSimulator(raw).run(2000, 1);
  // Raw mean is the compensator.
  const auto z1 = ens.column(spec.grid.size() - 1);
  const double se = std::sqrt(variance(z1) / z1.size());
  CHECK(std::abs(mean(z1) - 3.0) < 4.0 * se);
}

TEST_CASE("ensemble configuration errors") {
  EnsembleSpec spec;
  spec.grid = PathGrid::uniform(1.0, 2);
  CHECK_THROWS_AS(EnsembleSimulator{spec}, ConfigError);
  spec.components.push_back({1.0, PowerLawInfinite{}, TwoPointRate{}, Pulse::linear_plateau()});
  spec.raw = true;
  CHECK_THROWS_AS(EnsembleSimulator{spec}, ConfigError);
  spec.raw = false;
  spec.regime = SlowSimple{4};
  spec.components[0].pulse = Pulse::triangle();
  CHECK_THROWS_AS(EnsembleSimulator{spec}, ConfigError);
  CHECK_THROWS_AS(simulate_ensemble(pareto_spec(1.0, TwoPointRate{}), 0, 1), ConfigError);
}

TEST_CASE("property: zero mean when E R = 0") {
  const auto ens = simulate_ensemble(pareto_spec(2.0, TwoPointRate{0.5, 1.0, 1.0}), 1000, 17);
  const auto z1 = ens.column(ens.grid.size() - 1);
  CHECK(std::abs(mean(z1)) <= 3.0 * std::sqrt(variance(z1)) / std::sqrt(1000.0));
}

TEST_CASE("property: stationary increments") {
  EnsembleSpec spec = pareto_spec(2.0, TwoPointRate{0.5, 1.0, 1.0});
  spec.grid = grid_of({0.0, 0.25, 0.5});
  const auto ens = simulate_ensemble(spec, 2000, 23);
  // Z(h) from the first half of the paths, Z(t+h) - Z(t) from the second half.
  std::vector<double> a, b;
  for (std::size_t p = 0; p < ens.paths.size(); ++p) {
    if (p % 2 == 0) a.push_back(ens.paths[p][1]);
    else b.push_back(ens.paths[p][2] - ens.paths[p][1]);
  }
  CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("two identical components double the variance") {
  EnsembleSpec one = pareto_spec(2.0, TwoPointRate{0.5, 1.0, 1.0}, 4);
  EnsembleSpec two = one;
  two.components.push_back(two.components[0]);
  const auto e1 = simulate_ensemble(one, 4000, 31);
  const auto e2 = simulate_ensemble(two, 4000, 32);
  const auto z1 = e1.column(4), z2 = e2.column(4);
  const double v1 = variance(z1), v2 = variance(z2);
  // Heavy tails make the variance estimator noisy; compare with a 4-sigma band
  // from the empirical fourth moments.
  auto se = [](const std::vector<double>& z) {
    const double m = mean(z), v = variance(z);
    double m4 = 0;
    for (double x : z) m4 += std::pow(x - m, 4);
    m4 /= z.size();
    return std::sqrt((m4 - v * v) / z.size());
  };
  const double s = std::sqrt(4 * se(z1) * se(z1) + se(z2) * se(z2));
  CHECK(std::abs(v2 - 2 * v1) < 4 * s);
}

TEST_CASE("compensated power-law ensemble reports truncation") {
  EnsembleSpec spec;
  spec.components.push_back({1.0, PowerLawInfinite{1.5, 0.01, 1e4}, TwoPointRate{0.5, 1, 1},
                             Pulse::linear_plateau()});
  spec.regime = FastSimple{4};
  spec.grid = PathGrid::dyadic(1.0, 3);
  const EnsembleSimulator sim(spec);
  const auto& r = sim.reports()[0];
  CHECK(r.compensation == Compensation::Compensated);
  CHECK(r.lambda_n == doctest::Approx(16.0));
  CHECK(r.a == doctest::Approx(0.25));
  CHECK(r.lower_truncation_variance > 0.0);
  CHECK(r.upper_truncation_variance > 0.0);
  CHECK_FALSE(r.gaussian_small_jumps);
  const double d = 1.5, c = 0.01;
  const double lower = std::pow(c, 2 - d) / (2 - d) - std::pow(c, 3 - d) / (3 * (3 - d));
  CHECK(r.lower_truncation_variance == doctest::Approx(16.0 * 0.0625 * lower).epsilon(1e-8));
}

TEST_CASE("gaussian small jumps restore the missing variance") {
  EnsembleSpec spec;
  spec.components.push_back({1.0, PowerLawInfinite{1.5, 0.2, 1e3}, TwoPointRate{0.5, 1, 1},
                             Pulse::linear_plateau()});
  spec.grid = grid_of({0.0, 0.5, 1.0});
  spec.small_jumps = SmallJumps::Gaussian;
  const auto ens = simulate_ensemble(spec, 4000, 77);
  // Exact variance of the untruncated-below process, from the oracle.
  auto sq = [](double y) { return y * y; };
  const double exact = oracle::su_integral(oracle::linear_plateau, oracle::plateau_knots(), sq,
                                           1.5, 1.0, 1.0, 0.0, 1e3);
  const auto z = ens.column(2);
  const double v = variance(z);
  double m4 = 0, m = mean(z);
  for (double x : z) m4 += std::pow(x - m, 4);
  m4 /= z.size();
  CHECK(std::abs(v - exact) < 4 * std::sqrt((m4 - v * v) / z.size()));
}
