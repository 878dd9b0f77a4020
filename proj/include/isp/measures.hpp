#pragma once

#include <limits>
#include <utility>
#include <variant>
#include <vector>

#include "isp/rng.hpp"

namespace isp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Duration measures

/// Pareto probability law nu(du) = delta b^delta u^(-delta-1) du on u > b.
struct ParetoDuration {
  double b = 1.0;
  double delta = 1.5;
};

/// The infinite measure u^(-delta-1) du, truncated to [u_min, u_max].
struct PowerLawInfinite {
  double delta = 1.5;
  double u_min = 1e-3;
  double u_max = 1e6;
};

using DurationLaw = std::variant<ParetoDuration, PowerLawInfinite>;

/// Throws ConfigError if parameters violate the law invariants.
void validate(const DurationLaw& law);

double tail_index(const DurationLaw& law);

/// nu((u, inf)); for truncated laws the mass in (u, u_max].
double tail_probability(const DurationLaw& law, double u);

/// CDF of the normalized law, 1 - nu((u, inf)) / total mass.
double normalized_cdf(const DurationLaw& law, double u);

/// Unnormalized integrals of the measure: mean = int u nu(du),
/// second = int u^2 nu(du) (+inf when divergent), mass = nu(R+).
struct DurationMoments {
  double mean;
  double second;
  double mass;
};

DurationMoments duration_moments(const DurationLaw& law);

/// nu_n(du) = nu(d(nu)): Pareto(b, delta) -> Pareto(b / n, delta).
DurationLaw scale_duration(const DurationLaw& law, double n);

/// u whose normalized tail mass is v, v in (0, 1]; v = 1 gives the lower end.
double duration_quantile(const DurationLaw& law, double v);

/// Draws from nu normalized to a probability law.
double sample_duration(const DurationLaw& law, RngStream& rng);

/// Draws from the size-biased law u nu(du) / int u nu(du).
double sample_size_biased_duration(const DurationLaw& law, RngStream& rng);

/// Common representation for quadrature: coeff * u^(-delta-1) du on (lo, hi).
/// hi may be +inf and lo may be 0 (the untruncated infinite measure).
struct PowerMeasure {
  double coeff = 1.0;
  double delta = 1.5;
  double lo = 0.0;
  double hi = kInf;

  double density(double u) const;
};

PowerMeasure to_power_measure(const DurationLaw& law);

/// u^(-delta-1) du on (0, inf).
PowerMeasure infinite_measure(double delta);

/// int_a^b u^p du, with b = +inf allowed when p < -1 and a = 0 when p > -1.
double power_integral(double p, double a, double b);

// ---------------------------------------------------------------------------
// Rate laws

/// +r_plus with probability p, -r_minus otherwise.
struct TwoPointRate {
  double p = 0.5;
  double r_plus = 1.0;
  double r_minus = 1.0;
};

struct GaussianRate {
  double mean = 0.0;
  double std = 1.0;
};

struct RateAtom {
  double value;
  double prob;
};

struct DiscreteRate {
  std::vector<RateAtom> atoms;
};

using RateLaw = std::variant<TwoPointRate, GaussianRate, DiscreteRate>;

void validate(const RateLaw& law);

struct RateMoments {
  double mean;
  double abs_p;  ///< E|R|^(1+kappa)
  double sq;     ///< E R^2
  double c1;     ///< E R^delta 1{R>0}
  double c2;     ///< E |R|^delta 1{R<0}
};

/// Requires delta in (1, 2] and kappa in (0, 1].
RateMoments rate_moments(const RateLaw& law, double delta, double kappa);

double rate_mean(const RateLaw& law);
double rate_second_moment(const RateLaw& law);

/// E |R|^p 1{R > 0} and E |R|^p 1{R < 0}, p >= 0.
std::pair<double, double> signed_abs_moments(const RateLaw& law, double p);

/// Atoms of a discrete law (TwoPoint or Discrete). Gaussian -> UnsupportedVariant.
std::vector<RateAtom> rate_atoms(const RateLaw& law);

double sample_rate(const RateLaw& law, RngStream& rng);

}  // namespace isp
