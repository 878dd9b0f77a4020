#pragma once

#include <cstdint>
#include <vector>

#include "isp/measures.hpp"
#include "isp/pulses.hpp"
#include "isp/quadrature.hpp"
#include "isp/rng.hpp"

namespace isp {

/// One order: arrival time s, duration u, signed rate r.
struct Atom {
  double s;
  double u;
  double r;
};

/// lambda_n * int (T + u) nu(du): mass of the region -u < s <= T.
double contributing_intensity(double lambda_n, const DurationLaw& law, double T);

/// Exact sampler of the Poisson random measure restricted to -u < s <= T.
///
/// Per path: one Poisson count, then per atom, in this order, one uniform
/// for the mixture branch, one for u, one for s, and the rate draw. The
/// duration follows (T + u) nu(du) normalized, realized as a mixture of nu
/// (weight T * mass) and its size-biased law (weight int u nu).
class AtomSampler {
 public:
  AtomSampler(double lambda_n, DurationLaw law, RateLaw rate, double T);

  double total_intensity() const { return total_; }
  double horizon() const { return T_; }
  const DurationLaw& law() const { return law_; }
  const RateLaw& rate() const { return rate_; }

  Atom draw(RngStream& rng) const;

  /// Draws the count and every atom, handing each to sink(const Atom&).
  template <class Sink>
  std::int64_t generate(RngStream& rng, Sink&& sink) const {
    const std::int64_t count = rng.poisson(total_);
    for (std::int64_t i = 0; i < count; ++i) sink(draw(rng));
    return count;
  }

 private:
  double lambda_n_;
  DurationLaw law_;
  RateLaw rate_;
  double T_;
  double total_;
  double plain_weight_;  // T * mass / (T * mass + int u nu)
};

std::vector<Atom> sample_atoms(double lambda_n, const DurationLaw& law, const RateLaw& rate,
                               double T, RngStream& rng);

/// a * lambda_n * E R * int int u increment(t, s, u) ds nu(du) in closed form:
/// the s-integral of the increment is t f(1) for every pulse, so the value is
/// a lambda_n E R t f(1) int u nu(du).
double compensator_value(const Pulse& pulse, double a, double lambda_n, double rate_mean,
                         const DurationLaw& law, double t);

/// Same quantity by 2-D quadrature against the duration measure.
QuadratureResult<double> compensator_by_quadrature(const Pulse& pulse, double a,
                                                   double lambda_n, double rate_mean,
                                                   const DurationLaw& law, double t,
                                                   const QuadratureSettings& qs = {});

/// lambda_n E (aR)^2 int int_{u < u_cut} u^2 increment^2 ds u^(-delta-1) du:
/// variance of the compensated mass that a lower truncation at u_cut drops.
/// rate_sq is E (aR)^2. Requires 0 < u_cut < u_max.
double truncation_variance(const Pulse& pulse, const PowerLawInfinite& law, double lambda_n,
                           double rate_sq, double t, double u_cut,
                           const QuadratureSettings& qs = {});

/// Same for the mass above the upper truncation u_max.
double upper_truncation_variance(const Pulse& pulse, const PowerLawInfinite& law,
                                 double lambda_n, double rate_sq, double t,
                                 const QuadratureSettings& qs = {});

}  // namespace isp
