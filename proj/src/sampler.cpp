#include "isp/sampler.hpp"

#include <cmath>

#include "isp/errors.hpp"

namespace isp {

double contributing_intensity(double lambda_n, const DurationLaw& law, double T) {
  validate(law);
  if (!(T >= 0.0)) throw DomainError("contributing_intensity: T must be >= 0");
  if (!(lambda_n >= 0.0)) throw DomainError("contributing_intensity: lambda_n must be >= 0");
  const auto mom = duration_moments(law);
  return lambda_n * (T * mom.mass + mom.mean);
}

AtomSampler::AtomSampler(double lambda_n, DurationLaw law, RateLaw rate, double T)
    : lambda_n_(lambda_n), law_(std::move(law)), rate_(std::move(rate)), T_(T) {
  validate(law_);
  validate(rate_);
  if (!(T_ > 0.0) || !std::isfinite(T_)) throw ConfigError("sampler: horizon T must be > 0");
  if (!(lambda_n_ >= 0.0) || !std::isfinite(lambda_n_)) {
    throw ConfigError("sampler: lambda_n must be finite and >= 0");
  }
  const auto mom = duration_moments(law_);
  if (!std::isfinite(mom.mean)) throw ConfigError("sampler: duration law has infinite mean");
  total_ = lambda_n_ * (T_ * mom.mass + mom.mean);
  plain_weight_ = T_ * mom.mass / (T_ * mom.mass + mom.mean);
}

Atom AtomSampler::draw(RngStream& rng) const {
  const bool plain = rng.uniform() < plain_weight_;
  const double u = plain ? sample_duration(law_, rng) : sample_size_biased_duration(law_, rng);
  // uniform() is in [0, 1), so s lands in (-u, T].
  const double s = T_ - (T_ + u) * rng.uniform();
  const double r = sample_rate(rate_, rng);
  return {s, u, r};
}

std::vector<Atom> sample_atoms(double lambda_n, const DurationLaw& law, const RateLaw& rate,
                               double T, RngStream& rng) {
  std::vector<Atom> atoms;
  if (lambda_n == 0.0) return atoms;
  AtomSampler sampler(lambda_n, law, rate, T);
  sampler.generate(rng, [&](const Atom& a) { atoms.push_back(a); });
  return atoms;
}

double compensator_value(const Pulse& pulse, double a, double lambda_n, double rate_mean,
                         const DurationLaw& law, double t) {
  if (!(t >= 0.0)) throw DomainError("compensator_value: t must be >= 0");
  if (rate_mean == 0.0 || lambda_n == 0.0 || a == 0.0 || t == 0.0) return 0.0;
  return a * lambda_n * rate_mean * t * pulse.plateau_value() * duration_moments(law).mean;
}

QuadratureResult<double> compensator_by_quadrature(const Pulse& pulse, double a,
                                                   double lambda_n, double rate_mean,
                                                   const DurationLaw& law, double t,
                                                   const QuadratureSettings& qs) {
  if (!(t >= 0.0)) throw DomainError("compensator_by_quadrature: t must be >= 0");
  const PowerMeasure m = to_power_measure(law);
  auto g = [&](double s, double u) { return u * pulse.increment(t, s, u); };
  auto res = integrate_su(g, m, {t}, pulse.breakpoints(), qs);
  const double k = a * lambda_n * rate_mean;
  return {k * res.value, std::abs(k) * res.error, res.evaluations};
}

namespace {

double second_moment_integral(const Pulse& pulse, const PowerMeasure& m, double t,
                              const QuadratureSettings& qs) {
  auto g = [&](double s, double u) {
    const double v = u * pulse.increment(t, s, u);
    return v * v;
  };
  return integrate_su(g, m, {t}, pulse.breakpoints(), qs).value;
}

}  // namespace

double truncation_variance(const Pulse& pulse, const PowerLawInfinite& law, double lambda_n,
                           double rate_sq, double t, double u_cut,
                           const QuadratureSettings& qs) {
  validate(DurationLaw{law});
  if (!(u_cut > 0.0 && u_cut < law.u_max)) {
    throw DomainError("truncation_variance: u_cut must lie in (0, u_max)");
  }
  if (t == 0.0 || lambda_n == 0.0 || rate_sq == 0.0) return 0.0;
  return lambda_n * rate_sq *
         second_moment_integral(pulse, PowerMeasure{1.0, law.delta, 0.0, u_cut}, t, qs);
}

double upper_truncation_variance(const Pulse& pulse, const PowerLawInfinite& law,
                                 double lambda_n, double rate_sq, double t,
                                 const QuadratureSettings& qs) {
  validate(DurationLaw{law});
  if (t == 0.0 || lambda_n == 0.0 || rate_sq == 0.0) return 0.0;
  return lambda_n * rate_sq *
         second_moment_integral(pulse, PowerMeasure{1.0, law.delta, law.u_max, kInf}, t, qs);
}

}  // namespace isp
