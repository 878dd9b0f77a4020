#include "isp/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isp/errors.hpp"

namespace isp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Inverse of the normalized tail of c u^(-p-1) du on [a, b]: returns u with
// tail mass fraction v, v in (0, 1]. b may be +inf.
double truncated_power_quantile(double p, double a, double b, double v) {
  const double ap = std::pow(a, -p);
  const double bp = std::isinf(b) ? 0.0 : std::pow(b, -p);
  return std::pow(bp + v * (ap - bp), -1.0 / p);
}

// E R^p 1{R > 0} for R ~ N(m, s^2), s > 0.
double gaussian_positive_moment(double m, double s, double p) {
  std::vector<double> cuts{0.0};
  for (double k : {-12.0, -4.0, 0.0, 4.0, 12.0, 40.0}) {
    const double c = m + k * s;
    if (c > 0.0) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (cuts.size() < 2) return 0.0;
  const double norm = 1.0 / (s * std::sqrt(2.0 * std::numbers::pi));
  auto integrand = [&](double r) {
    const double z = (r - m) / s;
    return std::pow(r, p) * norm * std::exp(-0.5 * z * z);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += ts.integrate(integrand, cuts[i], cuts[i + 1], 1e-14);
  }
  return total;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

// ---------------------------------------------------------------------------

double power_integral(double p, double a, double b) {
  if (b <= a) return 0.0;
  if (std::abs(p + 1.0) < 1e-14) {
    if (a <= 0.0 || std::isinf(b)) return kInf;
    return std::log(b / a);
  }
  const double q = p + 1.0;
  if (q > 0.0) {
    if (std::isinf(b)) return kInf;
    return (std::pow(b, q) - (a > 0.0 ? std::pow(a, q) : 0.0)) / q;
  }
  if (a <= 0.0) return kInf;
  const double hi = std::isinf(b) ? 0.0 : std::pow(b, q);
  return (hi - std::pow(a, q)) / q;
}

double PowerMeasure::density(double u) const {
  if (u <= lo || u > hi) return 0.0;
  return coeff * std::pow(u, -delta - 1.0);
}

PowerMeasure to_power_measure(const DurationLaw& law) {
  return std::visit(
      Overloaded{[](const ParetoDuration& p) {
                   return PowerMeasure{p.delta * std::pow(p.b, p.delta), p.delta, p.b, kInf};
                 },
                 [](const PowerLawInfinite& p) {
                   return PowerMeasure{1.0, p.delta, p.u_min, p.u_max};
                 }},
      law);
}

PowerMeasure infinite_measure(double delta) { return PowerMeasure{1.0, delta, 0.0, kInf}; }

void validate(const DurationLaw& law) {
  std::visit(Overloaded{[](const ParetoDuration& p) {
                          require(p.b > 0.0 && std::isfinite(p.b), "pareto: b must be > 0");
                          require(p.delta > 1.0 && std::isfinite(p.delta),
                                  "pareto: delta must be > 1 (finite mean)");
                        },
                        [](const PowerLawInfinite& p) {
                          require(p.delta > 1.0 && std::isfinite(p.delta),
                                  "powerlaw: delta must be > 1");
                          require(p.u_min > 0.0, "powerlaw: u_min must be > 0");
                          require(p.u_max > p.u_min && std::isfinite(p.u_max),
                                  "powerlaw: need u_min < u_max < inf");
                        }},
             law);
}

double tail_index(const DurationLaw& law) {
  return std::visit([](const auto& p) { return p.delta; }, law);
}

double tail_probability(const DurationLaw& law, double u) {
  if (!(u > 0.0)) throw DomainError("tail_probability: u must be > 0");
  return std::visit(Overloaded{[u](const ParetoDuration& p) {
                                 return std::min(1.0, std::pow(p.b / u, p.delta));
                               },
                               [u](const PowerLawInfinite& p) {
                                 if (u >= p.u_max) return 0.0;
                                 const double lo = std::max(u, p.u_min);
                                 return (std::pow(lo, -p.delta) - std::pow(p.u_max, -p.delta)) /
                                        p.delta;
                               }},
                    law);
}

double normalized_cdf(const DurationLaw& law, double u) {
  if (u <= 0.0) return 0.0;
  const double mass = duration_moments(law).mass;
  return 1.0 - tail_probability(law, u) / mass;
}

DurationMoments duration_moments(const DurationLaw& law) {
  return std::visit(
      Overloaded{[](const ParetoDuration& p) {
                   const double mean = p.delta * p.b / (p.delta - 1.0);
                   const double second =
                       p.delta > 2.0 ? p.delta * p.b * p.b / (p.delta - 2.0) : kInf;
                   return DurationMoments{mean, second, 1.0};
                 },
                 [](const PowerLawInfinite& p) {
                   return DurationMoments{power_integral(-p.delta, p.u_min, p.u_max),
                                          power_integral(1.0 - p.delta, p.u_min, p.u_max),
                                          power_integral(-p.delta - 1.0, p.u_min, p.u_max)};
                 }},
      law);
}

DurationLaw scale_duration(const DurationLaw& law, double n) {
  if (!(n >= 1.0)) throw DomainError("scale_duration: n must be >= 1");
  const auto* p = std::get_if<ParetoDuration>(&law);
  if (!p) {
    throw UnsupportedVariant("scale_duration: only defined for pareto durations");
  }
  return ParetoDuration{p->b / n, p->delta};
}

double duration_quantile(const DurationLaw& law, double v) {
  if (!(v > 0.0 && v <= 1.0)) throw DomainError("duration_quantile: v must lie in (0,1]");
  return std::visit(Overloaded{[v](const ParetoDuration& p) {
                                 return p.b * std::pow(v, -1.0 / p.delta);
                               },
                               [v](const PowerLawInfinite& p) {
                                 return truncated_power_quantile(p.delta, p.u_min, p.u_max, v);
                               }},
                    law);
}

double sample_duration(const DurationLaw& law, RngStream& rng) {
  return duration_quantile(law, rng.uniform_pos());
}

double sample_size_biased_duration(const DurationLaw& law, RngStream& rng) {
  const double v = rng.uniform_pos();
  return std::visit(Overloaded{[v](const ParetoDuration& p) {
                                 return p.b * std::pow(v, -1.0 / (p.delta - 1.0));
                               },
                               [v](const PowerLawInfinite& p) {
                                 return truncated_power_quantile(p.delta - 1.0, p.u_min,
                                                                 p.u_max, v);
                               }},
                    law);
}

// ---------------------------------------------------------------------------

void validate(const RateLaw& law) {
  std::visit(
      Overloaded{[](const TwoPointRate& r) {
                   require(r.p >= 0.0 && r.p <= 1.0, "twopoint: p must be in [0,1]");
                   require(r.r_plus > 0.0 && r.r_minus > 0.0,
                           "twopoint: r_plus and r_minus must be > 0");
                 },
                 [](const GaussianRate& r) {
                   require(r.std >= 0.0 && std::isfinite(r.std), "gaussian: std must be >= 0");
                   require(std::isfinite(r.mean), "gaussian: mean must be finite");
                 },
                 [](const DiscreteRate& r) {
                   require(!r.atoms.empty(), "discrete: atoms must be non-empty");
                   double total = 0.0;
                   for (const auto& a : r.atoms) {
                     require(a.prob >= 0.0 && a.prob <= 1.0,
                             "discrete: probabilities must be in [0,1]");
                     require(std::isfinite(a.value), "discrete: values must be finite");
                     total += a.prob;
                   }
                   if (std::abs(total - 1.0) > 1e-12) {
                     std::ostringstream os;
                     os << "discrete: probabilities sum to " << total << ", expected 1";
                     throw ConfigError(os.str());
                   }
                 }},
      law);
}

std::vector<RateAtom> rate_atoms(const RateLaw& law) {
  return std::visit(
      Overloaded{[](const TwoPointRate& r) {
                   return std::vector<RateAtom>{{r.r_plus, r.p}, {-r.r_minus, 1.0 - r.p}};
                 },
                 [](const GaussianRate&) -> std::vector<RateAtom> {
                   throw UnsupportedVariant("rate_atoms: gaussian rate law is not discrete");
                 },
                 [](const DiscreteRate& r) { return r.atoms; }},
      law);
}

std::pair<double, double> signed_abs_moments(const RateLaw& law, double p) {
  if (const auto* g = std::get_if<GaussianRate>(&law)) {
    if (g->std == 0.0) {
      const double v = std::pow(std::abs(g->mean), p);
      if (g->mean > 0.0) return {v, 0.0};
      if (g->mean < 0.0) return {0.0, v};
      return {0.0, 0.0};
    }
    return {gaussian_positive_moment(g->mean, g->std, p),
            gaussian_positive_moment(-g->mean, g->std, p)};
  }
  double pos = 0.0;
  double neg = 0.0;
  for (const auto& a : rate_atoms(law)) {
    if (a.value > 0.0) pos += a.prob * std::pow(a.value, p);
    if (a.value < 0.0) neg += a.prob * std::pow(-a.value, p);
  }
  return {pos, neg};
}

double rate_mean(const RateLaw& law) {
  if (const auto* g = std::get_if<GaussianRate>(&law)) return g->mean;
  double m = 0.0;
  for (const auto& a : rate_atoms(law)) m += a.prob * a.value;
  return m;
}

double rate_second_moment(const RateLaw& law) {
  if (const auto* g = std::get_if<GaussianRate>(&law)) return g->mean * g->mean + g->std * g->std;
  double m = 0.0;
  for (const auto& a : rate_atoms(law)) m += a.prob * a.value * a.value;
  return m;
}

RateMoments rate_moments(const RateLaw& law, double delta, double kappa) {
  if (!(delta > 1.0 && delta <= 2.0)) throw DomainError("rate_moments: delta must be in (1,2]");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw DomainError("rate_moments: kappa must be in (0,1]");
  const auto [c1, c2] = signed_abs_moments(law, delta);
  const auto [a1, a2] = signed_abs_moments(law, 1.0 + kappa);
  return RateMoments{rate_mean(law), a1 + a2, rate_second_moment(law), c1, c2};
}

double sample_rate(const RateLaw& law, RngStream& rng) {
  return std::visit(Overloaded{[&rng](const TwoPointRate& r) {
                                 return rng.uniform() < r.p ? r.r_plus : -r.r_minus;
                               },
                               [&rng](const GaussianRate& r) {
                                 return r.mean + r.std * rng.normal();
                               },
                               [&rng](const DiscreteRate& r) {
                                 const double v = rng.uniform();
                                 double acc = 0.0;
                                 for (const auto& a : r.atoms) {
                                   acc += a.prob;
                                   if (v < acc) return a.value;
                                 }
                                 return r.atoms.back().value;
                               }},
                    law);
}

}  // namespace isp
