#include "isp/regimes.hpp"

#include <cmath>
#include <sstream>

#include "isp/errors.hpp"

namespace isp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

const ParetoDuration& need_pareto(const DurationLaw& law, const ScalingRegime& regime) {
  const auto* p = std::get_if<ParetoDuration>(&law);
  if (!p) {
    throw ConfigError("regime " + regime_name(regime) + " requires a pareto duration law");
  }
  return *p;
}

void need_powerlaw(const DurationLaw& law, const ScalingRegime& regime) {
  if (!std::holds_alternative<PowerLawInfinite>(law)) {
    throw ConfigError("regime " + regime_name(regime) + " requires a powerlaw duration measure");
  }
}

double h_const(const ParetoDuration& p) { return p.delta * std::pow(p.b, p.delta); }

}  // namespace

std::string regime_name(const ScalingRegime& regime) {
  return std::visit(Overloaded{[](const Unscaled&) { return "none"; },
                               [](const Intermediate&) { return "thm1"; },
                               [](const FastProbability&) { return "thm2"; },
                               [](const FastSimple&) { return "thm3"; },
                               [](const SlowProbability&) { return "thm4"; },
                               [](const SlowSimple&) { return "thm5"; }},
                    regime);
}

double regime_n(const ScalingRegime& regime) {
  return std::visit(Overloaded{[](const Unscaled&) { return 1.0; },
                               [](const auto& r) { return r.n; }},
                    regime);
}

ScalingRegime with_n(const ScalingRegime& regime, double n) {
  return std::visit(Overloaded{[](const Unscaled& r) -> ScalingRegime { return r; },
                               [n](auto r) -> ScalingRegime {
                                 r.n = n;
                                 return r;
                               }},
                    regime);
}

bool is_stable_regime(const ScalingRegime& regime) {
  return std::holds_alternative<SlowProbability>(regime) ||
         std::holds_alternative<SlowSimple>(regime);
}

bool is_fbm_regime(const ScalingRegime& regime) {
  return std::holds_alternative<FastProbability>(regime) ||
         std::holds_alternative<FastSimple>(regime);
}

void check_admissible(const ScalingRegime& regime, double delta) {
  const double n = regime_n(regime);
  if (!(n >= 1.0) || !std::isfinite(n)) {
    throw ConfigError("regime " + regime_name(regime) + ": n must be >= 1");
  }
  if (std::holds_alternative<Unscaled>(regime)) {
    if (!(delta > 1.0)) throw ConfigError("regime none: delta must be > 1");
    return;
  }
  const double hi = std::holds_alternative<FastSimple>(regime) ? 3.0 : 2.0;
  if (!(delta > 1.0 && delta < hi)) {
    std::ostringstream os;
    os << "regime " << regime_name(regime) << ": delta=" << delta << " outside (1," << hi
       << ")";
    throw ConfigError(os.str());
  }
  if (const auto* s = std::get_if<SlowProbability>(&regime)) {
    if (!(s->alpha > 0.0 && s->alpha < delta)) {
      throw ConfigError("regime thm4: alpha must lie in (0, delta)");
    }
  }
}

double rate_multiplier(const ScalingRegime& regime, double delta) {
  check_admissible(regime, delta);
  return std::visit(Overloaded{[](const Unscaled&) { return 1.0; },
                               [](const Intermediate&) { return 1.0; },
                               [](const FastProbability& r) { return 1.0 / r.n; },
                               [](const FastSimple& r) { return 1.0 / r.n; },
                               [delta](const SlowProbability& r) {
                                 return std::pow(r.n, 1.0 - r.alpha / delta);
                               },
                               [](const SlowSimple& r) { return r.n; }},
                    regime);
}

ScaledIntensity intensity(const ScalingRegime& regime, double lambda, const DurationLaw& law) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
  validate(law);
  check_admissible(regime, tail_index(law));
  return std::visit(
      Overloaded{[&](const Unscaled&) { return ScaledIntensity{lambda, law}; },
                 [&](const Intermediate& r) {
                   const auto& p = need_pareto(law, regime);
                   return ScaledIntensity{lambda * std::pow(r.n, p.delta) / h_const(p),
                                          scale_duration(law, r.n)};
                 },
                 [&](const FastProbability& r) {
                   const auto& p = need_pareto(law, regime);
                   return ScaledIntensity{lambda * std::pow(r.n, 2.0 + p.delta) / h_const(p),
                                          scale_duration(law, r.n)};
                 },
                 [&](const FastSimple& r) {
                   need_powerlaw(law, regime);
                   return ScaledIntensity{lambda * r.n * r.n, law};
                 },
                 [&](const SlowProbability& r) {
                   // h is constant, so h(n^(alpha/delta)) = delta b^delta.
                   const auto& p = need_pareto(law, regime);
                   return ScaledIntensity{lambda * std::pow(r.n, r.alpha) / h_const(p),
                                          scale_duration(law, r.n)};
                 },
                 [&](const SlowSimple& r) {
                   need_powerlaw(law, regime);
                   return ScaledIntensity{lambda * std::pow(r.n, -tail_index(law)), law};
                 }},
      regime);
}

std::string compensation_name(Compensation c) {
  switch (c) {
    case Compensation::Raw:
      return "raw";
    case Compensation::Centered:
      return "centered";
    case Compensation::Compensated:
      return "compensated";
  }
  return "?";
}

Compensation compensation_mode(const ScalingRegime& regime, const DurationLaw& law) {
  if (std::holds_alternative<FastSimple>(regime) || std::holds_alternative<SlowSimple>(regime)) {
    return Compensation::Compensated;
  }
  if (std::holds_alternative<Unscaled>(regime) && std::holds_alternative<PowerLawInfinite>(law)) {
    return Compensation::Compensated;
  }
  return Compensation::Centered;
}

double expected_active_effects(double lambda_n, double n, double delta) {
  if (!(n >= 1.0)) throw DomainError("expected_active_effects: n must be >= 1");
  return lambda_n / std::pow(n, delta - 1.0);
}

}  // namespace isp
