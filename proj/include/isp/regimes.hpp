#pragma once

#include <string>
#include <variant>

#include "isp/measures.hpp"

namespace isp {

struct Unscaled {};
/// Intermediate connection rate.
struct Intermediate {
  double n = 1.0;
};
/// Fast connection rate, probability duration law.
struct FastProbability {
  double n = 1.0;
};
/// Fast connection rate, infinite power-law measure.
struct FastSimple {
  double n = 1.0;
};
/// Slow connection rate, probability duration law.
struct SlowProbability {
  double n = 1.0;
  double alpha = 0.75;
};
/// Slow connection rate, infinite power-law measure.
struct SlowSimple {
  double n = 1.0;
};

using ScalingRegime =
    std::variant<Unscaled, Intermediate, FastProbability, FastSimple, SlowProbability, SlowSimple>;

/// "none", "thm1" ... "thm5".
std::string regime_name(const ScalingRegime& regime);
/// n for scaled regimes, 1 for Unscaled.
double regime_n(const ScalingRegime& regime);
/// Same regime with n replaced (Unscaled is returned unchanged).
ScalingRegime with_n(const ScalingRegime& regime, double n);
bool is_stable_regime(const ScalingRegime& regime);
bool is_fbm_regime(const ScalingRegime& regime);

/// Throws ConfigError when (regime, delta) is inadmissible.
void check_admissible(const ScalingRegime& regime, double delta);

/// Factor applied to every sampled rate.
double rate_multiplier(const ScalingRegime& regime, double delta);

struct ScaledIntensity {
  double lambda_n;
  DurationLaw law;
};

/// Effective intensity and duration law. Probability regimes need a Pareto
/// law, simple regimes a truncated power law; otherwise ConfigError.
ScaledIntensity intensity(const ScalingRegime& regime, double lambda, const DurationLaw& law);

enum class Compensation { Raw, Centered, Compensated };

std::string compensation_name(Compensation c);

/// Centered for probability laws, Compensated for infinite measures.
Compensation compensation_mode(const ScalingRegime& regime, const DurationLaw& law);

/// lambda_n / n^(delta - 1).
double expected_active_effects(double lambda_n, double n, double delta);

}  // namespace isp
