#include "isp/limits.hpp"

#include <cmath>
#include <numbers>

#include "isp/errors.hpp"

namespace isp {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(y) - y by its Taylor series for |y| < 1.
double sin_minus_id(double y) {
  if (std::abs(y) >= 1.0) return std::sin(y) - y;
  const double y2 = y * y;
  double term = -y * y2 / 6.0;
  double sum = term;
  for (int k = 2; k < 12; ++k) {
    term *= -y2 / ((2.0 * k) * (2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

double one_minus_cos(double y) {
  const double h = std::sin(0.5 * y);
  return 2.0 * h * h;
}

}  // namespace

std::complex<double> expi_m1_mi(double y) { return {-one_minus_cos(y), sin_minus_id(y)}; }

std::complex<double> expi_m1(double y) { return {-one_minus_cos(y), std::sin(y)}; }

// ---------------------------------------------------------------------------

double hurst(double delta) {
  if (!(delta > 1.0 && delta < 3.0)) throw DomainError("hurst: delta must lie in (1,3)");
  return 0.5 * (3.0 - delta);
}

double fbm_variance(const Pulse& pulse, double delta, double lambda, double er2,
                    const QuadratureSettings& qs) {
  hurst(delta);
  if (pulse.plateau_value() != 0.0 && !(delta < 2.0)) {
    throw DomainError("fbm_variance: pulses with f(1) != 0 need delta < 2");
  }
  if (lambda == 0.0 || er2 == 0.0) return 0.0;
  auto g = [&](double s, double u) {
    const double v = u * pulse.increment(1.0, s, u);
    return v * v;
  };
  return lambda * er2 *
         integrate_su(g, infinite_measure(delta), {1.0}, pulse.breakpoints(), qs).value;
}

double linear_plateau_sigma2(double delta, double lambda, double er2) {
  if (!(delta > 1.0 && delta < 2.0)) {
    throw DomainError("linear_plateau_sigma2: delta must lie in (1,2)");
  }
  return lambda * er2 * 2.0 / (delta * (delta - 1.0) * (2.0 - delta) * (3.0 - delta));
}

FbmModel fbm_model(const Pulse& pulse, double delta, double lambda, double er2,
                   const QuadratureSettings& qs) {
  return {fbm_variance(pulse, delta, lambda, er2, qs), hurst(delta)};
}

double fbm_covariance(const FbmModel& model, double t1, double t2) {
  if (!(t1 >= 0.0 && t2 >= 0.0)) throw DomainError("fbm_covariance: times must be >= 0");
  const double h2 = 2.0 * model.H;
  return 0.5 * model.sigma2 *
         (std::pow(t1, h2) + std::pow(t2, h2) - std::pow(std::abs(t1 - t2), h2));
}

Eigen::MatrixXd shot_covariance(const Pulse& pulse, const PowerMeasure& m,
                                const std::vector<double>& times,
                                const QuadratureSettings& qs) {
  const auto k = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, k);
  const auto bps = pulse.breakpoints();
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double ti = times[i];
      const double tj = times[j];
      if (ti == 0.0 || tj == 0.0) continue;
      auto g = [&](double s, double u) {
        return u * u * pulse.increment(ti, s, u) * pulse.increment(tj, s, u);
      };
      const double v = integrate_su(g, m, {ti, tj}, bps, qs).value;
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

// ---------------------------------------------------------------------------

namespace {

double stable_bracket(double delta, GammaFn gamma = std::tgamma) {
  if (!(delta > 1.0 && delta < 2.0)) throw DomainError("stable scale: delta must lie in (1,2)");
  const double b = -gamma(2.0 - delta) * std::cos(kPi * delta / 2.0) /
                   (delta * (delta - 1.0));
  if (!(b > 0.0)) throw NumericalError("stable scale: bracket not positive", b, 0.0);
  return b;
}

}  // namespace

double stable_scale(double delta) { return std::pow(stable_bracket(delta), 1.0 / delta); }

double stable_scale(double delta, GammaFn gamma) {
  return std::pow(stable_bracket(delta, gamma), 1.0 / delta);
}

double symmetric_stable_scale(double delta) {
  return std::pow(2.0 * stable_bracket(delta), 1.0 / delta);
}

StableModel stable_model(double delta, double lambda, const RateLaw& rate) {
  validate(rate);
  if (!(lambda >= 0.0)) throw DomainError("stable_model: lambda must be >= 0");
  const auto [c1, c2] = signed_abs_moments(rate, delta);
  if (!(c1 + c2 > 0.0)) throw DomainError("stable_model: degenerate rate law (R = 0 a.s.)");
  StableModel m{};
  m.delta = delta;
  m.base_scale = stable_scale(delta);
  m.C1 = c1;
  m.C2 = c2;
  m.lambda = lambda;
  m.beta = (c1 - c2) / (c1 + c2);
  m.total_scale = m.base_scale * std::pow(lambda * (c1 + c2), 1.0 / delta);
  return m;
}

std::complex<double> stable_char_function(const StableModel& model, double t, double xi) {
  if (!(t >= 0.0)) throw DomainError("stable_char_function: t must be >= 0");
  if (xi == 0.0 || t == 0.0) return {1.0, 0.0};
  const double a = t * std::pow(model.total_scale * std::abs(xi), model.delta);
  const double sgn = xi > 0.0 ? 1.0 : -1.0;
  const double tn = std::tan(kPi * model.delta / 2.0);
  return std::exp(std::complex<double>(-a, a * model.beta * sgn * tn));
}

double sample_stable(const StableModel& model, double t, RngStream& rng) {
  const double alpha = model.delta;
  if (!(alpha > 1.0 && alpha <= 2.0)) throw DomainError("sample_stable: delta must lie in (1,2]");
  const double v = kPi * (rng.uniform_pos() - 0.5);
  const double w = rng.exponential();
  const double tn = std::tan(kPi * alpha / 2.0);
  const double bt = model.beta * tn;
  const double b = std::atan(bt) / alpha;
  const double s = std::pow(1.0 + bt * bt, 1.0 / (2.0 * alpha));
  const double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                   std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
  return model.total_scale * std::pow(t, 1.0 / alpha) * x;
}

// ---------------------------------------------------------------------------

std::complex<double> prelimit_log_cf(const Pulse& pulse, const PowerMeasure& m,
                                     const RateLaw& rate, double a, bool compensated, double t,
                                     double xi, const QuadratureSettings& qs) {
  if (!(t >= 0.0)) throw DomainError("prelimit_log_cf: t must be >= 0");
  if (!compensated && !(m.lo > 0.0)) {
    throw DomainError("prelimit_log_cf: raw form needs a measure of finite mass");
  }
  if (xi == 0.0 || t == 0.0) return {0.0, 0.0};
  std::complex<double> total{};
  const auto bps = pulse.breakpoints();
  for (const auto& atom : rate_atoms(rate)) {
    if (atom.prob == 0.0 || atom.value == 0.0) continue;
    const double k = xi * a * atom.value;
    auto g = [&](double s, double u) {
      const double y = k * u * pulse.increment(t, s, u);
      return compensated ? expi_m1_mi(y) : expi_m1(y);
    };
    total += atom.prob * integrate_su(g, m, {t}, bps, qs).value;
  }
  return total;
}

std::complex<double> prelimit_char_function(const Pulse& pulse, double lambda_n,
                                            const DurationLaw& law, const RateLaw& rate,
                                            double a, bool compensated, double t, double xi,
                                            const QuadratureSettings& qs) {
  PowerMeasure m = to_power_measure(law);
  m.coeff *= lambda_n;
  return std::exp(prelimit_log_cf(pulse, m, rate, a, compensated, t, xi, qs));
}

// ---------------------------------------------------------------------------

double lemma1_bound(double M, double kappa, double delta, double t) {
  if (!(delta > 1.0)) throw DomainError("lemma1_bound: delta must be > 1");
  if (!(kappa > 0.0)) throw DomainError("lemma1_bound: kappa must be > 0");
  if (!(1.0 + kappa > delta)) throw DomainError("lemma1_bound: need 1 + kappa > delta");
  if (!(M >= 0.0) || !(t >= 0.0)) throw DomainError("lemma1_bound: M and t must be >= 0");
  const double k = kappa;
  const double d = delta;
  const double bracket = 1.0 / ((2 + k) * (2 + k - d)) + 1.0 / ((2 + k) * d) +
                         1.0 / ((2 + k - d) * (1 + k - d)) + 1.0 / (d * (2 + k - d)) +
                         1.0 / (d * (d - 1));
  return std::pow(M, 1 + k) * std::pow(t, 2 + k - d) * bracket;
}

QuadratureResult<double> lemma1_integral(const Pulse& pulse, double kappa, double delta,
                                         double t, const QuadratureSettings& qs) {
  if (!(1.0 + kappa > delta && delta > 1.0)) {
    throw DomainError("lemma1_integral: need 1 + kappa > delta > 1");
  }
  auto g = [&](double s, double u) {
    return std::pow(std::abs(u * pulse.increment(t, s, u)), 1.0 + kappa);
  };
  return integrate_su(g, infinite_measure(delta), {t}, pulse.breakpoints(), qs);
}

std::complex<double> lemma2_value(double c, double x) {
  if (!(x > 0.0)) throw DomainError("lemma2_value: x must be > 0");
  return x * x * expi_m1_mi(c / x);
}

}  // namespace isp
