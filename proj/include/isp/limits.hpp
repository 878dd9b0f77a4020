#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "isp/measures.hpp"
#include "isp/pulses.hpp"
#include "isp/quadrature.hpp"
#include "isp/rng.hpp"

namespace isp {

/// e^{iy} - 1 - iy without cancellation.
std::complex<double> expi_m1_mi(double y);
/// e^{iy} - 1 without cancellation.
std::complex<double> expi_m1(double y);

// ---------------------------------------------------------------------------
// Gaussian limit

struct FbmModel {
  double sigma2;
  double H;
};

/// lambda E R^2 int int [f((1-s)/u) - f(-s/u)]^2 u^(1-delta) ds du.
/// Plateau pulses need delta < 2, compact ones delta < 3.
double fbm_variance(const Pulse& pulse, double delta, double lambda, double er2,
                    const QuadratureSettings& qs = {});

/// Closed form of the integral above for the linear plateau pulse:
/// lambda E R^2 * 2 / (delta (delta-1) (2-delta) (3-delta)).
double linear_plateau_sigma2(double delta, double lambda, double er2);

/// (3 - delta) / 2 for delta in (1, 3).
double hurst(double delta);

FbmModel fbm_model(const Pulse& pulse, double delta, double lambda, double er2,
                   const QuadratureSettings& qs = {});

double fbm_covariance(const FbmModel& model, double t1, double t2);

/// Matrix of m-integrals int int u^2 inc(t_j) inc(t_k) ds m(du) (no rate factor).
Eigen::MatrixXd shot_covariance(const Pulse& pulse, const PowerMeasure& m,
                                const std::vector<double>& times,
                                const QuadratureSettings& qs = {});

// ---------------------------------------------------------------------------
// Stable limit

/// Scale of the stable law with Levy measure x^(-1-delta) dx on x > 0:
/// [-Gamma(2-delta) cos(pi delta/2) / (delta (delta-1))]^(1/delta).
double stable_scale(double delta);
using GammaFn = double (*)(double);
/// Same with a caller-supplied Gamma function.
double stable_scale(double delta, GammaFn gamma);

/// Scale for the two-sided measure |x|^(-1-delta) dx, which carries the
/// extra factor 2 inside the bracket.
double symmetric_stable_scale(double delta);

struct StableModel {
  double delta;
  double base_scale;
  double C1;
  double C2;
  double lambda;
  double beta;
  double total_scale;
};

/// Throws DomainError if R = 0 a.s.
StableModel stable_model(double delta, double lambda, const RateLaw& rate);

/// exp(-t s^delta |xi|^delta [1 - i beta sign(xi) tan(pi delta/2)]), s = total_scale.
std::complex<double> stable_char_function(const StableModel& model, double t, double xi);

/// total_scale t^(1/delta) S(delta, beta) by the Chambers-Mallows-Stuck
/// transform in the same tan(pi delta/2) parameterization. Two uniforms per draw.
double sample_stable(const StableModel& model, double t, RngStream& rng);

// ---------------------------------------------------------------------------
// Finite-n characteristic functions

/// log E exp(i xi Z(t)) for Z(t) = sum a r u increment over a Poisson measure
/// with mean ds m(du) gamma(dr), m carrying the intensity in coeff. With
/// compensated = true the integrand is e^{ix} - 1 - ix (centered or
/// compensated process), otherwise e^{ix} - 1 (raw). Rate law must be discrete.
std::complex<double> prelimit_log_cf(const Pulse& pulse, const PowerMeasure& m,
                                     const RateLaw& rate, double a, bool compensated, double t,
                                     double xi, const QuadratureSettings& qs = {});

/// exp of prelimit_log_cf with m = lambda_n * duration law.
std::complex<double> prelimit_char_function(const Pulse& pulse, double lambda_n,
                                            const DurationLaw& law, const RateLaw& rate,
                                            double a, bool compensated, double t, double xi,
                                            const QuadratureSettings& qs = {});

// ---------------------------------------------------------------------------
// Integral bound and scalar limit

/// M^(1+k) t^(2+k-d) [1/((2+k)(2+k-d)) + 1/((2+k)d) + 1/((2+k-d)(1+k-d))
///                    + 1/(d(2+k-d)) + 1/(d(d-1))]. Needs 1 + kappa > delta > 1.
double lemma1_bound(double M, double kappa, double delta, double t);

/// int int |u increment(t, s, u)|^(1+kappa) ds u^(-delta-1) du.
QuadratureResult<double> lemma1_integral(const Pulse& pulse, double kappa, double delta,
                                         double t, const QuadratureSettings& qs = {});

/// x^2 (e^{ic/x} - 1 - ic/x), x > 0.
std::complex<double> lemma2_value(double c, double x);

}  // namespace isp
