#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace isp {

struct EcfCurve {
  std::vector<double> xi;
  std::vector<std::complex<double>> phi;
  std::size_t n_samples = 0;
};

/// (1/N) sum exp(i xi X_k) on a positive increasing grid.
EcfCurve empirical_cf(const std::vector<double>& samples, const std::vector<double>& xi_grid);

/// sup_k |phi_hat(xi_k) - phi(xi_k)|.
double ecf_sup_gap(const EcfCurve& ecf, const std::function<std::complex<double>(double)>& phi);

struct HurstEstimate {
  double H_hat;
  double stderr;
  double r_squared;
};

/// Least-squares slope of log v against log t, halved. Times must be > 0.
HurstEstimate estimate_hurst_from_variances(const std::vector<double>& times,
                                            const std::vector<double>& variances);

/// Aggregated variance over the grid times > 0 of an M x K path matrix.
/// Needs at least 5 positive times and M >= 50.
HurstEstimate estimate_hurst(const Eigen::MatrixXd& paths, const std::vector<double>& times);

struct TailIndexEstimate {
  double delta_hat;
  double beta_hat;
  double stderr_delta;
};

/// Log-spaced grid on [0.1, 3] / IQR(samples).
std::vector<double> stable_regression_grid(const std::vector<double>& samples, int points = 20);

/// Slope of log(-log|phi_hat|) against log xi gives delta_hat; beta_hat is the
/// through-origin fit of arg phi_hat = beta tan(pi delta_hat/2) (-log|phi_hat|).
TailIndexEstimate estimate_stable_index(const std::vector<double>& samples,
                                        const std::vector<double>& xi_grid);
TailIndexEstimate estimate_stable_index(const std::vector<double>& samples);

struct KsResult {
  double statistic;
  double p_value;
};

/// Asymptotic Kolmogorov tail P(K > x).
double kolmogorov_survival(double x);

/// One-sample KS: D = max over distinct sample values v of
/// max(F_n(v) - F(v), F(v-) - F_n(v-)). left_cdf gives F(v-) for step
/// references and defaults to cdf. p-value uses the Stephens correction.
KsResult ks_statistic(const std::vector<double>& samples,
                      const std::function<double(double)>& cdf,
                      const std::function<double(double)>& left_cdf = nullptr);

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

/// Unbiased sample covariance of the columns of an M x K matrix.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& paths);

double mean(const std::vector<double>& x);
/// Unbiased sample variance.
double variance(const std::vector<double>& x);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace isp
