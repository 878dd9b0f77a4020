#include "isp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "isp/errors.hpp"

namespace isp {

namespace {

struct LineFit {
  double slope;
  double intercept;
  double slope_se;
  double r2;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("regression: abscissae are all equal");
  LineFit f{};
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  f.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return f;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

}  // namespace

double mean(const std::vector<double>& x) {
  if (x.empty()) throw EstimationError("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw EstimationError("variance: need at least two samples");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

EcfCurve empirical_cf(const std::vector<double>& samples, const std::vector<double>& xi_grid) {
  if (samples.size() < 2) throw EstimationError("empirical_cf: need at least two samples");
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    if (!(xi_grid[i] > 0.0) || (i > 0 && !(xi_grid[i] > xi_grid[i - 1]))) {
      throw EstimationError("empirical_cf: xi grid must be positive and increasing");
    }
  }
  EcfCurve out;
  out.xi = xi_grid;
  out.n_samples = samples.size();
  out.phi.reserve(xi_grid.size());
  const auto n = static_cast<double>(samples.size());
  for (double xi : xi_grid) {
    double re = 0.0, im = 0.0;
    for (double x : samples) {
      re += std::cos(xi * x);
      im += std::sin(xi * x);
    }
    out.phi.emplace_back(re / n, im / n);
  }
  return out;
}

double ecf_sup_gap(const EcfCurve& ecf,
                   const std::function<std::complex<double>(double)>& phi) {
  double gap = 0.0;
  for (std::size_t i = 0; i < ecf.xi.size(); ++i) {
    gap = std::max(gap, std::abs(ecf.phi[i] - phi(ecf.xi[i])));
  }
  return gap;
}

HurstEstimate estimate_hurst_from_variances(const std::vector<double>& times,
                                            const std::vector<double>& variances) {
  if (times.size() != variances.size() || times.size() < 2) {
    throw EstimationError("estimate_hurst: need matching times and variances");
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw EstimationError("estimate_hurst: times must be > 0");
    if (!(variances[i] > 0.0)) {
      throw EstimationError("estimate_hurst: non-positive sample variance");
    }
    x.push_back(std::log(times[i]));
    y.push_back(std::log(variances[i]));
  }
  const LineFit f = fit_line(x, y);
  return {0.5 * f.slope, 0.5 * f.slope_se, f.r2};
}

HurstEstimate estimate_hurst(const Eigen::MatrixXd& paths, const std::vector<double>& times) {
  if (static_cast<std::size_t>(paths.cols()) != times.size()) {
    throw EstimationError("estimate_hurst: grid does not match path matrix");
  }
  if (paths.rows() < 50) throw EstimationError("estimate_hurst: need at least 50 paths");
  std::vector<double> t, v;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) continue;
    const auto col = paths.col(static_cast<Eigen::Index>(i));
    const double m = col.mean();
    const double var = (col.array() - m).square().sum() / static_cast<double>(paths.rows() - 1);
    t.push_back(times[i]);
    v.push_back(var);
  }
  if (t.size() < 5) throw EstimationError("estimate_hurst: need at least 5 positive times");
  return estimate_hurst_from_variances(t, v);
}

std::vector<double> stable_regression_grid(const std::vector<double>& samples, int points) {
  if (samples.size() < 4 || points < 2) throw EstimationError("stable grid: too few samples");
  std::vector<double> v = samples;
  std::sort(v.begin(), v.end());
  const double iqr = quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
  if (!(iqr > 0.0)) throw EstimationError("stable grid: zero interquartile range");
  std::vector<double> grid(points);
  const double lo = std::log(0.1 / iqr);
  const double hi = std::log(3.0 / iqr);
  for (int i = 0; i < points; ++i) grid[i] = std::exp(lo + (hi - lo) * i / (points - 1));
  return grid;
}

TailIndexEstimate estimate_stable_index(const std::vector<double>& samples,
                                        const std::vector<double>& xi_grid) {
  if (xi_grid.size() < 3) throw EstimationError("estimate_stable_index: need >= 3 frequencies");
  const EcfCurve ecf = empirical_cf(samples, xi_grid);
  std::vector<double> lx, ly, amp, phase;
  double prev = 0.0;
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    const double mod = std::abs(ecf.phi[i]);
    if (!(mod < 1.0) || !(mod > 0.0)) {
      throw EstimationError("estimate_stable_index: |phi_hat| outside (0,1)");
    }
    const double a = -std::log(mod);
    lx.push_back(std::log(xi_grid[i]));
    ly.push_back(std::log(a));
    amp.push_back(a);
    double arg = std::arg(ecf.phi[i]);
    if (i > 0) {
      while (arg - prev > std::numbers::pi) arg -= 2.0 * std::numbers::pi;
      while (arg - prev < -std::numbers::pi) arg += 2.0 * std::numbers::pi;
    }
    phase.push_back(arg);
    prev = arg;
  }
  const LineFit f = fit_line(lx, ly);
  TailIndexEstimate est{};
  est.delta_hat = f.slope;
  est.stderr_delta = f.slope_se;
  const double tn = std::tan(std::numbers::pi * est.delta_hat / 2.0);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    num += amp[i] * phase[i];
    den += amp[i] * amp[i];
  }
  est.beta_hat = (den > 0.0 && std::abs(tn) > 1e-12) ? num / (den * tn) : 0.0;
  return est;
}

TailIndexEstimate estimate_stable_index(const std::vector<double>& samples) {
  return estimate_stable_index(samples, stable_regression_grid(samples));
}

double kolmogorov_survival(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Jacobi-theta form converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double m = 2.0 * k - 1.0;
      s += std::exp(-m * m * pi2 / (8.0 * x * x));
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * s, 0.0, 1.0);
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

namespace {

double stephens_pvalue(double d, double n_eff) {
  const double rn = std::sqrt(n_eff);
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

}  // namespace

KsResult ks_statistic(const std::vector<double>& samples,
                      const std::function<double(double)>& cdf,
                      const std::function<double(double)>& left_cdf) {
  if (samples.size() < 10) throw EstimationError("ks_statistic: need at least 10 samples");
  std::vector<double> v = samples;
  std::sort(v.begin(), v.end());
  const auto n = static_cast<double>(v.size());
  const auto& left = left_cdf ? left_cdf : cdf;
  double d = 0.0;
  std::size_t i = 0;
  while (i < v.size()) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const double below = static_cast<double>(i) / n;  // F_n(v-)
    const double at = static_cast<double>(j) / n;     // F_n(v)
    d = std::max({d, at - cdf(v[i]), left(v[i]) - below});
    i = j;
  }
  d = std::clamp(d, 0.0, 1.0);
  return {d, stephens_pvalue(d, n)};
}

KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw EstimationError("ks_two_sample: samples too small");
  std::vector<double> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return {d, stephens_pvalue(d, n * m / (n + m))};
}

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& paths) {
  if (paths.rows() < 2) throw EstimationError("covariance_matrix: need at least two paths");
  const Eigen::RowVectorXd mu = paths.colwise().mean();
  const Eigen::MatrixXd c = paths.rowwise() - mu;
  return (c.transpose() * c) / static_cast<double>(paths.rows() - 1);
}

}  // namespace isp
