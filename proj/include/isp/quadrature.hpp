#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <sstream>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "isp/errors.hpp"
#include "isp/measures.hpp"

namespace isp {

struct QuadratureSettings {
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  std::int64_t max_evaluations = 200'000'000;
};

inline void validate(const QuadratureSettings& s) {
  if (!(s.rel_tol > 0.0) || !(s.abs_tol > 0.0) || s.max_evaluations <= 0) {
    throw ConfigError("quadrature settings: tolerances and budget must be > 0");
  }
}

template <class R>
struct QuadratureResult {
  R value;
  double error;
  std::int64_t evaluations;
};

namespace detail {

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const std::complex<double>& z) { return std::abs(z); }

struct EvaluationBudgetExceeded {};

inline std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Positive u where two kink lines s = ta - xa u and s = tb - xb u cross.
inline std::vector<double> crossing_durations(const std::vector<double>& tset,
                                              const std::vector<double>& xset) {
  std::vector<double> out;
  for (double ta : tset)
    for (double tb : tset)
      for (double xa : xset)
        for (double xb : xset) {
          if (xa == xb) continue;
          const double u = (ta - tb) / (xa - xb);
          if (u > 0.0 && std::isfinite(u)) out.push_back(u);
        }
  return sorted_unique(std::move(out));
}

/// s-integral of g(., u) over (-u, tmax] for one u, split at the kink lines.
template <class G, class R>
class InnerIntegral {
 public:
  InnerIntegral(const G& g, std::vector<double> tset, std::vector<double> xset, double tol,
                std::int64_t budget)
      : g_(g), tset_(std::move(tset)), xset_(std::move(xset)), tol_(tol), budget_(budget) {}

  R operator()(double u) {
    const double tmax = tset_.back();
    cuts_.clear();
    cuts_.push_back(-u);
    for (double t : tset_)
      for (double x : xset_) {
        const double s = t - x * u;
        if (s > -u && s < tmax) cuts_.push_back(s);
      }
    cuts_.push_back(tmax);
    std::sort(cuts_.begin(), cuts_.end());

    // One Gauss-Kronrod pass per piece, then bisect only the pieces whose
    // error exceeds an absolute share of the whole. Rounding in the cut
    // positions leaves kinks a few ulps inside pieces, which a per-piece
    // relative criterion would chase to full depth.
    R total{};
    double scale = 0.0;
    double err_sum = 0.0;
    pieces_.clear();
    for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
      const double a = cuts_[i];
      const double b = cuts_[i + 1];
      if (!(b > a)) continue;
      double e = 0.0;
      const R v = once(a, b, u, e);
      pieces_.push_back({a, b, v, e});
      total += v;
      scale += magnitude(v);
      err_sum += e;
    }
    const double target = std::max(tol_ * scale, std::numeric_limits<double>::min());
    if (err_sum <= target) return total;
    total = R{};
    const double share = target / static_cast<double>(pieces_.size());
    for (const auto& pc : pieces_) total += refine(pc.a, pc.b, u, pc.value, pc.err, share, 12);
    return total;
  }

  std::int64_t evaluations() const { return evals_; }

 private:
  struct Piece {
    double a, b;
    R value;
    double err;
  };

  R once(double a, double b, double u, double& e) {
    auto f = [&](double s) {
      if (++evals_ > budget_) throw EvaluationBudgetExceeded{};
      return g_(s, u);
    };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 0, 0.0, &e);
  }

  R refine(double a, double b, double u, R value, double e, double target, int depth) {
    if (e <= target || depth == 0) return value;
    const double mid = 0.5 * (a + b);
    if (!(mid > a && mid < b)) return value;
    double el = 0.0;
    double er = 0.0;
    const R vl = once(a, mid, u, el);
    const R vr = once(mid, b, u, er);
    // No gain from bisection means the error is rounding in the cut
    // positions, which refinement cannot remove.
    if (el + er <= target || el + er > 0.5 * e) return vl + vr;
    return refine(a, mid, u, vl, el, 0.5 * target, depth - 1) +
           refine(mid, b, u, vr, er, 0.5 * target, depth - 1);
  }

  const G& g_;
  std::vector<double> tset_;
  std::vector<double> xset_;
  double tol_;
  std::int64_t budget_;
  std::int64_t evals_ = 0;
  std::vector<double> cuts_;
  std::vector<Piece> pieces_;
};

}  // namespace detail

/// Integral of g(s, u) over {(s, u): -u < s <= max(times), u in (lo, hi)}
/// against coeff u^(-delta-1) ds du.
///
/// g must vanish for s > max(times) and depend on (s, u) only through the
/// products u * increment(t, s, u) of a piecewise-linear pulse with kinks at
/// xbreaks. Then g is smooth between the lines s = t - x u, t in {0} + times,
/// x in xbreaks, and the s-integral is exactly A u + B once u is past the last
/// point where two such lines cross, which closes an infinite upper limit
/// analytically. The u-axis is split at the crossings; each piece uses
/// tanh-sinh outside and Gauss-Kronrod inside.
template <class G>
auto integrate_su(const G& g, const PowerMeasure& m, const std::vector<double>& times,
                  const std::vector<double>& xbreaks, const QuadratureSettings& qs)
    -> QuadratureResult<std::decay_t<decltype(g(0.0, 1.0))>> {
  using R = std::decay_t<decltype(g(0.0, 1.0))>;
  validate(qs);

  std::vector<double> tset{0.0};
  for (double t : times) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("integrate_su: times must be >= 0");
    tset.push_back(t);
  }
  tset = detail::sorted_unique(std::move(tset));
  if (!(m.hi > m.lo) || tset.back() == 0.0) return {R{}, 0.0, 0};

  std::vector<double> xset = xbreaks;
  xset.push_back(0.0);
  xset.push_back(1.0);
  xset = detail::sorted_unique(std::move(xset));

  detail::InnerIntegral<G, R> inner(g, tset, xset, std::max(1e-14, qs.rel_tol * 1e-2),
                                    qs.max_evaluations);
  auto weighted = [&](double u) -> R {
    if (!(u > 0.0)) return R{};
    return inner(u) * (m.coeff * std::pow(u, -m.delta - 1.0));
  };

  std::vector<double> knots{m.lo};
  for (double u : detail::crossing_durations(tset, xset)) {
    if (u > m.lo && u < m.hi) knots.push_back(u);
  }
  const bool infinite_top = std::isinf(m.hi);
  if (!infinite_top) {
    knots.push_back(m.hi);
  } else if (knots.size() == 1) {
    knots.push_back(std::max(tset.back(), 2.0 * m.lo));
  }

  static thread_local boost::math::quadrature::tanh_sinh<double> ts;
  R total{};
  double err = 0.0;
  try {
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      // At u -> 0 the weight overflows before the integrand underflows; the
      // dropped sliver is of order floor^(2 - delta) relative.
      const double a =
          knots[i] > 0.0 ? knots[i] : knots[i + 1] * std::pow(10.0, -200.0 / (m.delta + 1.0));
      double e = 0.0;
      total += ts.integrate(weighted, a, knots[i + 1], qs.rel_tol, &e);
      err += e;
    }
    if (infinite_top) {
      if (!(m.delta > 1.0)) throw DomainError("integrate_su: infinite range needs delta > 1");
      const double U = knots.back();
      const R f2 = inner(2.0 * U);
      const R f3 = inner(3.0 * U);
      const R f4 = inner(4.0 * U);
      const R A = (f4 - f2) / (2.0 * U);
      const R B = f2 - A * (2.0 * U);
      const double d = m.delta;
      total += m.coeff * (A * (std::pow(U, 1.0 - d) / (d - 1.0)) + B * (std::pow(U, -d) / d));
      err += m.coeff * detail::magnitude(f3 - (A * (3.0 * U) + B)) * std::pow(U, -d) / d;
    }
  } catch (const detail::EvaluationBudgetExceeded&) {
    throw NumericalError("integrate_su: evaluation budget exhausted", detail::magnitude(total),
                         std::numeric_limits<double>::infinity());
  }

  const double scale = detail::magnitude(total);
  if (!std::isfinite(scale)) {
    throw NumericalError("integrate_su: non-finite result", scale,
                         std::numeric_limits<double>::infinity());
  }
  // tanh-sinh reports the gap between its last two levels, which overstates
  // the error of the final level once it converges.
  const double allowed = 100.0 * std::max(qs.abs_tol, qs.rel_tol * scale);
  if (err > allowed) {
    std::ostringstream os;
    os << "integrate_su: tolerance not reached (error " << err << ", allowed " << allowed << ")";
    throw NumericalError(os.str(), scale, err);
  }
  return {total, err, inner.evaluations()};
}

}  // namespace isp
