#include "isp/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "isp/errors.hpp"

namespace isp {

Pulse::Pulse(PulseKind kind, SupportKind support, std::vector<Knot> knots, double m,
             double m_prime)
    : kind_(kind), support_(support), knots_(std::move(knots)), m_(m), m_prime_(m_prime) {}

Pulse Pulse::linear_plateau() {
  return Pulse(PulseKind::LinearPlateau, SupportKind::Plateau, {{0.0, 0.0}, {1.0, 1.0}}, 1.0,
               0.0);
}

Pulse Pulse::triangle() {
  return Pulse(PulseKind::Triangle, SupportKind::Compact,
               {{0.0, 0.0}, {0.5, 0.5}, {1.0, 0.0}}, 1.0, 0.0);
}

Pulse Pulse::custom(std::vector<Knot> knots, SupportKind support,
                    std::optional<double> lipschitz_f, double lipschitz_df) {
  if (knots.size() < 2) throw ConfigError("custom pulse: need at least two knots");
  for (const auto& k : knots) {
    if (!std::isfinite(k.x) || !std::isfinite(k.y)) {
      throw ConfigError("custom pulse: knots must be finite");
    }
  }
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].x > knots[i - 1].x)) {
      throw ConfigError("custom pulse: knot x values must be strictly increasing");
    }
  }
  if (knots.front().x != 0.0 || knots.front().y != 0.0) {
    throw ConfigError("custom pulse: first knot must be (0, 0)");
  }
  if (knots.back().x != 1.0) throw ConfigError("custom pulse: last knot must have x = 1");
  if (support == SupportKind::Compact && knots.back().y != 0.0) {
    throw ConfigError("custom pulse: compact support requires f(1) = 0");
  }
  double steepest = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    steepest = std::max(steepest, std::abs(knots[i].y - knots[i - 1].y) /
                                      (knots[i].x - knots[i - 1].x));
  }
  const double m = lipschitz_f.value_or(steepest);
  if (m < 0.0 || lipschitz_df < 0.0) {
    throw ConfigError("custom pulse: Lipschitz constants must be >= 0");
  }
  return Pulse(PulseKind::Custom, support, std::move(knots), m, lipschitz_df);
}

double Pulse::eval(double x) const {
  if (!(x > 0.0)) return 0.0;
  switch (kind_) {
    case PulseKind::LinearPlateau:
      return std::min(x, 1.0);
    case PulseKind::Triangle:
      return x >= 1.0 ? 0.0 : 0.5 - std::abs(x - 0.5);
    case PulseKind::Custom:
      break;
  }
  if (x >= 1.0) return support_ == SupportKind::Plateau ? knots_.back().y : 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x,
                             [](double v, const Knot& k) { return v < k.x; });
  const Knot& hi = *it;
  const Knot& lo = *(it - 1);
  return lo.y + (hi.y - lo.y) * (x - lo.x) / (hi.x - lo.x);
}

double Pulse::increment(double t, double s, double u) const {
  if (!(u > 0.0)) throw DomainError("increment: u must be > 0");
  return eval((t - s) / u) - eval(-s / u);
}

double Pulse::kernel(double t, double s, double u, double r) const {
  return r * u * increment(t, s, u);
}

std::vector<double> Pulse::breakpoints() const {
  std::vector<double> out;
  out.reserve(knots_.size());
  for (const auto& k : knots_) out.push_back(k.x);
  return out;
}

std::string Pulse::name() const {
  switch (kind_) {
    case PulseKind::LinearPlateau:
      return "linear_plateau";
    case PulseKind::Triangle:
      return "triangle";
    case PulseKind::Custom:
      break;
  }
  return support_ == SupportKind::Plateau ? "custom_plateau" : "custom_compact";
}

PulseReport validate(const Pulse& pulse, int grid_points) {
  PulseReport rep;
  const int n = std::max(grid_points, 101);

  for (int i = 0; i < n; ++i) {
    const double x = -10.0 * (i + 1) / n;
    if (pulse.eval(x) != 0.0) {
      rep.vanishes_on_negatives = false;
      std::ostringstream os;
      os << "f(" << x << ") = " << pulse.eval(x) << " != 0";
      rep.messages.push_back(os.str());
      break;
    }
  }

  const double f1 = pulse.eval(1.0);
  if (pulse.support() == SupportKind::Compact && f1 != 0.0) {
    rep.support_ok = false;
    rep.messages.push_back("compact pulse with f(1) != 0");
  }
  for (int i = 0; i < n; ++i) {
    const double x = 1.0 + 10.0 * i / n;
    const double want = pulse.support() == SupportKind::Plateau ? f1 : 0.0;
    if (pulse.eval(x) != want) {
      rep.support_ok = false;
      std::ostringstream os;
      os << "f(" << x << ") = " << pulse.eval(x) << ", expected " << want;
      rep.messages.push_back(os.str());
      break;
    }
  }

  // Lipschitz of f: piecewise-linear, so chords between consecutive knots and
  // between grid neighbours cover the supremum.
  const double m = pulse.lipschitz_f();
  double worst_slope = 0.0;
  std::pair<double, double> worst_pair{0.0, 0.0};
  auto consider = [&](double a, double b) {
    const double slope = std::abs(pulse.eval(b) - pulse.eval(a)) / (b - a);
    if (slope > worst_slope) {
      worst_slope = slope;
      worst_pair = {a, b};
    }
  };
  const auto& knots = pulse.knots();
  for (std::size_t i = 1; i < knots.size(); ++i) consider(knots[i - 1].x, knots[i].x);
  const double lo = -0.5;
  const double hi = 1.5;
  const double h = (hi - lo) / (n - 1);
  for (int i = 0; i + 1 < n; ++i) consider(lo + i * h, lo + (i + 1) * h);

  rep.worst_ratio_f = m > 0.0 ? worst_slope / m : (worst_slope > 0.0 ? INFINITY : 0.0);
  if (worst_slope > m * (1.0 + 1e-9) + 1e-12) {
    rep.offending_pair = worst_pair;
    std::ostringstream os;
    os << "slope " << worst_slope << " between x=" << worst_pair.first << " and x="
       << worst_pair.second << " exceeds declared M=" << m;
    rep.messages.push_back(os.str());
  }

  // Derivative variation within each piece.
  auto bps = pulse.breakpoints();
  bps.insert(bps.begin(), -1.0);
  bps.push_back(2.0);
  double worst_dvar = 0.0;
  for (std::size_t p = 0; p + 1 < bps.size(); ++p) {
    const double a = bps[p];
    const double b = bps[p + 1];
    const int k = 64;
    const double step = (b - a) / k;
    double prev = NAN;
    for (int i = 0; i < k; ++i) {
      const double x0 = a + i * step;
      const double d = (pulse.eval(x0 + step) - pulse.eval(x0)) / step;
      if (i > 0) worst_dvar = std::max(worst_dvar, std::abs(d - prev) / step);
      prev = d;
    }
  }
  const double mp = pulse.lipschitz_df();
  const double noise = 1e-6;
  rep.worst_ratio_df = mp > 0.0 ? worst_dvar / mp : (worst_dvar > noise ? INFINITY : 0.0);
  if (worst_dvar > mp * (1.0 + 1e-9) + noise) {
    std::ostringstream os;
    os << "derivative variation " << worst_dvar << " exceeds declared M'=" << mp;
    rep.messages.push_back(os.str());
  }

  rep.pass = rep.vanishes_on_negatives && rep.support_ok && rep.messages.empty();
  return rep;
}

}  // namespace isp
