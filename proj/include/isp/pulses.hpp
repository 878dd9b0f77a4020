#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace isp {

enum class PulseKind { LinearPlateau, Triangle, Custom };
enum class SupportKind { Plateau, Compact };

struct Knot {
  double x;
  double y;
};

/// Effect shape f with f = 0 on (-inf, 0] and, past 1, either f(1) (plateau)
/// or 0 (compact).
class Pulse {
 public:
  /// f(x) = x ^ 1 on x >= 0.
  static Pulse linear_plateau();
  /// f(x) = 1/2 - |x - 1/2| on [0, 1].
  static Pulse triangle();
  /// Piecewise-linear f through knots, first knot at x = 0 with y = 0, last
  /// knot at x = 1. M defaults to the steepest chord between knots.
  static Pulse custom(std::vector<Knot> knots, SupportKind support,
                      std::optional<double> lipschitz_f = std::nullopt,
                      double lipschitz_df = 0.0);

  double eval(double x) const;
  /// f((t - s)/u) - f(-s/u). Throws DomainError for u <= 0.
  double increment(double t, double s, double u) const;
  /// r u increment(t, s, u).
  double kernel(double t, double s, double u, double r) const;

  PulseKind kind() const { return kind_; }
  SupportKind support() const { return support_; }
  double lipschitz_f() const { return m_; }
  double lipschitz_df() const { return m_prime_; }
  double plateau_value() const { return eval(1.0); }
  const std::vector<Knot>& knots() const { return knots_; }
  /// Points in [0, 1] where f' may jump, including 0 and 1.
  std::vector<double> breakpoints() const;
  std::string name() const;

 private:
  Pulse(PulseKind kind, SupportKind support, std::vector<Knot> knots, double m, double m_prime);

  PulseKind kind_;
  SupportKind support_;
  std::vector<Knot> knots_;
  double m_;
  double m_prime_;
};

struct PulseReport {
  bool pass = true;
  bool vanishes_on_negatives = true;
  bool support_ok = true;
  /// Largest observed slope / declared M (0 when M = 0 and f is flat).
  double worst_ratio_f = 0.0;
  /// Largest observed derivative variation within a piece / declared M'.
  double worst_ratio_df = 0.0;
  /// Offending pair for the Lipschitz check on f, if any.
  std::optional<std::pair<double, double>> offending_pair;
  std::vector<std::string> messages;
};

/// Report-only check of the pulse invariants on a dense grid.
PulseReport validate(const Pulse& pulse, int grid_points = 4001);

}  // namespace isp
