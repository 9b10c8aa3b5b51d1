#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

namespace sharptrace {

namespace quadrature {
struct Rule;
}

/// log Gamma(x) for x > 0 (Lanczos approximation, ~1e-15 relative).
double log_gamma(double x);

enum class BesselMethod { automatic, integral_representation, power_series, asymptotic };

const char* to_string(BesselMethod method);

/// Bessel function of the first kind J_order(t) for a fixed real order > -1/2.
///
/// The default (automatic) method evaluates the Poisson integral
///   J_l(t) = t^l / (2^l Gamma(l+1/2) Gamma(1/2)) * int_{-1}^{1} e^{itr} (1-r^2)^{l-1/2} dr
/// by Gauss-Jacobi quadrature for t <= kSwitch, and the Hankel asymptotic
/// expansion of the reduced orders followed by upward recurrence above it.
/// The power series is available as an explicit method (evaluated in long
/// double) and is the only method defined for order 0 at t = 0.
///
/// Construction builds and owns the quadrature rule; evaluation is const and
/// re-entrant.
class BesselEvaluator {
 public:
  static constexpr double kSwitch = 20.0;
  /// Smallest argument at which the Hankel expansion reaches ~1e-13.
  static constexpr double kAsymptoticMin = 15.0;

  explicit BesselEvaluator(double order, BesselMethod method = BesselMethod::automatic);

  double order() const { return order_; }
  BesselMethod method() const { return method_; }

  double operator()(double t) const;

  double integral_representation(double t) const;
  double power_series(double t) const;
  double asymptotic(double t) const;

 private:
  double order_;
  BesselMethod method_;
  double log_prefactor_;
  std::shared_ptr<const quadrature::Rule> rule_;
};

/// J_order(t) through a small per-thread cache of evaluators.
double bessel_j(double order, double t);

/// Radial weight w(r) = r^gamma (power) or (1 + r^2)^(gamma/2) (bracket).
struct WeightSpec {
  enum class Family { power, bracket };

  Family family = Family::power;
  double exponent = 0.0;

  static WeightSpec power(double gamma) { return {Family::power, gamma}; }
  static WeightSpec bracket(double gamma) { return {Family::bracket, gamma}; }
  /// |xi|^s, the homogeneous Sobolev weight.
  static WeightSpec homogeneous(double s) { return power(s); }
  /// (1+|xi|^2)^{s/2}, the inhomogeneous Sobolev weight.
  static WeightSpec inhomogeneous(double s) { return bracket(s); }

  double operator()(double r) const;
  /// d/dr log w(r).
  double log_derivative(double r) const;
  /// w(r) ~ r^{exponent_at_zero()} as r -> 0.
  double exponent_at_zero() const { return family == Family::power ? exponent : 0.0; }
  /// w(r) ~ r^{exponent_at_infinity()} as r -> infinity.
  double exponent_at_infinity() const { return exponent; }

  std::string describe() const;
  nlohmann::json to_json() const;
  static WeightSpec from_json(const nlohmann::json& j);

  bool operator==(const WeightSpec&) const = default;
};

struct BesselIntegralOptions {
  /// Truncation radius used when the integral diverges at infinity.
  double r_cap = 1e4;
  /// Quadrature runs in the argument u = r t up to this value; the remainder
  /// is the averaged asymptotic tail.
  double crossover_argument = 1000.0;
  /// Lower bound on the crossover radius in r units.
  double min_crossover_radius = 0.0;
  double rel_tol = 1e-13;
};

struct BesselIntegral {
  double value = 0.0;     ///< integral (convergent) or truncated value at r_cap
  double tail = 0.0;      ///< analytic tail beyond the crossover (inf if divergent)
  bool divergent = false;
  double growth_rate = 0.0;  ///< d value / d log R at the truncation (divergent only)
  double truncation = 0.0;   ///< crossover radius (convergent) or r_cap (divergent)
  double quadrature_error = 0.0;
};

/// int_0^inf J_nu(r t)^2 r / w(r)^2 dr.
///
/// Throws InvalidArgument when the integral diverges at the origin
/// (nu + 1 - gamma_0 <= 0). Divergence at infinity (w growing no faster than
/// r^{1/2}) is reported in the result, with the truncated value and its
/// logarithmic growth rate.
BesselIntegral weighted_bessel_integral(double nu, double t, const WeightSpec& w,
                                        const BesselIntegralOptions& options = {});

}  // namespace sharptrace
