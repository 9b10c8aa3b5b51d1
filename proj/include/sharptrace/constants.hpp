#pragma once

// Sharp trace constants: the Gamma closed form for power weights, the Bessel
// supremum over (t, k) for general weights, the smoothing constant for the
// dispersion g(rho) = rho^2, and the conversion between smoothing and trace sides.

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/kernels.hpp"
#include "sharptrace/special_functions.hpp"
#include "sharptrace/symbols.hpp"

namespace sharptrace {

enum class ConstantMethod { gamma_closed_form, bessel_supremum, smoothing_conversion };
/// Which inequality the constant belongs to.
enum class ConstantQuantity { trace, smoothing };

const char* to_string(ConstantMethod method);
const char* to_string(ConstantQuantity quantity);

struct ConstantResult {
  double value = 0.0;  ///< +inf when divergent
  ConstantMethod method = ConstantMethod::gamma_closed_form;
  ConstantQuantity quantity = ConstantQuantity::trace;
  int n = 0;
  std::optional<double> s;
  std::optional<WeightSpec> sigma;
  std::optional<WeightSpec> w;
  bool divergent = false;
  double growth_rate = 0.0;  ///< d(value^2)/d log R of the truncated bracket (divergent only)
  std::optional<double> t_star;
  std::optional<int> k_star;
  bool t_independent = false;  ///< bracket flat in t over the grid
  int k_max = 0;
  std::vector<std::string> warnings;

  bool finite() const { return !divergent && std::isfinite(value); }
  nlohmann::json to_json() const;
};

/// C = (2^{1-2s} Gamma(2s-1) Gamma(n/2-s) / (Gamma(s)^2 Gamma(n/2-1+s)))^{1/2}, 1/2 < s < n/2.
ConstantResult gamma_closed_form_constant(int n, double s);

struct SupremumSearch {
  double t_min = 1e-3;
  double t_max = 1e3;
  int grid_points = 61;
  int k_max = 8;
  /// Hard ceiling for the automatic k_max increase.
  int k_limit = 64;
  double rel_tol = 1e-6;
  /// Relative spread below which the bracket counts as t-independent.
  double flat_tolerance = 1e-8;
  BesselIntegralOptions integral;
};

/// C1 = (sup_{t, k} sigma(t)^{-2} int_0^inf J_{n/2+k-1}(r t)^2 r / w(r)^2 dr)^{1/2}.
ConstantResult c1_trace_constant(int n, const WeightSpec& sigma, const WeightSpec& w,
                                 const SupremumSearch& search = {},
                                 Execution exec = Execution::parallel);

/// C0 = (2 pi sup_{rho, k} rho / (sigma(rho)^2 g'(rho)) int J^2 r / w^2 dr)^{1/2} with g = rho^2.
ConstantResult walther_smoothing_constant(int n, const WeightSpec& sigma, const WeightSpec& w,
                                          const SupremumSearch& search = {},
                                          Execution exec = Execution::parallel);

/// Trace constant in the normalization with measure 2 rho^{n-1} d omega / |grad a|: C0 / sqrt(pi).
/// For the sphere (|grad a| = 2) this coincides with the constant for rho^{n-1} d omega.
ConstantResult convert_smoothing_to_trace(const ConstantResult& c0, const Symbol& sym);
/// Inverse of convert_smoothing_to_trace.
ConstantResult convert_trace_to_smoothing(const ConstantResult& c1, const Symbol& sym);

/// sigma(t) = t^{s-1}, w(r) = r^s: the homogeneous Sobolev trace setting.
inline WeightSpec homogeneous_sigma(double s) { return WeightSpec::power(s - 1.0); }

}  // namespace sharptrace
