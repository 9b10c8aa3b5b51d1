#pragma once

// Quadrature over dilated level sets rho Sigma_a with the measure rho^{n-1} d omega,
// and the polar (coarea) change of variables adapted to a.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/kernels.hpp"
#include "sharptrace/symbols.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace {

struct SphereRule {
  std::vector<Vec> nodes;  ///< unit vectors
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Product rule on S^{n-1}.
///  n = 2: `resolution` equally spaced angles (periodic trapezoid).
///  n = 3: `resolution` Gauss-Legendre nodes in z = cos(polar) times 2*resolution
///         trapezoid nodes in the azimuth.
///  n >= 4: Gauss-Jacobi in the first coordinate (weight (1-z^2)^{(n-3)/2})
///          times the rule on S^{n-2}, recursively.
SphereRule sphere_rule(int n, int resolution);

struct SurfaceQuadrature {
  std::string symbol;        ///< descriptor of the symbol
  int dimension = 0;
  double rho = 1.0;
  int resolution = 0;
  std::vector<Vec> nodes;    ///< points of rho Sigma_a
  std::vector<double> weights;  ///< rho^{n-1} d omega
  std::vector<Vec> unit_nodes;  ///< the same points scaled back to Sigma_a
  std::vector<double> gradient_norms;  ///< |grad a| at unit_nodes

  std::size_t size() const { return nodes.size(); }
  double total_mass() const;
  /// max |a(node) - rho^2| / rho^2
  double node_defect(const Symbol& sym) const;
};

/// Radial-graph quadrature: nodes rho r(theta) theta with r = a(theta)^{-1/2}.
SurfaceQuadrature build_quadrature(const Symbol& sym, double rho, int resolution);

/// sum_j w_j F_j. Rejects non-finite values.
double surface_integral(const SurfaceQuadrature& q, std::span<const double> values);
double surface_integral(const SurfaceQuadrature& q, const std::function<double(const Vec&)>& F,
                        Execution exec = Execution::parallel);

struct CoareaOptions {
  double r_max = 12.0;
};

struct CoareaReport {
  double lhs = 0.0;  ///< Cartesian Gauss-Legendre integral over [-R, R]^n
  double rhs = 0.0;  ///< int_0^R int_Sigma F(rho w) 2 rho^{n-1}/|grad a(w)| dw drho
  double gap = 0.0;  ///< |lhs - rhs| / |lhs|
  int resolution = 0;
  nlohmann::json to_json() const;
};

/// Checks int F = int_0^inf int_{Sigma_a} F(rho w) 2 rho^{n-1} / |grad a(w)| dw drho.
/// `resolution` sets the angular rule and, clamped to [8, 40], the Gauss-Legendre
/// nodes per panel on the radial and Cartesian sides (8 panels each).
CoareaReport coarea_verify(const Symbol& sym, const std::function<double(const Vec&)>& F,
                           int resolution, const CoareaOptions& options = {},
                           Execution exec = Execution::parallel);

/// Writes columns x1..xn, weight.
void write_quadrature_csv(const SurfaceQuadrature& q, const std::string& path);

}  // namespace sharptrace
