#pragma once

// Functions with a single spherical-harmonic component in frequency,
// f^(xi) = g(|xi|) Y_k(xi/|xi|), and their Hankel-type reduction
//   f(x) = kappa_n i^k |x|^{1-n/2} int g(r) J_nu(r|x|) r^{n/2} dr Y_k(x/|x|),
// nu = n/2 + k - 1. The constant kappa_n is calibrated against the grid path.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/harmonics.hpp"
#include "sharptrace/kernels.hpp"
#include "sharptrace/special_functions.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace {

struct RadialProfile {
  int n = 3;
  int k = 0;
  std::function<cdouble(double)> g;
  /// Support of g is [r_min, r_max]; r_max is finite (truncate decaying profiles).
  double r_min = 0.0;
  double r_max = 1.0;
  /// |g(r)| ~ r^origin_exponent as r -> 0 (used when r_min = 0).
  double origin_exponent = 0.0;
  /// Oscillation frequency of g in r; sets the quadrature panel width.
  double oscillation = 0.0;
  std::string family;
  nlohmann::json params = nlohmann::json::object();

  /// Fills in the harmonic; validates dimension, degree and support.
  static RadialProfile make(int n, int k, std::function<cdouble(double)> g, double r_min, double r_max,
                            double origin_exponent = 0.0);

  const Harmonic& harmonic() const;
  double nu() const { return 0.5 * n + k - 1.0; }
  /// g(|xi|) Y_k(xi/|xi|); 0 at xi = 0 unless k = 0.
  cdouble transform(const Vec& xi) const;
  nlohmann::json to_json() const;

  std::shared_ptr<const Harmonic> harmonic_;
};

class RadialKernel {
 public:
  static constexpr int kVersion = 1;

  struct Entry {
    int n = 0;
    double kappa = 0.0;
    double reference = 0.0;  ///< (2 pi)^{-n/2}
    double residual = 0.0;   ///< max |grid - kappa * radial| / max |grid| over the samples
    int samples = 0;
    nlohmann::json grid;
  };

  /// Fits kappa_n for each n by least squares, matching the radial reduction of
  /// P_k(x) e^{-|x|^2/2} (k = 0, 1, 2) against trigonometric grid evaluation on
  /// spheres of radius 0.5, 1, 1.5, 2.
  static RadialKernel calibrate(const std::vector<int>& dims = {2, 3},
                                Execution exec = Execution::parallel);
  static RadialKernel from_json(const nlohmann::json& j);
  static RadialKernel load(const std::string& path);
  /// The artifact named by SHARPTRACE_CALIBRATION, else the one shipped in data/.
  /// Throws Uncalibrated when neither can be read.
  static const RadialKernel& installed();
  static std::string default_path();

  bool has(int n) const;
  /// Throws Uncalibrated for a dimension without an entry.
  double kappa(int n) const;
  const std::vector<Entry>& entries() const { return entries_; }
  nlohmann::json to_json() const;
  void save(const std::string& path) const;

 private:
  std::vector<Entry> entries_;
};

/// int g(r) J_order(r rho) r^{n/2} dr over the support of p.
cdouble hankel_integral(const RadialProfile& p, double order, double rho);

/// Hankel integrals of p at one radius: order nu, and nu +- 1 when `riesz`.
struct RadialIntegrals {
  double rho = 0.0;
  double kappa = 0.0;
  cdouble value = 0.0;
  cdouble up = 0.0;
  cdouble down = 0.0;
  bool has_riesz = false;
};

RadialIntegrals radial_integrals(const RadialKernel& kernel, const RadialProfile& p, double rho, bool riesz);

/// The k-th harmonic coefficient of f on the sphere of radius rho:
/// f(rho theta) = coefficient * Y_k(theta).
cdouble radial_trace_coefficient(const RadialKernel& kernel, const RadialProfile& p, double rho);

cdouble radial_trace_coefficient(const RadialIntegrals& I, const RadialProfile& p);

/// f(x) through the reduction.
cdouble radial_value(const RadialKernel& kernel, const RadialProfile& p, const Vec& x);
/// f(x) for |x| = I.rho.
cdouble radial_value(const RadialIntegrals& I, const RadialProfile& p, const Vec& x);

/// (R_j f)(x), j = 0..n-1, with R_j the multiplier xi_j/|xi|. Uses
/// theta_j Y_k = Z_+ + Z_-, Z_+ = theta_j P_k - d_j P_k/(n+2k-2) (degree k+1),
/// Z_- = d_j P_k/(n+2k-2) (degree k-1).
std::vector<cdouble> radial_riesz_values(const RadialKernel& kernel, const RadialProfile& p,
                                         const Vec& x);
/// Same, for |x| = I.rho; I must carry the Riesz orders.
std::vector<cdouble> radial_riesz_values(const RadialIntegrals& I, const RadialProfile& p, const Vec& x);

/// int |g|^2 w^2 r^{n-1} dr; +inf when the origin makes it diverge.
double radial_weighted_l2(const RadialProfile& p, const WeightSpec& w);

/// (2 pi)^{-n/2} ||w(|xi|) f^||_{L^2}; +inf when divergent.
double sobolev_norm(const RadialProfile& p, const WeightSpec& w);

}  // namespace sharptrace
