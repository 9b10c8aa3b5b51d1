#pragma once

// Experiments built from the other modules: trace norms and ratios, rho scans
// with exponent fits, sharpness runs along truncation ladders, the critical
// s = 1/2 contrast, and the adjoint/coarea identity behind the
// smoothing <-> trace equivalence.
//
// Normalization: the estimate being tested is
//   ||f|_{rho Sigma}||_{L^2(rho^{n-1} d omega)} <= C sqrt(rho) sigma(rho) ||w(|D|) f||_{L^2},
// so "normalized ratio" below means lhs / (sqrt(rho) sigma(rho) rhs).

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/constants.hpp"
#include "sharptrace/grid_field.hpp"
#include "sharptrace/operators.hpp"
#include "sharptrace/radial.hpp"
#include "sharptrace/surfaces.hpp"
#include "sharptrace/symbols.hpp"

namespace sharptrace {

struct Normalization {
  WeightSpec sigma;
  WeightSpec w;
  std::string flavor;  ///< homogeneous | inhomogeneous | custom
  std::optional<double> s;  ///< set for the two named flavors

  /// sigma = t^{s-1}, w = |xi|^s.
  static Normalization homogeneous(double s);
  /// sigma = t^{-1/2}, w = (1+|xi|^2)^{s/2}.
  static Normalization inhomogeneous(double s);
  static Normalization from_json(const nlohmann::json& j);

  /// sqrt(rho) sigma(rho)
  double factor(double rho) const { return std::sqrt(rho) * sigma(rho); }
  nlohmann::json to_json() const;
};

enum class FieldEvaluation {
  /// cubic interpolation of the space samples
  interpolate,
  /// exact trigonometric sum, O(N^n) per node
  trigonometric
};

/// (sum_j w_j |f(node_j)|^2)^{1/2}; the weights carry rho^{n-1} d omega.
/// Throws InvalidArgument when a node lies outside the grid domain.
double trace_norm(const GridField& f, const SurfaceQuadrature& q,
                  FieldEvaluation how = FieldEvaluation::interpolate, Execution exec = Execution::parallel);
/// Through the radial reduction; the coefficient integral is evaluated once per
/// distinct node radius.
double trace_norm(const RadialProfile& p, const SurfaceQuadrature& q, const RadialKernel& kernel,
                  Execution exec = Execution::parallel);
double trace_norm(const RadialProfile& p, const SurfaceQuadrature& q, Execution exec = Execution::parallel);

struct TraceRatio {
  double rho = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;  ///< ||w(|D|) f||_{L^2}; +inf when divergent
  double ratio = 0.0;
  double normalized = 0.0;  ///< ratio / (sqrt(rho) sigma(rho))
  bool divergent = false;   ///< rhs infinite: ratio and normalized are 0 and meaningless
  nlohmann::json to_json() const;
};

struct TraceOptions {
  int resolution = 16;
  FieldEvaluation evaluation = FieldEvaluation::interpolate;
  NormPath norm_path = NormPath::automatic;
};

TraceRatio trace_ratio(const GridField& f, const Symbol& sym, double rho, const Normalization& norm,
                       const TraceOptions& options = {}, Execution exec = Execution::parallel);
TraceRatio trace_ratio(const RadialProfile& p, const Symbol& sym, double rho, const Normalization& norm,
                       const TraceOptions& options = {}, Execution exec = Execution::parallel);

/// Least-squares line through (log rho, log y).
struct ExponentFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;  ///< 0 when only two points are used
  int points_used = 0;
  bool dropped_endpoints = false;
  nlohmann::json to_json() const;
};

/// Drops the smallest and largest rho when at least 6 points are given.
/// Throws InvalidArgument for fewer than 4 points or non-positive values.
ExponentFit fit_exponent(const std::vector<double>& rho, const std::vector<double>& y);

struct RhoScanOptions {
  /// cs-optimal (supremum over the family at each rho) or any radial test-function family
  std::string family = "cs-optimal";
  nlohmann::json params = nlohmann::json::object();
  int k = 0;
  /// cs-optimal truncation: R = max(min_truncation, truncation_argument / rho).
  /// A fixed argument R rho keeps power-weight scans exactly scale covariant;
  /// bracket weights have an R^{-1/2} tail and default to min_truncation = 4000.
  double truncation_argument = 400.0;
  std::optional<double> min_truncation;
  int resolution = 16;
};

struct TraceReport {
  nlohmann::json symbol;
  nlohmann::json test_function;
  Normalization norm;
  std::vector<TraceRatio> rows;
  /// sqrt(rho B_k(rho)) with B_k = int J_nu(r rho)^2 r / w^2 dr: the supremal
  /// ratio at rho on the sphere (cs-optimal scans only).
  std::vector<double> predicted;
  std::optional<ExponentFit> fit;
  std::optional<double> constant;
  double expected_slope = 0.0;  ///< s - 1/2 for power weights, 0 otherwise
  double spread = 0.0;          ///< max / min of the ratios
  double predicted_spread = 0.0;
  nlohmann::json to_json() const;
};

TraceReport rho_scan(const HomogeneousSymbol& sym, const Normalization& norm, const std::vector<double>& rhos,
                     const RhoScanOptions& options = {}, Execution exec = Execution::parallel);

struct SharpnessOptions {
  std::vector<double> ladder{10.0, 40.0, 160.0};
  int resolution = 16;
  bool compare_gaussian = true;
  double tolerance = 1e-3;
  SupremumSearch search;
};

struct SharpnessRow {
  double R = 0.0;
  TraceRatio ratio;
  double attainment = 0.0;  ///< normalized ratio / C
  std::optional<double> gaussian_attainment;
};

struct SharpnessRun {
  int n = 0;
  Normalization norm;
  ConstantResult constant;
  double t_star = 1.0;
  int k_star = 0;
  std::vector<SharpnessRow> rows;
  double tolerance = 1e-3;
  bool monotone() const;
  bool bounded() const;  ///< attainment <= 1 + tolerance
  nlohmann::json to_json() const;
};

/// Sphere symbols only (the constant is unknown otherwise): InvalidArgument.
SharpnessRun sharpness_run(const HomogeneousSymbol& sym, const Normalization& norm,
                           const SharpnessOptions& options = {}, Execution exec = Execution::parallel);

struct CriticalOptions {
  int k = 1;
  std::vector<double> ladder{10.0, 100.0, 1000.0, 10000.0};
  double rho = 1.0;
  int resolution = 16;
  int certificate_resolution = 64;
};

struct CriticalRow {
  double R = 0.0;
  double norm = 0.0;  ///< ||f||_{H^{1/2} homogeneous}
  double plain_trace = 0.0;
  double wedge_trace = 0.0;
  double plain_ratio = 0.0;
  double wedge_ratio = 0.0;
};

struct CriticalReport {
  nlohmann::json symbol;
  int k = 0;
  double rho = 1.0;
  CurvatureCertificate certificate;
  std::vector<CriticalRow> rows;
  double plain_growth() const;  ///< last / first plain ratio
  double wedge_spread() const;  ///< max / min wedge ratio (0 when all vanish)
  bool plain_increasing() const;
  nlohmann::json to_json() const;
};

/// Truncated cs-optimal profiles at s = 1/2 (t = rho). The wedge is
/// (grad a(x)/|grad a(x)|) ^ (D/|D|). Throws HypothesisViolation when the
/// curvature certificate is not positive and InvalidArgument for k < 0.
CriticalReport critical_comparison(const HomogeneousSymbol& sym, const CriticalOptions& options = {},
                                   Execution exec = Execution::parallel);

/// g^(tau): a C-infinity bump on [lo, hi], or its even extension to [-hi, -lo] too.
struct TimeProfile {
  double lo = 1.0;
  double hi = 2.0;
  bool symmetric = false;

  cdouble transform(double tau) const;
  bool one_sided() const { return !symmetric && lo >= 0.0; }
  nlohmann::json to_json() const;
  static TimeProfile from_json(const nlohmann::json& j);
};

struct DualityOptions {
  int resolution = 32;
  /// rows of the per-rho table
  int table_points = 17;
  double rel_tol = 1e-11;
};

struct DualityRow {
  double rho = 0.0;
  double weight = 0.0;        ///< |g^(rho^2)|^2
  double level_set = 0.0;     ///< int_Sigma |f^(rho w)|^2 2 rho^{n-1} / |grad a(w)| dw
  double polar = 0.0;         ///< rho^{n-1} int_{S^{n-1}} |f^(rho r(th) th)|^2 r(th)^n dth
  double relative_difference = 0.0;
};

struct DualityReport {
  double direct = 0.0;  ///< ||F^{-1}[g^(a(xi)) f^(xi)]||^2 on the grid
  double coarea = 0.0;  ///< (2 pi)^{-n} int |g^(rho^2)|^2 (level-set integral) d rho
  double gap = 0.0;
  double time_norm = 0.0;   ///< ||g||^2 from time samples
  double half_line = 0.0;   ///< (1/pi) int_0^inf |g^(rho^2) sqrt(rho)|^2 d rho
  double time_ratio = 0.0;  ///< half_line / time_norm (1 under the support hypothesis)
  bool one_sided = true;
  bool hypothesis_holds = true;  ///< half-line identity holds to 1e-5
  double max_row_difference = 0.0;
  std::vector<DualityRow> rows;
  std::vector<std::string> warnings;
  bool passes(double tol = 1e-5) const { return gap < tol && max_row_difference < tol; }
  nlohmann::json to_json() const;
};

/// Grid for the direct side: h = 1 and a large box, since the spatial field of a
/// bump ring decays sub-exponentially and the lattice sum sees its periodic images.
/// N = L = 512 for n <= 2, 160 for n = 3.
GridSpec duality_grid(int n);

/// Requires a closed-form transform on f (GridField::from_transform).
DualityReport duality_check(const HomogeneousSymbol& sym, const TimeProfile& g, const GridField& f,
                            const DualityOptions& options = {}, Execution exec = Execution::parallel);

/// Columns rho_or_R, lhs, rhs, ratio, series.
struct CsvRow {
  double rho_or_R = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  std::string series;
};
std::string format_csv(const std::vector<CsvRow>& rows);

std::vector<CsvRow> csv_rows(const TraceReport& r);
std::vector<CsvRow> csv_rows(const SharpnessRun& r);
std::vector<CsvRow> csv_rows(const CriticalReport& r);
std::vector<CsvRow> csv_rows(const DualityReport& r);

}  // namespace sharptrace
