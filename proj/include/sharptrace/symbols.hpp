#pragma once

// Positively homogeneous, degree-2, elliptic symbols a(xi), their curvature
// certificate, and the dual function a* characterised by a*(grad a(xi)) = 1
// on the level set {a = 1}.

#include <cstdint>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "sharptrace/kernels.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace {

/// Interface shared by HomogeneousSymbol and DualSymbol. Implementations are
/// immutable and safe to evaluate from several threads.
class Symbol {
 public:
  virtual ~Symbol() = default;
  virtual int dimension() const = 0;
  virtual double value(const Vec& xi) const = 0;
  virtual Vec gradient(const Vec& xi) const = 0;
  virtual Mat hessian(const Vec& xi) const = 0;
  virtual std::string describe() const = 0;
  virtual nlohmann::json to_json() const = 0;
};

/// a(theta) = c0 + b.theta + theta^T C theta on the unit sphere.
struct AngularProfile {
  double c0 = 0.0;
  Vec b;
  Mat C;

  double operator()(const Vec& theta) const;
  /// Conservative bound |c0| + |b| + max|eig C| on max |h|.
  double bound() const;
};

class HomogeneousSymbol final : public Symbol {
 public:
  enum class Family { quadratic, quartic, perturbed_sphere };

  /// a = <A xi, xi>; A symmetric positive definite.
  static HomogeneousSymbol quadratic(const Mat& A);
  /// a = |xi|^2.
  static HomogeneousSymbol sphere(int n);
  /// a = (sum xi_i^4)^{1/2}; curvature vanishes at the axis points.
  static HomogeneousSymbol quartic(int n);
  /// a = |xi|^2 (1 + epsilon h(xi/|xi|)); requires |epsilon| bound(h) < 1/2.
  static HomogeneousSymbol perturbed_sphere(int n, double epsilon, AngularProfile h);

  /// Builds from {"family": ..., "n": ..., family parameters}. Unknown fields rejected.
  static HomogeneousSymbol from_json(const nlohmann::json& j);

  Family family() const { return family_; }
  const Mat& matrix() const { return matrix_; }
  double epsilon() const { return epsilon_; }
  const AngularProfile& profile() const { return profile_; }
  bool is_sphere() const;

  int dimension() const override { return n_; }
  double value(const Vec& xi) const override;
  Vec gradient(const Vec& xi) const override;
  Mat hessian(const Vec& xi) const override;
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  HomogeneousSymbol(Family family, int n) : family_(family), n_(n) {}

  Family family_;
  int n_;
  Mat matrix_;
  double epsilon_ = 0.0;
  AngularProfile profile_;
};

/// make_symbol(family, params, n): params holds the family fields of the JSON form.
HomogeneousSymbol make_symbol(const std::string& family, const nlohmann::json& params, int n);

struct HomogeneityReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double max_scaling_defect = 0.0;  ///< |a(l xi) - l^2 a(xi)| / a(l xi)
  double max_euler_defect = 0.0;    ///< |a(xi) - xi.grad a(xi)/2| / a(xi)
  double min_value = 0.0;           ///< min a(xi)/|xi|^2 over the samples
  double min_gradient_norm = 0.0;   ///< min |grad a(xi)|/|xi|
};

/// Samples xi in the annulus 1/2 <= |xi| <= 2 and scales in [1/4, 4].
HomogeneityReport check_homogeneity_euler(const Symbol& sym, int samples, std::uint64_t seed = 1);

/// Points on the level set {a = 1}: theta / sqrt(a(theta)) for unit theta on a
/// deterministic grid. n = 2 uses `resolution` equally spaced angles; n >= 3
/// uses the projected surface grid of the cube with `resolution` cells per
/// face edge (capped so that the total stays below ~2e6 points).
std::vector<Vec> level_set_samples(const Symbol& sym, int resolution);

struct CurvatureCertificate {
  int resolution = 0;
  double min_det = 0.0;
  Vec argmin;
  bool positive() const { return min_det > 0.0; }
  nlohmann::json to_json() const;
};

CurvatureCertificate min_hessian_det_on_level(const Symbol& sym, int resolution,
                                              Execution exec = Execution::parallel);

struct DualEvaluation {
  Vec x;
  Vec xi_star;        ///< point on {a = 1} with grad a(xi_star) parallel to x
  double scale = 0;   ///< lambda with x = lambda grad a(xi_star)
  double value = 0;   ///< a*(x) = lambda^2
  Vec gradient;       ///< grad a*(x) = lambda xi_star
  Mat hessian;        ///< (hess a(lambda xi_star))^{-1}
  double residual = 0;  ///< angle between grad a(xi_star) and x
  int iterations = 0;
};

/// Solves grad a(xi) = x by damped Newton from the best of a set of sampled
/// starting directions; xi* = xi / sqrt(a(xi)), lambda = sqrt(a(xi)).
/// Throws InvalidArgument for x = 0 and NonConvergence after max_iterations.
DualEvaluation dual_eval(const Symbol& sym, const Vec& x, double tol = 1e-13,
                         int max_iterations = 100);

/// a* as a Symbol. Construction requires a positive curvature certificate.
class DualSymbol final : public Symbol {
 public:
  DualSymbol(std::shared_ptr<const Symbol> source, const CurvatureCertificate& certificate,
             double tol = 1e-13);

  const Symbol& source() const { return *source_; }
  DualEvaluation evaluate(const Vec& x) const { return dual_eval(*source_, x, tol_); }

  int dimension() const override { return source_->dimension(); }
  double value(const Vec& x) const override { return evaluate(x).value; }
  Vec gradient(const Vec& x) const override { return evaluate(x).gradient; }
  Mat hessian(const Vec& x) const override { return evaluate(x).hessian; }
  std::string describe() const override;
  nlohmann::json to_json() const override;

 private:
  std::shared_ptr<const Symbol> source_;
  double tol_;
};

}  // namespace sharptrace
