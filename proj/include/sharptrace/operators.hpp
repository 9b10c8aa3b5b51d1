#pragma once

// Operators acting on grid fields: Sobolev norms, separable symbols
// sigma(X, D) = sum_l m_l(x) q_l(D), the wedge operators built from a spatial
// and a frequency unit field, the structure condition on the classical
// orbits, and the propagator e^{i t a(D)}.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/grid_field.hpp"
#include "sharptrace/special_functions.hpp"
#include "sharptrace/symbols.hpp"

namespace sharptrace {

enum class NormPath {
  /// analytic when the field carries a closed-form transform, else lattice
  automatic,
  /// sum over the frequency lattice; spectrally accurate when f^ vanishes near
  /// 0 or the weight is smooth there, O(dxi^{n+2s}) otherwise
  lattice,
  /// polar quadrature of the closed-form transform over |xi| <= nyquist
  analytic
};

/// (2 pi)^{-n/2} ||w(|xi|) f^||_{L^2}. +inf when w is singular at 0 and f^(0)
/// does not vanish.
double sobolev_norm(const GridField& f, const WeightSpec& w, NormPath path = NormPath::automatic,
                    int angular_resolution = 24);

/// A factor m(x) or q(xi) of a separable term. `degree` is the positive
/// homogeneity degree (NaN for factors that are not homogeneous).
///
/// At the origin: `origin_value` if configured; otherwise 0 for homogeneous
/// factors; otherwise the function itself is evaluated, and a NaN is rejected.
struct Factor {
  std::function<cdouble(const Vec&)> fn;
  double degree = 0.0;
  std::optional<cdouble> origin_value;
  /// Evaluate fn at the origin instead of applying the rule above (products).
  bool raw_origin = false;
  std::string name;

  bool homogeneous() const { return std::isfinite(degree); }
  cdouble operator()(const Vec& v) const;
};

Factor operator*(const Factor& a, const Factor& b);

namespace factors {

Factor one();
/// v_j
Factor coordinate(int j);
/// v_j / |v|
Factor unit(int j);
/// |v|^gamma
Factor abs_power(double gamma);
/// (1 + |v|^2)^{gamma/2}; not homogeneous.
Factor bracket_power(double gamma);
/// d_j s(v) / |grad s(v)| for a degree-2 symbol s (a or a*).
Factor gradient_direction(std::shared_ptr<const Symbol> s, int j);

}  // namespace factors

struct SeparableTerm {
  cdouble coefficient = 1.0;
  Factor m;  ///< spatial
  Factor q;  ///< frequency
};

struct SeparableSymbol {
  int n = 0;
  std::vector<SeparableTerm> terms;
  double beta = 0.0;   ///< declared homogeneity in x
  double alpha = 0.0;  ///< declared homogeneity in xi
  std::string name;

  cdouble value(const Vec& x, const Vec& xi) const;

  struct HomogeneityCheck {
    double max_defect = 0.0;  ///< max |f(l v) - l^d f(v)| / max(1, |l^d f(v)|)
    int samples = 0;
    bool passes(double tol = 1e-10) const { return max_defect <= tol; }
  };
  /// Sampled check that every factor is homogeneous of its declared degree and
  /// that each term matches (beta, alpha). Non-homogeneous factors are skipped.
  HomogeneityCheck check_homogeneity(int samples = 64, std::uint64_t seed = 1) const;
};

/// sum_l c_l m_l(x) (q_l(D) f)(x).
GridField apply_separable_symbol(const SeparableSymbol& sigma, const GridField& f,
                                 Execution exec = Execution::parallel);

/// Wedge operators, component (i < j):
///  gradient:  n_i(x) R_j - n_j(x) R_i,            n = grad a / |grad a|, R = D/|D|
///  dual:      (x_i/|x|) M_j(D) - (x_j/|x|) M_i(D),  M = grad a* / |grad a*|
///  omega1:    |x|^{-1/2} [(x_i/|x|) N_j(D) - (x_j/|x|) N_i(D)] |D|^{1/2},  N = grad a / |grad a|
///  omega2:    |x|^{-1/2} [m_i(x) R_j - m_j(x) R_i] |D|^{1/2},  m = grad a* / |grad a*|
enum class WedgeKind { gradient, dual, omega1, omega2 };

const char* to_string(WedgeKind kind);
WedgeKind wedge_kind_from_string(const std::string& name);

struct WedgeOperator {
  WedgeKind kind = WedgeKind::gradient;
  int n = 0;
  std::shared_ptr<const HomogeneousSymbol> symbol;
  std::shared_ptr<const DualSymbol> dual;  ///< set for the kinds that use a*

  /// Separable symbol of component (i, j); component(j, i) = -component(i, j).
  SeparableSymbol component(int i, int j) const;
  std::vector<std::pair<int, int>> pairs() const;
};

/// Builds the operator; kinds that use a* require a positive curvature
/// certificate at `certificate_resolution` (HypothesisViolation otherwise).
WedgeOperator make_wedge_operator(WedgeKind kind, const HomogeneousSymbol& sym,
                                  int certificate_resolution = 64);

struct WedgeComponent {
  int i = 0, j = 0;
  GridField field;
};

std::vector<WedgeComponent> wedge_operator_apply(const WedgeOperator& op, const GridField& f,
                                                 Execution exec = Execution::parallel);
std::vector<WedgeComponent> wedge_operator_apply(WedgeKind kind, const HomogeneousSymbol& sym,
                                                 const GridField& f, Execution exec = Execution::parallel);

/// sum_{i<j} (n_i(x) xi_j - n_j(x) xi_i)^2 with n = grad a / |grad a|.
SeparableSymbol wedge_square_symbol(const HomogeneousSymbol& sym);

struct StructureReport {
  int samples = 0;
  std::uint64_t seed = 0;
  double max_same = 0.0;      ///< max |sigma(x, lambda grad a(x))|
  double max_opposite = 0.0;  ///< max |sigma(-x, lambda grad a(x))|
  double scale = 0.0;         ///< max |sigma| over unconstrained samples (>= 1)
  double tolerance = 1e-8;
  bool same_passes() const { return max_same < tolerance * scale; }
  bool opposite_passes() const { return max_opposite < tolerance * scale; }
  bool passes() const { return same_passes() || opposite_passes(); }
  nlohmann::json to_json() const;
};

/// Samples x in the annulus 1/2 <= |x| <= 2 and lambda in [-4, 4] with
/// |lambda| >= 1/64.
StructureReport structure_condition_check(const SeparableSymbol& sigma, const Symbol& sym,
                                          int samples = 256, std::uint64_t seed = 1);

/// e^{i t a(D)} phi.
GridField evolve(const Symbol& sym, const GridField& phi, double t, Execution exec = Execution::parallel);

}  // namespace sharptrace
