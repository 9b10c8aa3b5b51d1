#pragma once

// Functions sampled on a uniform periodic grid, held in both space and
// frequency representation under the convention
//   F f(xi) = int e^{-i x.xi} f(x) dx,   F^{-1} g(x) = (2 pi)^{-n} int e^{i x.xi} g(xi) dxi.

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sharptrace/kernels.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace {

/// N samples per axis on [-L/2, L/2); x_j = -L/2 + j h, xi_k = 2 pi k'/L with
/// k' in [-N/2, N/2). Samples are stored row-major, the last axis fastest.
struct GridSpec {
  int n = 3;
  int N = 96;
  double L = 12.0;

  /// N=128, L=16 for n <= 2; N=96, L=12 for n = 3.
  static GridSpec defaults(int n);

  double h() const { return L / N; }
  double dxi() const;
  std::size_t size() const;
  std::array<int, 3> unravel(std::size_t index) const;
  Vec point(std::size_t index) const;
  Vec frequency(std::size_t index) const;
  /// Largest |xi_k| component, pi N / L.
  double nyquist() const;
  void validate() const;
  nlohmann::json to_json() const;
  bool operator==(const GridSpec&) const = default;
};

using SpaceFunction = std::function<cdouble(const Vec&)>;

class GridField {
 public:
  static GridField from_space(const GridSpec& spec, std::vector<cdouble> samples,
                              Execution exec = Execution::parallel);
  static GridField from_frequency(const GridSpec& spec, std::vector<cdouble> samples,
                                  Execution exec = Execution::parallel);
  /// Samples f at the grid points.
  static GridField from_function(const GridSpec& spec, const SpaceFunction& f,
                                 Execution exec = Execution::parallel);
  /// Samples a closed-form transform at the grid frequencies and inverts. The
  /// closed form is kept and available through analytic_transform().
  static GridField from_transform(const GridSpec& spec, const SpaceFunction& fhat,
                                  Execution exec = Execution::parallel);

  const GridSpec& spec() const { return spec_; }
  std::span<const cdouble> space() const { return space_; }
  std::span<const cdouble> frequency() const { return frequency_; }

  /// ||f||_{L^2} with the cell measure h^n.
  double l2_norm() const;
  /// ||f^||_{L^2} with the cell measure (2 pi / L)^n.
  double frequency_l2_norm() const;

  /// Separable 4-point (cubic Lagrange) interpolation of the space samples.
  /// Throws InvalidArgument when x lies outside the interpolable region.
  cdouble interpolate(const Vec& x) const;
  /// Trigonometric (band-limited) evaluation L^{-n} sum_k f^_k e^{i x.xi_k}; exact
  /// for the grid's own band, O(N^n) per point.
  cdouble evaluate(const Vec& x) const;
  /// Whether interpolate(x) is defined.
  bool interpolable(const Vec& x) const;

  /// F^{-1}[m(xi) f^(xi)].
  GridField apply_multiplier(const SpaceFunction& m, Execution exec = Execution::parallel) const;
  /// m(x) f(x).
  GridField multiply_space(const SpaceFunction& m, Execution exec = Execution::parallel) const;
  GridField plus(const GridField& other, cdouble scale = 1.0) const;
  /// max |f - g| over the space samples.
  double max_difference(const GridField& other) const;
  double max_abs() const;

  const std::optional<SpaceFunction>& analytic_transform() const { return analytic_; }

  /// Writes <prefix>.bin (complex128 space samples) and <prefix>.json (sidecar).
  void dump(const std::string& prefix) const;

 private:
  GridField(GridSpec spec, std::vector<cdouble> space, std::vector<cdouble> frequency)
      : spec_(spec), space_(std::move(space)), frequency_(std::move(frequency)) {}

  GridSpec spec_;
  std::vector<cdouble> space_;
  std::vector<cdouble> frequency_;
  std::optional<SpaceFunction> analytic_;
};

namespace grid {

/// Discrete forward transform of space samples under the continuous convention.
std::vector<cdouble> forward(const GridSpec& spec, std::vector<cdouble> samples,
                             Execution exec = Execution::parallel);
/// Discrete inverse transform of frequency samples.
std::vector<cdouble> inverse(const GridSpec& spec, std::vector<cdouble> samples,
                             Execution exec = Execution::parallel);

}  // namespace grid

}  // namespace sharptrace
