#pragma once

// One-dimensional quadrature: Gauss rules and adaptive Gauss-Kronrod
// integration, including helpers for integrable power singularities at the
// origin and for oscillatory integrands split into panels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <queue>
#include <vector>

namespace sharptrace::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

/// n-point Gauss-Legendre rule mapped to [a, b].
Rule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta,
/// alpha, beta > -1 (Golub-Welsch).
Rule gauss_jacobi(int n, double alpha, double beta);

template <class T>
struct Estimate {
  T value{};
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr double kKronrodNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kKronrodWeights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGaussWeights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T, class F>
Estimate<T> gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kKronrodWeights[7];
  T gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const T pair = f(center - dx) + f(center + dx);
    kronrod += pair * kKronrodWeights[j];
    if (j % 2 == 1) gauss += pair * kGaussWeights[j / 2];
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half), 15};
}

}  // namespace detail

/// Globally adaptive G7-K15 integration of f over [a, b]. Bisects the interval
/// with the largest error estimate until the summed error falls below
/// max(abs_tol, rel_tol*|I|) or max_intervals is reached.
template <class T = double, class F>
Estimate<T> integrate(F&& f, double a, double b, double abs_tol = 1e-14,
                      double rel_tol = 1e-12, int max_intervals = 400) {
  if (a == b) return {};
  struct Piece {
    double lo, hi;
    Estimate<T> est;
    bool operator<(const Piece& other) const { return est.error < other.est.error; }
  };
  std::priority_queue<Piece> heap;
  auto first = detail::gauss_kronrod_15<T>(f, a, b);
  T total = first.value;
  double error = first.error;
  int evaluations = first.evaluations;
  heap.push({a, b, first});
  while (error > std::max(abs_tol, rel_tol * std::abs(total)) &&
         static_cast<int>(heap.size()) < max_intervals) {
    Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {
      heap.push(worst);
      break;
    }
    auto left = detail::gauss_kronrod_15<T>(f, worst.lo, mid);
    auto right = detail::gauss_kronrod_15<T>(f, mid, worst.hi);
    evaluations += left.evaluations + right.evaluations;
    total += left.value + right.value - worst.est.value;
    error += left.error + right.error - worst.est.error;
    heap.push({worst.lo, mid, left});
    heap.push({mid, worst.hi, right});
  }
  // Re-sum to shed the drift of the running updates.
  T resummed{};
  double err_sum = 0.0;
  while (!heap.empty()) {
    resummed += heap.top().est.value;
    err_sum += heap.top().est.error;
    heap.pop();
  }
  return {resummed, err_sum, evaluations};
}

/// Integrates f over (0, b] where f may carry an integrable power-law
/// singularity (or vanish like a power) at 0. The interval is split into
/// dyadic pieces [b/2^(j+1), b/2^j]; once successive pieces decay at a stable
/// geometric ratio q the remainder is summed as a geometric series.
template <class T = double, class F>
Estimate<T> integrate_from_origin(F&& f, double b, double abs_tol = 1e-15,
                                  double rel_tol = 1e-13) {
  Estimate<T> out;
  T previous{};
  double previous_ratio = -1.0;
  for (int j = 0; j < 400; ++j) {
    const double hi = std::ldexp(b, -j);
    const double lo = 0.5 * hi;
    auto piece = integrate<T>(f, lo, hi, abs_tol * 1e-2, rel_tol * 1e-1, 50);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
    const double size = std::abs(piece.value);
    if (size == 0.0 && j > 2) break;
    if (j >= 4 && std::abs(previous) > 0.0) {
      const double ratio = size / std::abs(previous);
      const double remainder = ratio < 1.0 ? size * ratio / (1.0 - ratio) : 1e300;
      if (remainder <= std::max(abs_tol, rel_tol * std::abs(out.value)) * 1e-2) break;
      if (ratio < 1.0 && previous_ratio > 0.0 &&
          std::abs(ratio - previous_ratio) <= 1e-12 * ratio) {
        // pure power law regime: sum the geometric remainder
        out.value += piece.value * (ratio / (1.0 - ratio));
        out.error += std::abs(remainder) * 1e-6;
        break;
      }
      previous_ratio = ratio;
    }
    previous = piece.value;
    if (lo < std::numeric_limits<double>::min() * 1e10) break;
  }
  return out;
}

/// Integrates f over [a, b] split into panels no wider than `panel`, each
/// integrated adaptively. Tolerances are applied per panel, scaled to the
/// running magnitude of the integral.
template <class T = double, class F>
Estimate<T> integrate_panels(F&& f, double a, double b, double panel,
                             double rel_tol = 1e-12, double abs_tol = 1e-16) {
  Estimate<T> out;
  if (b <= a) return out;
  const auto count = static_cast<long>(std::ceil((b - a) / panel));
  const double width = (b - a) / static_cast<double>(std::max(count, 1L));
  double scale = 0.0;
  for (long i = 0; i < std::max(count, 1L); ++i) {
    const double lo = a + width * static_cast<double>(i);
    const double hi = (i + 1 == count) ? b : lo + width;
    auto piece = integrate<T>(f, lo, hi, std::max(abs_tol, rel_tol * 1e-2 * scale),
                              rel_tol, 60);
    out.value += piece.value;
    out.error += piece.error;
    out.evaluations += piece.evaluations;
    scale = std::max(scale, std::abs(out.value));
  }
  return out;
}

}  // namespace sharptrace::quadrature
