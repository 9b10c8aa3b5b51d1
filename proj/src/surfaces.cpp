#include "sharptrace/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "sharptrace/errors.hpp"
#include "sharptrace/quadrature.hpp"

namespace sharptrace {

namespace {

// Periodic trapezoid (midpoint offsets) in the angle; geometric convergence
// for periodic analytic integrands.
SphereRule circle_rule(int resolution) {
  SphereRule rule;
  for (int k = 0; k < resolution; ++k) {
    const double phi = 2.0 * kPi * (k + 0.5) / resolution;
    Vec t(2);
    t << std::cos(phi), std::sin(phi);
    rule.nodes.push_back(t);
    rule.weights.push_back(2.0 * kPi / resolution);
  }
  return rule;
}

}  // namespace

SphereRule sphere_rule(int n, int resolution) {
  if (n < 2 || n > kMaxDim) throw InvalidArgument("sphere_rule: unsupported dimension");
  if (resolution < 1) throw InvalidArgument("sphere_rule: resolution must be positive");
  if (n == 2) return circle_rule(resolution);
  SphereRule rule;
  if (n == 3) {
    const auto gl = quadrature::gauss_legendre(resolution);
    const int azimuths = 2 * resolution;
    for (std::size_t i = 0; i < gl.size(); ++i) {
      const double z = gl.nodes[i];
      const double rad = std::sqrt(1.0 - z * z);
      for (int k = 0; k < azimuths; ++k) {
        const double phi = 2.0 * kPi * (k + 0.5) / azimuths;
        Vec t(3);
        t << rad * std::cos(phi), rad * std::sin(phi), z;
        rule.nodes.push_back(t);
        rule.weights.push_back(gl.weights[i] * 2.0 * kPi / azimuths);
      }
    }
    return rule;
  }
  const double alpha = 0.5 * (n - 3);
  const auto gj = quadrature::gauss_jacobi(resolution, alpha, alpha);
  const auto inner = sphere_rule(n - 1, resolution);
  for (std::size_t i = 0; i < gj.size(); ++i) {
    const double z = gj.nodes[i];
    const double rad = std::sqrt(1.0 - z * z);
    for (std::size_t k = 0; k < inner.size(); ++k) {
      Vec t(n);
      t.head(n - 1) = rad * inner.nodes[k];
      t(n - 1) = z;
      rule.nodes.push_back(t);
      rule.weights.push_back(gj.weights[i] * inner.weights[k]);
    }
  }
  return rule;
}

double SurfaceQuadrature::total_mass() const {
  double sum = 0.0;
  for (double w : weights) sum += w;
  return sum;
}

double SurfaceQuadrature::node_defect(const Symbol& sym) const {
  double worst = 0.0;
  for (const auto& x : nodes) worst = std::max(worst, std::abs(sym.value(x) - rho * rho) / (rho * rho));
  return worst;
}

SurfaceQuadrature build_quadrature(const Symbol& sym, double rho, int resolution) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("build_quadrature: rho must be positive");
  if (resolution < 8) throw InvalidArgument("build_quadrature: resolution must be >= 8");
  const int n = sym.dimension();
  const auto sphere = sphere_rule(n, resolution);
  SurfaceQuadrature q;
  q.symbol = sym.describe();
  q.dimension = n;
  q.rho = rho;
  q.resolution = resolution;
  const double dilation = std::pow(rho, n - 1);
  q.nodes.reserve(sphere.size());
  for (std::size_t j = 0; j < sphere.size(); ++j) {
    const Vec& theta = sphere.nodes[j];
    const double a = sym.value(theta);
    const double r = 1.0 / std::sqrt(a);
    const Vec grad = sym.gradient(theta);
    // tangential part of grad r, r(x) = a(x)^{-1/2}
    const Vec grad_r = -0.5 * std::pow(a, -1.5) * grad;
    const Vec tangential = grad_r - grad_r.dot(theta) * theta;
    const double area = std::pow(r, n - 2) * std::sqrt(r * r + tangential.squaredNorm());
    const Vec unit = r * theta;
    q.unit_nodes.push_back(unit);
    q.gradient_norms.push_back(sym.gradient(unit).norm());
    q.nodes.push_back(rho * unit);
    q.weights.push_back(sphere.weights[j] * area * dilation);
  }
  return q;
}

double surface_integral(const SurfaceQuadrature& q, std::span<const double> values) {
  if (values.size() != q.size()) throw InvalidArgument("surface_integral: value count mismatch");
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) {
      throw InvalidArgument("surface_integral: non-finite integrand at node " + std::to_string(j));
    }
    sum += q.weights[j] * values[j];
  }
  return sum;
}

double surface_integral(const SurfaceQuadrature& q, const std::function<double(const Vec&)>& F,
                        Execution exec) {
  std::vector<double> values(q.size());
  kernels::for_each_index(exec, q.size(), [&](std::size_t j) { values[j] = F(q.nodes[j]); });
  return surface_integral(q, values);
}

nlohmann::json CoareaReport::to_json() const {
  return {{"lhs", lhs}, {"rhs", rhs}, {"relative_gap", gap}, {"resolution", resolution}};
}

CoareaReport coarea_verify(const Symbol& sym, const std::function<double(const Vec&)>& F,
                           int resolution, const CoareaOptions& options, Execution exec) {
  const int n = sym.dimension();
  const double R = options.r_max;
  if (!(R > 0.0)) throw InvalidArgument("coarea_verify: r_max must be positive");
  CoareaReport report;
  report.resolution = resolution;

  // Cartesian side: tensor Gauss-Legendre on [-R, R]^n, composite over kPanels panels per axis.
  constexpr int kPanels = 8;
  const int per_panel = std::clamp(resolution, 8, 40);
  quadrature::Rule axis;
  for (int p = 0; p < kPanels; ++p) {
    const double lo = -R + p * 2.0 * R / kPanels;
    const auto piece = quadrature::gauss_legendre(per_panel, lo, lo + 2.0 * R / kPanels);
    axis.nodes.insert(axis.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    axis.weights.insert(axis.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  const std::size_t m = axis.size();
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= m;
  // one task per leading index; inner loops serial
  report.lhs = kernels::ordered_sum<double>(exec, m, [&](std::size_t first) {
    double sum = 0.0;
    Vec x(n);
    const std::size_t inner = total / m;
    for (std::size_t idx = 0; idx < inner; ++idx) {
      std::size_t rest = idx;
      double w = axis.weights[first];
      x(0) = axis.nodes[first];
      for (int d = 1; d < n; ++d) {
        const std::size_t k = rest % m;
        rest /= m;
        x(d) = axis.nodes[k];
        w *= axis.weights[k];
      }
      sum += w * F(x);
    }
    return sum;
  });

  // Polar side: Gauss-Legendre in rho (kPanels panels) times the surface rule on Sigma_a.
  const auto q = build_quadrature(sym, 1.0, resolution);
  quadrature::Rule radial;
  for (int p = 0; p < kPanels; ++p) {
    const auto piece = quadrature::gauss_legendre(per_panel, p * R / kPanels, (p + 1) * R / kPanels);
    radial.nodes.insert(radial.nodes.end(), piece.nodes.begin(), piece.nodes.end());
    radial.weights.insert(radial.weights.end(), piece.weights.begin(), piece.weights.end());
  }
  report.rhs = kernels::ordered_sum<double>(exec, radial.size(), [&](std::size_t i) {
    const double rho = radial.nodes[i];
    double shell = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      shell += q.weights[j] * F(rho * q.unit_nodes[j]) * 2.0 * std::pow(rho, n - 1) / q.gradient_norms[j];
    }
    return radial.weights[i] * shell;
  });
  report.gap = std::abs(report.lhs - report.rhs) / std::abs(report.lhs);
  return report;
}

void write_quadrature_csv(const SurfaceQuadrature& q, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (int d = 0; d < q.dimension; ++d) out << "x" << d + 1 << ",";
  out << "weight\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < q.size(); ++j) {
    for (int d = 0; d < q.dimension; ++d) out << q.nodes[j](d) << ",";
    out << q.weights[j] << "\n";
  }
}

}  // namespace sharptrace
