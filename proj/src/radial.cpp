#include "sharptrace/radial.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>

#include "sharptrace/errors.hpp"
#include "sharptrace/grid_field.hpp"
#include "sharptrace/quadrature.hpp"
#include "sharptrace/surfaces.hpp"

#ifndef SHARPTRACE_CALIBRATION_PATH
#define SHARPTRACE_CALIBRATION_PATH "data/radial_kernel_calibration.json"
#endif

namespace sharptrace {

namespace {

cdouble i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

// integral of `integrand` over the support of p, panels no wider than pi / freq
template <class T, class F>
T radial_quadrature(const RadialProfile& p, double freq, F&& integrand) {
  const double panel = kPi / std::max({freq, p.oscillation, 1.0});
  T total{};
  double a = p.r_min;
  if (a == 0.0) {
    const double b0 = std::min(p.r_max, panel);
    total += quadrature::integrate_from_origin<T>(integrand, b0).value;
    a = b0;
  }
  total += quadrature::integrate_panels<T>(integrand, a, p.r_max, panel, 1e-12).value;
  return total;
}

}  // namespace

RadialProfile RadialProfile::make(int n, int k, std::function<cdouble(double)> g, double r_min,
                                  double r_max, double origin_exponent) {
  if (n < 2 || n > kMaxDim) throw InvalidArgument("RadialProfile: dimension out of range");
  if (k < 0) throw InvalidArgument("RadialProfile: degree must be >= 0");
  if (!(r_min >= 0.0) || !(r_max > r_min) || !std::isfinite(r_max)) {
    throw InvalidArgument("RadialProfile: support must satisfy 0 <= r_min < r_max < inf");
  }
  RadialProfile p;
  p.n = n;
  p.k = k;
  p.g = std::move(g);
  p.r_min = r_min;
  p.r_max = r_max;
  p.origin_exponent = origin_exponent;
  p.harmonic_ = std::make_shared<const Harmonic>(n, k);
  return p;
}

const Harmonic& RadialProfile::harmonic() const {
  if (!harmonic_) throw InvalidArgument("RadialProfile: built without RadialProfile::make");
  return *harmonic_;
}

cdouble RadialProfile::transform(const Vec& xi) const {
  const double r = xi.norm();
  if (r == 0.0) return k == 0 && r_min == 0.0 ? g(0.0) : 0.0;
  if (r < r_min || r > r_max) return 0.0;
  return g(r) * harmonic().on_sphere(xi);
}

nlohmann::json RadialProfile::to_json() const {
  return {{"family", family}, {"params", params}, {"n", n},         {"k", k},
          {"r_min", r_min},   {"r_max", r_max},   {"nu", nu()}};
}

cdouble hankel_integral(const RadialProfile& p, double order, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("hankel_integral: rho must be positive");
  const double half_n = 0.5 * p.n;
  auto integrand = [&](double r) -> cdouble {
    if (r <= 0.0) return 0.0;
    return p.g(r) * bessel_j(order, r * rho) * std::pow(r, half_n);
  };
  return radial_quadrature<cdouble>(p, rho, integrand);
}

RadialIntegrals radial_integrals(const RadialKernel& kernel, const RadialProfile& p, double rho, bool riesz) {
  RadialIntegrals out;
  out.rho = rho;
  out.kappa = kernel.kappa(p.n);
  out.value = hankel_integral(p, p.nu(), rho);
  if (riesz) {
    out.up = hankel_integral(p, p.nu() + 1.0, rho);
    if (p.k > 0) out.down = hankel_integral(p, p.nu() - 1.0, rho);
    out.has_riesz = true;
  }
  return out;
}

cdouble radial_trace_coefficient(const RadialIntegrals& I, const RadialProfile& p) {
  return I.kappa * i_power(p.k) * std::pow(I.rho, 1.0 - 0.5 * p.n) * I.value;
}

cdouble radial_trace_coefficient(const RadialKernel& kernel, const RadialProfile& p, double rho) {
  return radial_trace_coefficient(radial_integrals(kernel, p, rho, false), p);
}

cdouble radial_value(const RadialIntegrals& I, const RadialProfile& p, const Vec& x) {
  return radial_trace_coefficient(I, p) * p.harmonic().on_sphere(x);
}

cdouble radial_value(const RadialKernel& kernel, const RadialProfile& p, const Vec& x) {
  const double rho = x.norm();
  if (rho == 0.0) throw InvalidArgument("radial_value: x = 0");
  return radial_value(radial_integrals(kernel, p, rho, false), p, x);
}

std::vector<cdouble> radial_riesz_values(const RadialIntegrals& I, const RadialProfile& p, const Vec& x) {
  if (!I.has_riesz) throw InvalidArgument("radial_riesz_values: integrals computed without the Riesz orders");
  const double rho = x.norm();
  const int n = p.n, k = p.k;
  const Vec theta = x / rho;
  const auto& Y = p.harmonic();
  const double P = Y.polynomial(theta);
  const Vec dP = Y.gradient(theta);
  const double denom = n + 2.0 * k - 2.0;
  const double scale = I.kappa * std::pow(I.rho, 1.0 - 0.5 * n);
  const cdouble up = i_power(k + 1) * I.up;
  const cdouble down = k > 0 ? i_power(k - 1) * I.down : cdouble(0.0);
  std::vector<cdouble> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double zm = denom > 0.0 ? dP(j) / denom : 0.0;
    const double zp = theta(j) * P - zm;
    out[static_cast<std::size_t>(j)] = scale * (up * zp + down * zm);
  }
  return out;
}

std::vector<cdouble> radial_riesz_values(const RadialKernel& kernel, const RadialProfile& p,
                                         const Vec& x) {
  const double rho = x.norm();
  if (rho == 0.0) throw InvalidArgument("radial_riesz_values: x = 0");
  return radial_riesz_values(radial_integrals(kernel, p, rho, true), p, x);
}

double radial_weighted_l2(const RadialProfile& p, const WeightSpec& w) {
  if (p.r_min == 0.0) {
    // |g|^2 w^2 r^{n-1} ~ r^{2 beta + 2 gamma_0 + n - 1}
    const double e = 2.0 * p.origin_exponent + 2.0 * w.exponent_at_zero() + p.n - 1.0;
    if (e <= -1.0) return std::numeric_limits<double>::infinity();
  }
  auto integrand = [&](double r) -> double {
    if (r <= 0.0) return 0.0;
    const double wr = w(r);
    return std::norm(p.g(r)) * wr * wr * std::pow(r, p.n - 1);
  };
  return radial_quadrature<double>(p, 1.0, integrand);
}

double sobolev_norm(const RadialProfile& p, const WeightSpec& w) {
  const double integral = radial_weighted_l2(p, w);
  if (!std::isfinite(integral)) return integral;
  return std::pow(2.0 * kPi, -0.5 * p.n) * std::sqrt(p.harmonic().norm_squared() * integral);
}

// --- calibration -----------------------------------------------------------

RadialKernel RadialKernel::calibrate(const std::vector<int>& dims, Execution exec) {
  RadialKernel kernel;
  const std::vector<double> radii{0.5, 1.0, 1.5, 2.0};
  for (int n : dims) {
    if (n < 2 || n > 3) throw InvalidArgument("calibrate: the grid path supports n = 2 and 3 only");
    // trigonometric evaluation is spectrally accurate for these Gaussians;
    // the box keeps e^{-|x|^2/2} below 1e-13 at the boundary
    const GridSpec spec{n, 64, 16.0};
    const SphereRule rule = sphere_rule(n, 8);
    std::vector<cdouble> grid_values, radial_values;
    for (int k = 0; k <= 2; ++k) {
      const Harmonic Y(n, k);
      const auto field = GridField::from_function(
          spec, [&](const Vec& x) -> cdouble { return Y.polynomial(x) * std::exp(-0.5 * x.squaredNorm()); },
          exec);
      // Hecke: F[P e^{-|x|^2/2}] = (2 pi)^{n/2} (-i)^k P(xi) e^{-|xi|^2/2}
      const double c = std::pow(2.0 * kPi, 0.5 * n);
      const cdouble phase = i_power(-k);
      auto p = RadialProfile::make(
          n, k, [c, phase, k](double r) -> cdouble { return c * phase * std::pow(r, k) * std::exp(-0.5 * r * r); },
          0.0, 14.0, k);
      for (double rho : radii) {
        // coefficient with kappa = 1
        const cdouble coeff =
            i_power(k) * std::pow(rho, 1.0 - 0.5 * n) * hankel_integral(p, p.nu(), rho);
        for (const Vec& theta : rule.nodes) {
          grid_values.push_back(field.evaluate(rho * theta));
          radial_values.push_back(coeff * Y.on_sphere(theta));
        }
      }
    }
    double num = 0.0, den = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < grid_values.size(); ++i) {
      num += std::real(std::conj(radial_values[i]) * grid_values[i]);
      den += std::norm(radial_values[i]);
      peak = std::max(peak, std::abs(grid_values[i]));
    }
    Entry e;
    e.n = n;
    e.kappa = num / den;
    e.reference = std::pow(2.0 * kPi, -0.5 * n);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid_values.size(); ++i) {
      worst = std::max(worst, std::abs(grid_values[i] - e.kappa * radial_values[i]));
    }
    e.residual = worst / peak;
    e.samples = static_cast<int>(grid_values.size());
    e.grid = spec.to_json();
    kernel.entries_.push_back(e);
  }
  return kernel;
}

nlohmann::json RadialKernel::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) {
    entries.push_back({{"n", e.n},
                       {"kappa", e.kappa},
                       {"reference", e.reference},
                       {"relative_deviation", std::abs(e.kappa - e.reference) / e.reference},
                       {"residual", e.residual},
                       {"samples", e.samples},
                       {"grid", e.grid}});
  }
  return {{"kind", "radial-kernel-calibration"},
          {"version", kVersion},
          {"families", {"P_k(x) exp(-|x|^2/2), k = 0, 1, 2"}},
          {"radii", {0.5, 1.0, 1.5, 2.0}},
          {"entries", entries}};
}

RadialKernel RadialKernel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("kind", "") != "radial-kernel-calibration") {
    throw InvalidArgument("calibration artifact: not a radial-kernel-calibration document");
  }
  if (j.value("version", -1) != kVersion) {
    throw InvalidArgument("calibration artifact: version mismatch (expected " + std::to_string(kVersion) + ")");
  }
  RadialKernel kernel;
  for (const auto& item : j.at("entries")) {
    Entry e;
    e.n = item.at("n").get<int>();
    e.kappa = item.at("kappa").get<double>();
    e.reference = item.at("reference").get<double>();
    e.residual = item.at("residual").get<double>();
    e.samples = item.at("samples").get<int>();
    e.grid = item.at("grid");
    kernel.entries_.push_back(e);
  }
  return kernel;
}

RadialKernel RadialKernel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Uncalibrated("radial kernel uncalibrated: cannot read calibration artifact " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw Uncalibrated("radial kernel uncalibrated: malformed artifact " + path + ": " + ex.what());
  }
  return from_json(j);
}

std::string RadialKernel::default_path() {
  if (const char* env = std::getenv("SHARPTRACE_CALIBRATION"); env && *env) return env;
  return SHARPTRACE_CALIBRATION_PATH;
}

const RadialKernel& RadialKernel::installed() {
  static std::mutex m;
  static std::optional<RadialKernel> cached;
  std::lock_guard<std::mutex> lock(m);
  if (!cached) cached = load(default_path());
  return *cached;
}

bool RadialKernel::has(int n) const {
  for (const auto& e : entries_) {
    if (e.n == n) return true;
  }
  return false;
}

double RadialKernel::kappa(int n) const {
  for (const auto& e : entries_) {
    if (e.n == n) return e.kappa;
  }
  throw Uncalibrated("radial kernel uncalibrated for n = " + std::to_string(n));
}

void RadialKernel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << to_json().dump(2) << "\n";
}

}  // namespace sharptrace
