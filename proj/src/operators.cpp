#include "sharptrace/operators.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sharptrace/errors.hpp"
#include "sharptrace/quadrature.hpp"
#include "sharptrace/surfaces.hpp"

namespace sharptrace {

namespace {

double lattice_sobolev(const GridField& f, const WeightSpec& w) {
  const auto& spec = f.spec();
  const auto freq = f.frequency();
  double peak = 0.0;
  for (const auto& v : freq) peak = std::max(peak, std::abs(v));
  double sum = 0.0;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const double r = spec.frequency(i).norm();
    if (r == 0.0 && w.family == WeightSpec::Family::power && w.exponent < 0.0) {
      if (std::abs(freq[i]) > 1e-14 * peak) return std::numeric_limits<double>::infinity();
      continue;
    }
    const double wr = w(r);
    sum += wr * wr * std::norm(freq[i]);
  }
  return std::pow(2.0 * kPi, -0.5 * spec.n) * std::sqrt(sum * std::pow(spec.dxi(), spec.n));
}

double analytic_sobolev(const GridField& f, const WeightSpec& w, int angular_resolution) {
  const auto& spec = f.spec();
  const auto& fhat = *f.analytic_transform();
  const int n = spec.n;
  const double origin = std::abs(fhat(Vec::Zero(n)));
  if (origin > 0.0 && n - 1 + 2.0 * w.exponent_at_zero() <= -1.0) return std::numeric_limits<double>::infinity();
  const auto rule = sphere_rule(n, angular_resolution);
  auto integrand = [&](double r) {
    if (r <= 0.0) return 0.0;
    double shell = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) shell += rule.weights[i] * std::norm(fhat(Vec(r * rule.nodes[i])));
    const double wr = w(r);
    return shell * wr * wr * std::pow(r, n - 1);
  };
  const double r_max = spec.nyquist();
  const double head = std::min(1.0, r_max);
  double sum = quadrature::integrate_from_origin<double>(integrand, head).value;
  sum += quadrature::integrate_panels<double>(integrand, head, r_max, 1.0, 1e-12).value;
  return std::pow(2.0 * kPi, -0.5 * n) * std::sqrt(sum);
}

}  // namespace

double sobolev_norm(const GridField& f, const WeightSpec& w, NormPath path, int angular_resolution) {
  if (path == NormPath::automatic) path = f.analytic_transform() ? NormPath::analytic : NormPath::lattice;
  if (path == NormPath::lattice) return lattice_sobolev(f, w);
  if (!f.analytic_transform()) throw InvalidArgument("sobolev_norm: the field has no closed-form transform");
  return analytic_sobolev(f, w, angular_resolution);
}

// --- factors -----------------------------------------------------------------

cdouble Factor::operator()(const Vec& v) const {
  cdouble value;
  if (!raw_origin && v.squaredNorm() == 0.0) {
    if (origin_value) return *origin_value;
    if (homogeneous()) return 0.0;
  }
  value = fn(v);
  if (std::isnan(value.real()) || std::isnan(value.imag())) {
    std::ostringstream msg;
    msg << "factor " << name << " evaluated to NaN at |v| = " << v.norm()
        << "; configure its origin value";
    throw InvalidArgument(msg.str());
  }
  return value;
}

Factor operator*(const Factor& a, const Factor& b) {
  Factor p;
  p.fn = [a, b](const Vec& v) { return a(v) * b(v); };
  p.degree = a.degree + b.degree;
  p.raw_origin = true;
  p.name = a.name + "*" + b.name;
  return p;
}

namespace factors {

Factor one() { return {[](const Vec&) { return cdouble(1.0); }, 0.0, cdouble(1.0), false, "1"}; }

Factor coordinate(int j) {
  return {[j](const Vec& v) { return cdouble(v(j)); }, 1.0, std::nullopt, false, "v" + std::to_string(j + 1)};
}

Factor unit(int j) {
  return {[j](const Vec& v) { return cdouble(v(j) / v.norm()); }, 0.0, std::nullopt, false,
          "v" + std::to_string(j + 1) + "/|v|"};
}

Factor abs_power(double gamma) {
  std::ostringstream name;
  name << "|v|^" << gamma;
  return {[gamma](const Vec& v) { return cdouble(std::pow(v.norm(), gamma)); }, gamma,
          gamma == 0.0 ? std::optional<cdouble>(1.0) : std::nullopt, false, name.str()};
}

Factor bracket_power(double gamma) {
  std::ostringstream name;
  name << "<v>^" << gamma;
  return {[gamma](const Vec& v) { return cdouble(std::pow(1.0 + v.squaredNorm(), 0.5 * gamma)); },
          std::numeric_limits<double>::quiet_NaN(), std::nullopt, false, name.str()};
}

Factor gradient_direction(std::shared_ptr<const Symbol> s, int j) {
  const std::string name = "(grad/|grad|)_" + std::to_string(j + 1) + "[" + s->describe() + "]";
  return {[s, j](const Vec& v) {
            const Vec g = s->gradient(v);
            return cdouble(g(j) / g.norm());
          },
          0.0, std::nullopt, false, name};
}

}  // namespace factors

// --- separable symbols -------------------------------------------------------

cdouble SeparableSymbol::value(const Vec& x, const Vec& xi) const {
  cdouble sum = 0.0;
  for (const auto& t : terms) sum += t.coefficient * t.m(x) * t.q(xi);
  return sum;
}

SeparableSymbol::HomogeneityCheck SeparableSymbol::check_homogeneity(int samples, std::uint64_t seed) const {
  HomogeneityCheck out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.5, 2.0), log_scale(std::log(0.25), std::log(4.0));
  auto check = [&](const Factor& f, double declared) {
    if (!f.homogeneous()) return;
    if (std::abs(f.degree - declared) > 1e-12) {
      out.max_defect = std::numeric_limits<double>::infinity();
      return;
    }
    for (int s = 0; s < samples; ++s) {
      Vec v(n);
      for (int d = 0; d < n; ++d) v(d) = normal(rng);
      v *= radius(rng) / v.norm();
      const double l = std::exp(log_scale(rng));
      const cdouble expected = std::pow(l, f.degree) * f(v);
      const double defect = std::abs(f(l * v) - expected) / std::max(1.0, std::abs(expected));
      out.max_defect = std::max(out.max_defect, defect);
      ++out.samples;
    }
  };
  for (const auto& t : terms) {
    check(t.m, beta);
    check(t.q, alpha);
  }
  return out;
}

GridField apply_separable_symbol(const SeparableSymbol& sigma, const GridField& f, Execution exec) {
  const auto& spec = f.spec();
  if (sigma.n != spec.n) throw InvalidArgument("apply_separable_symbol: dimension mismatch");
  std::vector<cdouble> sum(spec.size(), 0.0);
  for (const auto& term : sigma.terms) {
    std::vector<cdouble> freq(f.frequency().begin(), f.frequency().end());
    kernels::for_each_index(exec, freq.size(), [&](std::size_t i) { freq[i] *= term.q(spec.frequency(i)); });
    const auto space = grid::inverse(spec, std::move(freq), exec);
    kernels::for_each_index(exec, sum.size(), [&](std::size_t i) {
      sum[i] += term.coefficient * term.m(spec.point(i)) * space[i];
    });
  }
  return GridField::from_space(spec, std::move(sum), exec);
}

// --- wedges ------------------------------------------------------------------

const char* to_string(WedgeKind kind) {
  switch (kind) {
    case WedgeKind::gradient: return "gradient";
    case WedgeKind::dual: return "dual";
    case WedgeKind::omega1: return "omega1";
    case WedgeKind::omega2: return "omega2";
  }
  return "unknown";
}

WedgeKind wedge_kind_from_string(const std::string& name) {
  if (name == "gradient") return WedgeKind::gradient;
  if (name == "dual") return WedgeKind::dual;
  if (name == "omega1") return WedgeKind::omega1;
  if (name == "omega2") return WedgeKind::omega2;
  throw InvalidArgument("unknown wedge kind '" + name + "' (expected gradient, dual, omega1, omega2)");
}

WedgeOperator make_wedge_operator(WedgeKind kind, const HomogeneousSymbol& sym, int certificate_resolution) {
  WedgeOperator op;
  op.kind = kind;
  op.n = sym.dimension();
  op.symbol = std::make_shared<const HomogeneousSymbol>(sym);
  if (kind == WedgeKind::dual || kind == WedgeKind::omega2) {
    const auto cert = min_hessian_det_on_level(sym, certificate_resolution);
    op.dual = std::make_shared<const DualSymbol>(op.symbol, cert);
  }
  return op;
}

std::vector<std::pair<int, int>> WedgeOperator::pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.emplace_back(i, j);
  }
  return out;
}

SeparableSymbol WedgeOperator::component(int i, int j) const {
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw InvalidArgument("wedge component: bad index pair");
  // p(x) and q(xi) unit fields; component = p_i q_j - p_j q_i
  auto p = [&](int c) -> Factor {
    switch (kind) {
      case WedgeKind::gradient: return factors::gradient_direction(symbol, c);
      case WedgeKind::dual: return factors::unit(c);
      case WedgeKind::omega1: return factors::abs_power(-0.5) * factors::unit(c);
      case WedgeKind::omega2: return factors::abs_power(-0.5) * factors::gradient_direction(dual, c);
    }
    return factors::one();
  };
  auto q = [&](int c) -> Factor {
    switch (kind) {
      case WedgeKind::gradient: return factors::unit(c);
      case WedgeKind::dual: return factors::gradient_direction(dual, c);
      case WedgeKind::omega1: return factors::gradient_direction(symbol, c) * factors::abs_power(0.5);
      case WedgeKind::omega2: return factors::unit(c) * factors::abs_power(0.5);
    }
    return factors::one();
  };
  SeparableSymbol s;
  s.n = n;
  s.beta = (kind == WedgeKind::omega1 || kind == WedgeKind::omega2) ? -0.5 : 0.0;
  s.alpha = (kind == WedgeKind::omega1 || kind == WedgeKind::omega2) ? 0.5 : 0.0;
  s.terms.push_back({1.0, p(i), q(j)});
  s.terms.push_back({-1.0, p(j), q(i)});
  s.name = std::string(to_string(kind)) + "[" + std::to_string(i + 1) + "," + std::to_string(j + 1) + "]";
  return s;
}

std::vector<WedgeComponent> wedge_operator_apply(const WedgeOperator& op, const GridField& f, Execution exec) {
  std::vector<WedgeComponent> out;
  for (const auto& [i, j] : op.pairs()) {
    out.push_back({i, j, apply_separable_symbol(op.component(i, j), f, exec)});
  }
  return out;
}

std::vector<WedgeComponent> wedge_operator_apply(WedgeKind kind, const HomogeneousSymbol& sym,
                                                 const GridField& f, Execution exec) {
  return wedge_operator_apply(make_wedge_operator(kind, sym), f, exec);
}

SeparableSymbol wedge_square_symbol(const HomogeneousSymbol& sym) {
  const auto a = std::make_shared<const HomogeneousSymbol>(sym);
  SeparableSymbol s;
  s.n = sym.dimension();
  s.beta = 0.0;
  s.alpha = 2.0;
  s.name = "wedge-square[" + sym.describe() + "]";
  for (int i = 0; i < s.n; ++i) {
    for (int j = i + 1; j < s.n; ++j) {
      const auto ni = factors::gradient_direction(a, i), nj = factors::gradient_direction(a, j);
      const auto xi_i = factors::coordinate(i), xi_j = factors::coordinate(j);
      s.terms.push_back({1.0, ni * ni, xi_j * xi_j});
      s.terms.push_back({-2.0, ni * nj, xi_i * xi_j});
      s.terms.push_back({1.0, nj * nj, xi_i * xi_i});
    }
  }
  return s;
}

nlohmann::json StructureReport::to_json() const {
  return {{"samples", samples},
          {"seed", seed},
          {"max_same", max_same},
          {"max_opposite", max_opposite},
          {"scale", scale},
          {"tolerance", tolerance},
          {"same_passes", same_passes()},
          {"opposite_passes", opposite_passes()},
          {"passes", passes()}};
}

StructureReport structure_condition_check(const SeparableSymbol& sigma, const Symbol& sym, int samples,
                                          std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("structure_condition_check: samples must be >= 1");
  const int n = sym.dimension();
  if (sigma.n != n) throw InvalidArgument("structure_condition_check: dimension mismatch");
  StructureReport r;
  r.samples = samples;
  r.seed = seed;
  r.scale = 1.0;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> radius(0.5, 2.0), lambda_dist(-4.0, 4.0);
  auto random_point = [&] {
    Vec v(n);
    for (int d = 0; d < n; ++d) v(d) = normal(rng);
    return Vec(v * (radius(rng) / v.norm()));
  };
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_point();
    double lambda = 0.0;
    while (std::abs(lambda) < 1.0 / 64.0) lambda = lambda_dist(rng);
    const Vec xi = lambda * sym.gradient(x);
    r.max_same = std::max(r.max_same, std::abs(sigma.value(x, xi)));
    r.max_opposite = std::max(r.max_opposite, std::abs(sigma.value(Vec(-x), xi)));
    // unconstrained pair of comparable size for the scale
    const Vec eta = random_point() * xi.norm();
    r.scale = std::max(r.scale, std::abs(sigma.value(x, eta)));
  }
  return r;
}

GridField evolve(const Symbol& sym, const GridField& phi, double t, Execution exec) {
  if (sym.dimension() != phi.spec().n) throw InvalidArgument("evolve: dimension mismatch");
  return phi.apply_multiplier(
      [&](const Vec& xi) { return xi.squaredNorm() == 0.0 ? cdouble(1.0) : std::polar(1.0, t * sym.value(xi)); },
      exec);
}

}  // namespace sharptrace
