#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sharptrace/errors.hpp"
#include "sharptrace/grid_field.hpp"
#include "sharptrace/harmonics.hpp"
#include "sharptrace/operators.hpp"
#include "sharptrace/quadrature.hpp"
#include "sharptrace/radial.hpp"
#include "sharptrace/surfaces.hpp"
#include "sharptrace/test_functions.hpp"

using namespace sharptrace;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

// sum_j w_j |f(node_j)|^2 for a sphere of radius rho
double sphere_trace(int n, double rho, const std::function<cdouble(const Vec&)>& f, int res = 12) {
  const auto q = build_quadrature(HomogeneousSymbol::sphere(n), rho, res);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * std::norm(f(q.nodes[i]));
  return std::sqrt(sum);
}

}  // namespace

TEST_CASE("plancherel and round trip hold on the grid") {
  for (int n : {2, 3}) {
    const GridSpec spec = n == 2 ? GridSpec{2, 64, 10.0} : GridSpec{3, 32, 10.0};
    // a non-symmetric smooth field
    const auto f = GridField::from_function(spec, [](const Vec& x) {
      return cdouble(std::exp(-0.5 * (x.array() - 0.3).matrix().squaredNorm()), 0.2 * x(0) * std::exp(-x.squaredNorm()));
    });
    CHECK(relative(f.l2_norm(), std::pow(2.0 * kPi, -0.5 * n) * f.frequency_l2_norm()) < 1e-8);
    const auto back = grid::inverse(spec, grid::forward(spec, {f.space().begin(), f.space().end()}));
    double worst = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) worst = std::max(worst, std::abs(back[i] - f.space()[i]));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("gaussian transform at the origin is (2 pi)^{3/2}") {
  const auto f = GridField::from_function(GridSpec::defaults(3), [](const Vec& x) {
    return cdouble(std::exp(-0.5 * x.squaredNorm()));
  });
  CHECK(relative(f.frequency()[0].real(), std::pow(2.0 * kPi, 1.5)) < 1e-7);
  const auto tf = make_test_function("gaussian", {}, 3);
  REQUIRE(tf.grid);
  REQUIRE(tf.grid->analytic_transform().has_value());
}

TEST_CASE("grid interpolation is cubic accurate and refuses points off the grid") {
  const GridSpec spec{2, 128, 16.0};
  const auto f = GridField::from_function(spec, [](const Vec& x) { return cdouble(std::exp(-0.5 * x.squaredNorm())); });
  const Vec x = vec2(0.3137, -0.771);
  CHECK(std::abs(f.interpolate(x) - std::exp(-0.5 * x.squaredNorm())) < 2e-5);
  CHECK_THROWS_AS(f.interpolate(vec2(7.95, 0.0)), InvalidArgument);
}

TEST_CASE("sobolev norms of the gaussian") {
  const auto tf = make_test_function("gaussian", {}, 3);
  const double expected = std::sqrt(1.5 * std::pow(kPi, 1.5));
  CHECK(relative(sobolev_norm(*tf.grid, WeightSpec::homogeneous(1.0)), expected) < 1e-8);
  CHECK(relative(sobolev_norm(*tf.radial, WeightSpec::homogeneous(1.0)), expected) < 1e-8);
  // s = 0 is the L^2 norm
  CHECK(relative(sobolev_norm(*tf.grid, WeightSpec::homogeneous(0.0)), tf.grid->l2_norm()) < 1e-8);
  // dilation f(l x): ||f(l .)||_{H^s} = l^{s - n/2} ||f||_{H^s}
  for (double l : {0.8, 1.5}) {
    const auto d = make_test_function("gaussian", {{"dilation", l}}, 3);
    for (double s : {0.5, 0.75, 1.25}) {
      const double base = sobolev_norm(*tf.grid, WeightSpec::homogeneous(s));
      CHECK(relative(sobolev_norm(*d.grid, WeightSpec::homogeneous(s)), std::pow(l, s - 1.5) * base) < 1e-6);
      CHECK(relative(sobolev_norm(*d.radial, WeightSpec::homogeneous(s)), std::pow(l, s - 1.5) * base) < 1e-6);
    }
  }
}

TEST_CASE("homogeneous norm diverges when the origin is not integrable") {
  const auto tf = make_test_function("gaussian", {}, 3, std::nullopt, false);
  CHECK(std::isinf(sobolev_norm(*tf.radial, WeightSpec::homogeneous(-1.5))));
  CHECK(std::isfinite(sobolev_norm(*tf.radial, WeightSpec::homogeneous(-1.0))));
  const auto g = make_test_function("gaussian", {}, 2);
  // |xi|^{-1} is integrable in the plane; the lattice cannot see that
  CHECK(relative(sobolev_norm(*g.grid, WeightSpec::homogeneous(-0.5)), sobolev_norm(*g.radial, WeightSpec::homogeneous(-0.5))) <
        1e-6);
  CHECK(std::isinf(sobolev_norm(*g.grid, WeightSpec::homogeneous(-0.5), NormPath::lattice)));
  CHECK(std::isinf(sobolev_norm(*g.grid, WeightSpec::homogeneous(-1.0))));
}

TEST_CASE("multiplier composition adds exponents") {
  const auto tf = make_test_function("shell", {{"radius", 1.5}, {"width", 0.8}}, 2);
  const auto& f = *tf.grid;
  auto power = [](double s) { return [s](const Vec& xi) { return cdouble(std::pow(xi.norm(), s)); }; };
  const auto twice = f.apply_multiplier(power(0.5)).apply_multiplier(power(0.7));
  const auto once = f.apply_multiplier(power(1.2));
  CHECK(twice.max_difference(once) < 1e-10 * once.max_abs());
}

TEST_CASE("separable symbol |xi|^s matches the sobolev norm") {
  const auto tf = make_test_function("gaussian", {}, 2);
  SeparableSymbol sigma;
  sigma.n = 2;
  sigma.alpha = 0.75;
  sigma.terms.push_back({1.0, factors::one(), factors::abs_power(0.75)});
  const auto out = apply_separable_symbol(sigma, *tf.grid);
  CHECK(relative(out.l2_norm(), sobolev_norm(*tf.grid, WeightSpec::homogeneous(0.75), NormPath::lattice)) < 1e-8);
}

TEST_CASE("angular symbol annihilates radial functions") {
  SeparableSymbol sigma;
  sigma.n = 2;
  sigma.terms.push_back({1.0, factors::unit(0), factors::unit(1)});
  sigma.terms.push_back({-1.0, factors::unit(1), factors::unit(0)});
  // f^ is a ring away from 0, so the periodic images of R_j f stay negligible
  const auto tf = make_test_function("harmonic-modulated", {{"center", 5.0}, {"width", 1.1}}, 2);
  const auto out = apply_separable_symbol(sigma, *tf.grid);
  CHECK(out.max_abs() < 1e-8);
  CHECK(tf.grid->apply_multiplier([](const Vec& xi) { return cdouble(xi(1) / std::max(xi.norm(), 1e-300)); })
            .max_abs() > 1e-2);
}

TEST_CASE("separable ordering matches a direct oscillatory integral") {
  // m(x) = x1/|x|, q(xi) = xi2/|xi|, f^ a gaussian ring
  const GridSpec spec{2, 64, 16.0};
  const auto tf = make_test_function("harmonic-modulated", {{"center", 4.0}, {"width", 1.2}}, 2, spec);
  SeparableSymbol sigma;
  sigma.n = 2;
  sigma.terms.push_back({1.0, factors::unit(0), factors::unit(1)});
  const auto out = apply_separable_symbol(sigma, *tf.grid);
  const auto& p = *tf.radial;
  std::vector<double> rn, rw;
  for (int panel = 0; panel < 24; ++panel) {
    const auto rule = quadrature::gauss_legendre(20, 0.5 * panel, 0.5 * (panel + 1));
    rn.insert(rn.end(), rule.nodes.begin(), rule.nodes.end());
    rw.insert(rw.end(), rule.weights.begin(), rule.weights.end());
  }
  const int angles = 512;
  for (std::size_t index : {std::size_t{33 * 64 + 35}, std::size_t{30 * 64 + 40}, std::size_t{20 * 64 + 31},
                            std::size_t{36 * 64 + 28}, std::size_t{45 * 64 + 50}}) {
    const Vec x = spec.point(index);
    cdouble sum = 0.0;
    for (std::size_t a = 0; a < rn.size(); ++a) {
      const double r = rn[a];
      for (int b = 0; b < angles; ++b) {
        const double th = 2.0 * kPi * b / angles;
        const Vec xi = vec2(r * std::cos(th), r * std::sin(th));
        sum += rw[a] * (2.0 * kPi / angles) * r * std::sin(th) * p.g(r) *
               std::exp(cdouble(0.0, x.dot(xi)));
      }
    }
    const cdouble direct = x(0) / x.norm() * sum / (4.0 * kPi * kPi);
    CHECK(std::abs(out.space()[index] - direct) < 1e-8);
  }
}

TEST_CASE("non-homogeneous factors producing NaN at the origin are rejected") {
  Factor bad{[](const Vec& v) { return cdouble(std::log(v.norm()) * 0.0 / v.norm()); },
             std::numeric_limits<double>::quiet_NaN(), std::nullopt, false, "bad"};
  CHECK_THROWS_AS(bad(Vec::Zero(2)), InvalidArgument);
  bad.origin_value = 0.0;
  CHECK(bad(Vec::Zero(2)) == cdouble(0.0));
  CHECK(factors::unit(0)(Vec::Zero(3)) == cdouble(0.0));
}

TEST_CASE("wedge operators on the sphere symbol") {
  const auto sphere = HomogeneousSymbol::sphere(2);
  SUBCASE("radial functions are annihilated") {
    const auto tf = make_test_function("harmonic-modulated", {{"center", 5.0}, {"width", 1.1}}, 2);
    for (auto kind : {WedgeKind::gradient, WedgeKind::dual}) {
      for (const auto& c : wedge_operator_apply(kind, sphere, *tf.grid)) CHECK(c.field.max_abs() < 1e-8);
    }
  }
  SUBCASE("gradient and dual wedges coincide") {
    const auto tf = make_test_function("shell", {{"radius", 1.2}, {"width", 0.6}, {"k", 1}}, 2);
    const auto a = wedge_operator_apply(WedgeKind::gradient, sphere, *tf.grid);
    const auto b = wedge_operator_apply(WedgeKind::dual, sphere, *tf.grid);
    REQUIRE(a.size() == 1);
    CHECK(a[0].field.max_abs() > 1e-2);
    CHECK(a[0].field.max_difference(b[0].field) < 1e-8);
    const auto c = wedge_operator_apply(WedgeKind::omega1, sphere, *tf.grid);
    const auto d = wedge_operator_apply(WedgeKind::omega2, sphere, *tf.grid);
    CHECK(c[0].field.max_difference(d[0].field) < 1e-8 * c[0].field.max_abs());
  }
  SUBCASE("swapping the index pair negates each component exactly") {
    const auto tf = make_test_function("shell", {{"radius", 1.2}, {"width", 0.6}, {"k", 2}}, 3, GridSpec{3, 32, 12.0});
    const auto op = make_wedge_operator(WedgeKind::gradient, HomogeneousSymbol::quadratic(Vec(vec3(1, 2, 3)).asDiagonal().toDenseMatrix()));
    for (const auto& [i, j] : op.pairs()) {
      const auto ij = apply_separable_symbol(op.component(i, j), *tf.grid);
      const auto ji = apply_separable_symbol(op.component(j, i), *tf.grid);
      for (std::size_t s = 0; s < ij.space().size(); ++s) REQUIRE(ij.space()[s] == -ji.space()[s]);
    }
  }
  SUBCASE("dual wedges need a curvature certificate") {
    CHECK_THROWS_AS(make_wedge_operator(WedgeKind::omega2, HomogeneousSymbol::quartic(2)), HypothesisViolation);
    CHECK_NOTHROW(make_wedge_operator(WedgeKind::gradient, HomogeneousSymbol::quartic(2)));
  }
  SUBCASE("wedge factors are homogeneous of the declared degrees") {
    const auto op = make_wedge_operator(WedgeKind::omega1, HomogeneousSymbol::quadratic(Vec(vec3(1, 2, 3)).asDiagonal().toDenseMatrix()));
    CHECK(op.component(0, 2).check_homogeneity().passes(1e-10));
  }
}

TEST_CASE("structure condition on the classical orbits") {
  const auto sphere = HomogeneousSymbol::sphere(2);
  SeparableSymbol angular;
  angular.n = 2;
  angular.terms.push_back({1.0, factors::unit(0), factors::unit(1)});
  angular.terms.push_back({-1.0, factors::unit(1), factors::unit(0)});
  const auto r1 = structure_condition_check(angular, sphere, 200, 3);
  CHECK(r1.same_passes());
  CHECK(r1.opposite_passes());  // odd in x: vanishes on both variants

  SeparableSymbol radial;
  radial.n = 2;
  radial.terms.push_back({1.0, factors::unit(0), factors::unit(0)});
  radial.terms.push_back({1.0, factors::unit(1), factors::unit(1)});
  const auto r2 = structure_condition_check(radial, sphere, 200, 3);
  CHECK_FALSE(r2.same_passes());
  CHECK_FALSE(r2.opposite_passes());
  CHECK(r2.max_same == doctest::Approx(1.0).epsilon(1e-12));

  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 4.0;
  const auto ellipse = HomogeneousSymbol::quadratic(A);
  const auto r3 = structure_condition_check(wedge_square_symbol(ellipse), ellipse, 200, 5);
  CHECK(r3.max_same < 1e-10);
  CHECK(r3.passes());
}

TEST_CASE("evolution is unitary and a group") {
  const auto tf = make_test_function("harmonic-modulated", {{"k", 1}}, 2);
  const auto& phi = *tf.grid;
  Mat A = Mat::Zero(2, 2);
  A(0, 0) = 1.0;
  A(1, 1) = 4.0;
  const auto a = HomogeneousSymbol::quadratic(A);
  CHECK(evolve(a, phi, 0.0).max_difference(phi) < 1e-14);
  for (double t : {0.5, 1.0, 2.0}) CHECK(relative(evolve(a, phi, t).l2_norm(), phi.l2_norm()) < 1e-10);
  const auto two_steps = evolve(a, evolve(a, phi, 0.3), 0.9);
  CHECK(two_steps.max_difference(evolve(a, phi, 1.2)) < 1e-10);
}

TEST_CASE("harmonics: normalization and gradients") {
  for (int k = 0; k <= 4; ++k) {
    CHECK(Harmonic(3, k).norm_squared() == doctest::Approx(4.0 * kPi / (2 * k + 1)).epsilon(1e-12));
    CHECK(Harmonic(2, k).norm_squared() == doctest::Approx(k == 0 ? 2.0 * kPi : kPi).epsilon(1e-12));
  }
  // Legendre P_2 = (3z^2 - 1)/2
  const Vec x = vec3(0.3, -0.4, 0.5);
  const double r2 = x.squaredNorm();
  CHECK(Harmonic(3, 2).polynomial(x) == doctest::Approx(1.5 * 0.25 - 0.5 * r2).epsilon(1e-14));
  for (int n : {2, 3, 5}) {
    const Harmonic Y(n, 3);
    Vec p = Vec::Zero(n);
    for (int d = 0; d < n; ++d) p(d) = 0.2 + 0.1 * d;
    const Vec g = Y.gradient(p);
    double laplacian = 0.0;
    const double h = 1e-3;
    for (int d = 0; d < n; ++d) {
      Vec e = Vec::Zero(n);
      e(d) = 1e-4;
      CHECK(g(d) == doctest::Approx((Y.polynomial(p + e) - Y.polynomial(p - e)) / 2e-4).epsilon(1e-6));
      e(d) = h;
      laplacian += (Y.polynomial(p + e) - 2 * Y.polynomial(p) + Y.polynomial(p - e)) / (h * h);
    }
    CHECK(std::abs(laplacian) < 1e-6);
  }
}

TEST_CASE("radial kernel calibration") {
  const auto& kernel = RadialKernel::installed();
  for (int n : {2, 3}) {
    REQUIRE(kernel.has(n));
    CHECK(relative(kernel.kappa(n), std::pow(2.0 * kPi, -0.5 * n)) < 1e-5);
  }
  CHECK_THROWS_AS(kernel.kappa(5), Uncalibrated);
  CHECK_THROWS_AS(RadialKernel::load("/nonexistent/calibration.json"), Uncalibrated);
  CHECK_THROWS_AS(radial_trace_coefficient(RadialKernel{}, *make_test_function("gaussian", {}, 3, std::nullopt, false).radial, 1.0),
                  Uncalibrated);
}

TEST_CASE("radial and grid paths agree on harmonic gaussians") {
  const auto& kernel = RadialKernel::installed();
  for (int n : {2, 3}) {
    for (int k = 0; k <= 2; ++k) {
      const Harmonic Y(n, k);
      const double c = std::pow(2.0 * kPi, 0.5 * n);
      const cdouble phase = std::pow(cdouble(0.0, -1.0), k);
      auto p = RadialProfile::make(
          n, k, [c, phase, k](double r) -> cdouble { return c * phase * std::pow(r, k) * std::exp(-0.5 * r * r); }, 0.0,
          14.0, k);
      // F[P e^{-|x|^2/2}] = (2 pi)^{n/2} (-i)^k P(xi) e^{-|xi|^2/2}; finer than the
      // default grids so cubic interpolation stays inside the budget
      const GridSpec spec = n == 2 ? GridSpec{2, 256, 16.0} : GridSpec{3, 128, 12.0};
      const auto f = GridField::from_transform(spec, [&Y, c, phase](const Vec& xi) -> cdouble {
        return c * phase * Y.polynomial(xi) * std::exp(-0.5 * xi.squaredNorm());
      });
      for (double rho : {0.5, 1.0, 2.0}) {
        const double grid = sphere_trace(n, rho, [&](const Vec& x) { return f.interpolate(x); });
        const double radial = sphere_trace(n, rho, [&](const Vec& x) { return radial_value(kernel, p, x); });
        // closed form: rho^{k + (n-1)/2} e^{-rho^2/2} ||Y_k||
        const double exact = std::pow(rho, k + 0.5 * (n - 1)) * std::exp(-0.5 * rho * rho) * std::sqrt(Y.norm_squared());
        CHECK(relative(grid, exact) < 1e-4);
        CHECK(relative(radial, exact) < 1e-4);
        CHECK(relative(grid, radial) < 1e-4);
      }
      for (double s : {0.5, 1.0}) {
        CHECK(relative(sobolev_norm(p, WeightSpec::homogeneous(s)), sobolev_norm(f, WeightSpec::homogeneous(s))) < 1e-6);
      }
    }
  }
}

TEST_CASE("harmonic-modulated profile: radial and grid norms agree") {
  const auto tf = make_test_function("harmonic-modulated", {{"k", 1}}, 3, GridSpec{3, 96, 40.0});
  for (double s : {0.0, 0.5, 1.0}) {
    CHECK(relative(sobolev_norm(*tf.radial, WeightSpec::homogeneous(s)), sobolev_norm(*tf.grid, WeightSpec::homogeneous(s))) <
          1e-4);
  }
}

TEST_CASE("radial riesz transforms match the grid multipliers") {
  const auto& kernel = RadialKernel::installed();
  for (int n : {2, 3}) {
    for (int k : {0, 1, 2}) {
      const GridSpec spec = n == 2 ? GridSpec::defaults(2) : GridSpec{3, 64, 12.0};
      const auto tf = make_test_function("harmonic-modulated", {{"center", 4.0}, {"width", 1.2}, {"k", k}}, n, spec);
      for (int j = 0; j < n; ++j) {
        const auto rj = tf.grid->apply_multiplier([j](const Vec& xi) {
          const double r = xi.norm();
          return r == 0.0 ? cdouble(0.0) : cdouble(xi(j) / r);
        });
        const auto q = build_quadrature(HomogeneousSymbol::sphere(n), 1.3, 8);
        double worst = 0.0, peak = 0.0;
        for (const Vec& x : q.nodes) {
          const cdouble radial = radial_riesz_values(kernel, *tf.radial, x)[j];
          const cdouble grid = rj.evaluate(x);
          worst = std::max(worst, std::abs(radial - grid));
          peak = std::max(peak, std::abs(grid));
        }
        CHECK(worst < 1e-4 * std::max(peak, 1e-2));
      }
    }
  }
}

TEST_CASE("radial coefficient of a narrow shell follows J_{1/2}") {
  const auto& kernel = RadialKernel::installed();
  const double r0 = kPi, delta = 1e-3;
  const auto tf = make_test_function("shell", {{"radius", r0}, {"width", delta}}, 3, std::nullopt, false);
  const auto& p = *tf.radial;
  const double mass = quadrature::integrate([&](double r) { return p.g(r).real(); }, r0 - delta, r0 + delta).value;
  // at rho = 1 the argument r0 rho = pi is a zero of J_{1/2}
  const double at_zero = std::abs(radial_trace_coefficient(kernel, p, 1.0));
  for (double rho : {0.3, 0.7, 1.4}) {
    const double predicted = kernel.kappa(3) * std::pow(rho, -0.5) * bessel_j(0.5, r0 * rho) * std::pow(r0, 1.5) * mass;
    const cdouble c = radial_trace_coefficient(kernel, p, rho);
    CHECK(std::abs(c.real() - predicted) < 1e-5 * std::abs(predicted));
    CHECK(at_zero < 1e-5 * std::abs(predicted));
  }
}

TEST_CASE("cauchy-schwarz bound is attained by the cs-optimal profile") {
  const auto& kernel = RadialKernel::installed();
  const int n = 3;
  const WeightSpec w = WeightSpec::homogeneous(1.0);
  const double rho = 1.3, R = 30.0;
  const double kappa2 = kernel.kappa(n) * kernel.kappa(n);
  auto bessel_side = [&](int k) {
    const double nu = 0.5 * n + k - 1.0;
    return quadrature::integrate_panels(
               [&](double r) {
                 const double j = bessel_j(nu, r * rho);
                 return j * j * r / (w(r) * w(r));
               },
               0.0, R, kPi / rho)
        .value;
  };
  for (int k : {0, 1}) {
    const auto p = cs_optimal_profile(n, k, rho, R, w);
    const double lhs = std::norm(radial_trace_coefficient(kernel, p, rho));
    const double rhs = kappa2 * std::pow(rho, 2.0 - n) * bessel_side(k) * radial_weighted_l2(p, w);
    CHECK(relative(lhs, rhs) < 1e-6);
    // a gaussian stays below the bound
    const auto g = make_test_function("harmonic-modulated", {{"k", k}}, n, std::nullopt, false);
    const double lhs_g = std::norm(radial_trace_coefficient(kernel, *g.radial, rho));
    const double rhs_g = kappa2 * std::pow(rho, 2.0 - n) * bessel_side(k) * radial_weighted_l2(*g.radial, w);
    CHECK(lhs_g < rhs_g);
  }
}

TEST_CASE("serial and parallel field kernels are bit identical") {
  const auto tf = make_test_function("shell", {{"radius", 1.0}, {"width", 0.5}, {"k", 1}}, 2);
  const auto op = make_wedge_operator(WedgeKind::omega1, HomogeneousSymbol::sphere(2));
  const auto a = apply_separable_symbol(op.component(0, 1), *tf.grid, Execution::serial);
  const auto b = apply_separable_symbol(op.component(0, 1), *tf.grid, Execution::parallel);
  for (std::size_t i = 0; i < a.space().size(); ++i) REQUIRE(a.space()[i] == b.space()[i]);
}

TEST_CASE("test-function factory") {
  CHECK_THROWS_AS(make_test_function("sinc", {}, 3), InvalidArgument);
  CHECK_THROWS_AS(make_test_function("gaussian", {{"width", 2}}, 3), InvalidArgument);
  const auto shell = make_test_function("shell", {{"width", 0.1}}, 3, std::nullopt, false);
  CHECK(shell.radial->r_min == doctest::Approx(0.9));
  CHECK(shell.radial->r_max == doctest::Approx(1.1));
  CHECK(shell.radial->g(0.85) == cdouble(0.0));
  const auto cs = make_test_function("cs-optimal", {{"k", 1}, {"t", 1.0}, {"R", 10.0}, {"s", 0.5}}, 3);
  CHECK_FALSE(cs.grid);
  REQUIRE(cs.radial);
  CHECK(cs.radial->nu() == doctest::Approx(1.5));
}

TEST_CASE("field dumps carry a sidecar") {
  const auto tf = make_test_function("gaussian", {}, 2, GridSpec{2, 16, 8.0});
  const std::string prefix = "test_fields_dump";
  tf.grid->dump(prefix);
  std::ifstream js(prefix + ".json");
  const auto sidecar = nlohmann::json::parse(js);
  CHECK(sidecar.at("shape") == nlohmann::json::array({16, 16}));
  std::ifstream bin(prefix + ".bin", std::ios::binary | std::ios::ate);
  CHECK(static_cast<std::size_t>(bin.tellg()) == 16 * 16 * sizeof(cdouble));
  std::remove((prefix + ".json").c_str());
  std::remove((prefix + ".bin").c_str());
}
