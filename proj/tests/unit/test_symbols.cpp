#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "sharptrace/errors.hpp"
#include "sharptrace/symbols.hpp"

using namespace sharptrace;

namespace {

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Mat diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

HomogeneousSymbol sample_perturbed() {
  AngularProfile h;
  h.c0 = 0.3;
  h.b = vec({0.2, -0.1, 0.4});
  h.C = Mat::Zero(3, 3);
  h.C(0, 1) = h.C(1, 0) = 0.25;
  h.C(2, 2) = -0.3;
  return HomogeneousSymbol::perturbed_sphere(3, 0.2, h);
}

// central differences, used only as an oracle
Vec fd_gradient(const Symbol& s, const Vec& x) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = 1e-6;
    g(i) = (s.value(x + e) - s.value(x - e)) / 2e-6;
  }
  return g;
}

Mat fd_hessian(const Symbol& s, const Vec& x) {
  Mat h(x.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = 1e-6;
    h.col(i) = (s.gradient(x + e) - s.gradient(x - e)) / 2e-6;
  }
  return h;
}

}  // namespace

TEST_CASE("spec examples for direct evaluation") {
  auto sphere = HomogeneousSymbol::sphere(3);
  const Vec x = vec({0.3, -1.2, 0.7});
  CHECK(sphere.value(x) == doctest::Approx(x.squaredNorm()));
  CHECK((sphere.gradient(x) - 2 * x).norm() == 0.0);
  CHECK((sphere.hessian(x) - 2 * Mat::Identity(3, 3)).norm() == 0.0);

  auto ellipse = HomogeneousSymbol::quadratic(diag({1, 4}));
  CHECK(ellipse.value(vec({1, 1})) == doctest::Approx(5.0));
  CHECK((ellipse.gradient(vec({1, 1})) - vec({2, 8})).norm() < 1e-15);

  auto quartic = HomogeneousSymbol::quartic(2);
  CHECK(quartic.value(vec({1, 1})) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("closed-form derivatives match finite differences") {
  std::vector<HomogeneousSymbol> symbols = {HomogeneousSymbol::quadratic(diag({1, 4})),
                                            HomogeneousSymbol::quartic(3), sample_perturbed(),
                                            HomogeneousSymbol::quartic(2)};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (const auto& s : symbols) {
    for (int trial = 0; trial < 20; ++trial) {
      Vec x(s.dimension());
      for (int i = 0; i < x.size(); ++i) x(i) = normal(rng);
      CHECK((s.gradient(x) - fd_gradient(s, x)).norm() < 1e-6 * s.gradient(x).norm());
      CHECK((s.hessian(x) - fd_hessian(s, x)).norm() < 1e-5 * (1 + s.hessian(x).norm()));
      CHECK((s.hessian(x) - s.hessian(x).transpose()).norm() < 1e-12);
    }
  }
}

TEST_CASE("homogeneity and Euler identity") {
  auto sphere = HomogeneousSymbol::sphere(3);
  auto r = check_homogeneity_euler(sphere, 200, 11);
  CHECK(r.max_scaling_defect < 1e-14);
  CHECK(r.max_euler_defect < 1e-14);

  auto quartic = HomogeneousSymbol::quartic(2);
  const Vec ones = vec({1, 1});
  CHECK(std::abs(0.5 * ones.dot(quartic.gradient(ones)) - std::sqrt(2.0)) < 1e-12);
  r = check_homogeneity_euler(quartic, 200, 3);
  CHECK(r.max_scaling_defect < 1e-12);
  CHECK(r.max_euler_defect < 1e-10);

  auto flat = HomogeneousSymbol::perturbed_sphere(3, 0.0, {});
  r = check_homogeneity_euler(flat, 100, 5);
  CHECK(r.max_scaling_defect < 1e-14);
  CHECK(r.max_euler_defect < 1e-14);

  r = check_homogeneity_euler(sample_perturbed(), 300, 9);
  CHECK(r.max_scaling_defect < 1e-12);
  CHECK(r.max_euler_defect < 1e-10);
  CHECK(r.min_value > 0);
  CHECK(r.min_gradient_norm > 0);

  // same seed, same report
  const auto a = check_homogeneity_euler(sample_perturbed(), 50, 42);
  const auto b = check_homogeneity_euler(sample_perturbed(), 50, 42);
  CHECK(a.max_euler_defect == b.max_euler_defect);
  CHECK_THROWS_AS(check_homogeneity_euler(sphere, 0), InvalidArgument);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(HomogeneousSymbol::quadratic(diag({1, -1})), InvalidArgument);
  Mat skew(2, 2);
  skew << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(HomogeneousSymbol::quadratic(skew), InvalidArgument);
  AngularProfile h;
  h.c0 = 1.0;
  CHECK_THROWS_AS(HomogeneousSymbol::perturbed_sphere(3, 0.6, h), InvalidArgument);
  CHECK_NOTHROW(HomogeneousSymbol::perturbed_sphere(3, 0.4, h));
  CHECK_THROWS_AS(HomogeneousSymbol::sphere(1), InvalidArgument);
  CHECK_THROWS_AS(make_symbol("cubic", {}, 3), InvalidArgument);
  CHECK_THROWS_AS(HomogeneousSymbol::from_json({{"family", "sphere"}, {"n", 3}, {"radius", 2}}),
                  InvalidArgument);
}

TEST_CASE("json round trip") {
  for (const auto& s : {HomogeneousSymbol::quadratic(diag({1, 4})), HomogeneousSymbol::quartic(3),
                        sample_perturbed(), HomogeneousSymbol::sphere(3)}) {
    const auto back = HomogeneousSymbol::from_json(s.to_json());
    CHECK(back.to_json() == s.to_json());
  }
  const auto parsed = HomogeneousSymbol::from_json(
      nlohmann::json::parse(R"({"family": "quadratic", "matrix": [[1,0,0],[0,2,0],[0,0,3]], "n": 3})"));
  CHECK(parsed.value(vec({1, 1, 1})) == doctest::Approx(6.0));
}

TEST_CASE("curvature certificate") {
  auto sphere = min_hessian_det_on_level(HomogeneousSymbol::sphere(3), 16);
  CHECK(sphere.min_det == doctest::Approx(8.0));
  CHECK(sphere.positive());
  auto ellipse = min_hessian_det_on_level(HomogeneousSymbol::quadratic(diag({1, 4})), 32);
  CHECK(ellipse.min_det == doctest::Approx(16.0));
  auto quartic = min_hessian_det_on_level(HomogeneousSymbol::quartic(2), 256);
  CHECK(quartic.min_det < 0.01);
  auto quartic3 = min_hessian_det_on_level(HomogeneousSymbol::quartic(3), 64);
  CHECK(quartic3.min_det < 0.01);
  // odd face resolutions miss the axis points, so the minimum decreases toward 0
  const auto coarse = min_hessian_det_on_level(HomogeneousSymbol::quartic(3), 5).min_det;
  const auto fine = min_hessian_det_on_level(HomogeneousSymbol::quartic(3), 65).min_det;
  CHECK(coarse > 0);
  CHECK(fine < coarse);
  CHECK(min_hessian_det_on_level(sample_perturbed(), 24).positive());
  // serial and parallel agree exactly
  const auto s = min_hessian_det_on_level(sample_perturbed(), 24, Execution::serial);
  const auto p = min_hessian_det_on_level(sample_perturbed(), 24, Execution::parallel);
  CHECK(s.min_det == p.min_det);
}

TEST_CASE("level set samples lie on a = 1") {
  for (const auto& s : {HomogeneousSymbol::quartic(3), sample_perturbed()}) {
    for (const auto& p : level_set_samples(s, 10)) CHECK(std::abs(s.value(p) - 1) < 1e-14);
  }
}

TEST_CASE("hessian determinant is homogeneous of degree zero") {
  auto q = HomogeneousSymbol::quartic(2);
  for (double phi = 0.1; phi < 6; phi += 0.7) {
    const Vec x = vec({std::cos(phi), std::sin(phi)});
    for (double lambda : {0.3, 2.0, 7.5}) {
      CHECK(std::abs(q.hessian(lambda * x).determinant() - q.hessian(x).determinant()) <
            1e-10 * (1 + std::abs(q.hessian(x).determinant())));
    }
  }
}

TEST_CASE("dual function: closed forms and invariants") {
  auto sphere = HomogeneousSymbol::sphere(3);
  const Vec x = vec({0.4, -1.1, 0.9});
  CHECK(std::abs(dual_eval(sphere, x).value - x.squaredNorm() / 4) < 1e-14);

  const Mat A = diag({1, 4});
  auto ellipse = HomogeneousSymbol::quadratic(A);
  CHECK(std::abs(dual_eval(ellipse, vec({2, 0})).value - 1.0) < 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int i = 0; i < 50; ++i) {
    const double phi = 2 * 3.141592653589793 * unit(rng);
    const Vec y = (0.5 + 1.5 * unit(rng)) * vec({std::cos(phi), std::sin(phi)});
    const double closed = 0.25 * y.dot(A.inverse() * y);
    const auto d = dual_eval(ellipse, y);
    CHECK(std::abs(d.value - closed) < 1e-8);
    CHECK(d.residual < 1e-10);
    for (double mu : {0.5, 2.0, 3.0}) {
      CHECK(std::abs(dual_eval(ellipse, mu * y).value / d.value - mu * mu) < 1e-8);
    }
  }
  for (const auto& s : {ellipse, sample_perturbed()}) {
    for (const auto& xi : level_set_samples(s, 12)) {
      CHECK(std::abs(dual_eval(s, s.gradient(xi)).value - 1.0) < 1e-8);
    }
  }
  CHECK_THROWS_AS(dual_eval(sphere, Vec::Zero(3)), InvalidArgument);
}

TEST_CASE("dual round trip recovers the symbol") {
  for (auto base : {HomogeneousSymbol::sphere(2), HomogeneousSymbol::quadratic(diag({1, 4})),
                    HomogeneousSymbol::sphere(3), sample_perturbed()}) {
    auto src = std::make_shared<HomogeneousSymbol>(base);
    auto cert = min_hessian_det_on_level(*src, 32);
    auto dual = std::make_shared<DualSymbol>(src, cert);
    DualSymbol dual_dual(dual, min_hessian_det_on_level(*dual, 8));
    const int n = base.dimension();
    std::mt19937_64 rng(17);
    std::normal_distribution<double> normal;
    for (int i = 0; i < 100; ++i) {
      Vec y(n);
      for (int k = 0; k < n; ++k) y(k) = normal(rng);
      y /= y.norm();
      CHECK(std::abs(dual_dual.value(y) - base.value(y)) < 1e-6);
    }
  }
}

TEST_CASE("dual symbol requires a positive certificate") {
  auto q = std::make_shared<HomogeneousSymbol>(HomogeneousSymbol::quartic(2));
  CHECK_THROWS_AS(DualSymbol(q, min_hessian_det_on_level(*q, 256)), HypothesisViolation);
}
