#include "sharptrace/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include "sharptrace/errors.hpp"
#include "sharptrace/special_functions.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace::quadrature {

Rule gauss_legendre(int n) {
  if (n < 1) throw InvalidArgument("gauss_legendre: need at least one node");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double step = p0 / dp;
      z -= step;
      if (std::abs(step) < 1e-16) {
        // refresh derivative at the converged node
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < n; ++j) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        break;
      }
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

Rule gauss_legendre(int n, double a, double b) {
  Rule rule = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = c + h * rule.nodes[i];
    rule.weights[i] *= h;
  }
  return rule;
}

Rule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw InvalidArgument("gauss_jacobi: need at least one node");
  if (alpha <= -1.0 || beta <= -1.0) {
    throw InvalidArgument("gauss_jacobi: exponents must exceed -1");
  }
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    const double d = 2.0 * k + ab;
    diag(k) = (k == 0) ? (beta - alpha) / (ab + 2.0)
                       : (beta * beta - alpha * alpha) / (d * (d + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double d = 2.0 * k + ab;
    double b;
    if (k == 1) {
      // cancelled form; stays finite when alpha + beta = -1
      b = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    } else {
      b = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
          (d * d * (d + 1.0) * (d - 1.0));
    }
    off(k - 1) = std::sqrt(b);
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + log_gamma(alpha + 1.0) +
                              log_gamma(beta + 1.0) - log_gamma(ab + 2.0));
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  if (n == 1) {
    rule.nodes[0] = diag(0);
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off.head(n - 1), Eigen::ComputeEigenvectors);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    rule.weights[i] = mu0 * v0 * v0;
  }
  return rule;
}

}  // namespace sharptrace::quadrature
