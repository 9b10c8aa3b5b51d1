#include "sharptrace/harmonics.hpp"

#include <cmath>

#include "sharptrace/errors.hpp"
#include "sharptrace/special_functions.hpp"
#include "sharptrace/surfaces.hpp"

namespace sharptrace {

Harmonic::Harmonic(int n, int k) : n_(n), k_(k) {
  if (n < 2 || n > kMaxDim) throw InvalidArgument("Harmonic: dimension out of range");
  if (k < 0) throw InvalidArgument("Harmonic: degree must be >= 0");
  if (n >= 3) {
    // Gegenbauer C_k^lambda(t) = sum_m (-1)^m Gamma(k-m+lambda) / (Gamma(lambda) m! (k-2m)!) (2t)^{k-2m}
    const double lambda = 0.5 * (n - 2);
    for (int m = 0; 2 * m <= k; ++m) {
      const double log_mag = log_gamma(k - m + lambda) - log_gamma(lambda) - std::lgamma(m + 1.0) -
                             std::lgamma(k - 2.0 * m + 1.0) + (k - 2 * m) * std::log(2.0);
      coeff_.push_back((m % 2 == 0 ? 1.0 : -1.0) * std::exp(log_mag));
    }
  }
  // exact for polynomials of degree 2k on every supported n
  const auto rule = sphere_rule(n, 2 * k + 4);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double y = polynomial(rule.nodes[i]);
    sum += rule.weights[i] * y * y;
  }
  norm_squared_ = sum;
}

double Harmonic::polynomial(const Vec& x) const {
  if (n_ == 2) return std::real(std::pow(cdouble(x(0), x(1)), k_));
  const double z = x(n_ - 1);
  const double r2 = x.squaredNorm();
  double sum = 0.0;
  for (std::size_t m = 0; m < coeff_.size(); ++m) {
    sum += coeff_[m] * std::pow(z, k_ - 2 * static_cast<int>(m)) * std::pow(r2, static_cast<int>(m));
  }
  return sum;
}

Vec Harmonic::gradient(const Vec& x) const {
  Vec g = Vec::Zero(n_);
  if (k_ == 0) return g;
  if (n_ == 2) {
    const cdouble w = static_cast<double>(k_) * std::pow(cdouble(x(0), x(1)), k_ - 1);
    g(0) = w.real();
    g(1) = -w.imag();
    return g;
  }
  const double z = x(n_ - 1);
  const double r2 = x.squaredNorm();
  for (std::size_t mi = 0; mi < coeff_.size(); ++mi) {
    const int m = static_cast<int>(mi);
    const int p = k_ - 2 * m;
    if (p > 0) g(n_ - 1) += coeff_[mi] * p * std::pow(z, p - 1) * std::pow(r2, m);
    if (m > 0) g += coeff_[mi] * std::pow(z, p) * 2.0 * m * std::pow(r2, m - 1) * x;
  }
  return g;
}

double Harmonic::on_sphere(const Vec& x) const {
  const double r = x.norm();
  if (r == 0.0) throw InvalidArgument("Harmonic::on_sphere: x = 0");
  return polynomial(x) / std::pow(r, k_);
}

}  // namespace sharptrace
