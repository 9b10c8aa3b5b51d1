#pragma once

// A fixed solid spherical harmonic P_k of each degree: Re (x1 + i x2)^k for
// n = 2, and the zonal harmonic about the last axis, |x|^k C_k^{(n-2)/2}(x_n/|x|),
// for n >= 3 (the Legendre polynomial P_k when n = 3).

#include <vector>

#include "sharptrace/types.hpp"

namespace sharptrace {

class Harmonic {
 public:
  Harmonic(int n, int k);

  int dimension() const { return n_; }
  int degree() const { return k_; }

  /// P_k(x), homogeneous of degree k.
  double polynomial(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// Y_k(theta) = P_k(x / |x|).
  double on_sphere(const Vec& x) const;
  /// int_{S^{n-1}} Y_k^2 d omega.
  double norm_squared() const { return norm_squared_; }

 private:
  int n_, k_;
  // P = sum_m coeff_[m] x_n^{k-2m} |x|^{2m} (n >= 3)
  std::vector<double> coeff_;
  double norm_squared_ = 0.0;
};

}  // namespace sharptrace
