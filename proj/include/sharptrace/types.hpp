#pragma once

#include <complex>

#include <Eigen/Dense>

namespace sharptrace {

/// Largest ambient dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxDim = 8;

/// Small dense vector in R^n, n <= kMaxDim; never heap allocates.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

}  // namespace sharptrace
