#include "sharptrace/grid_field.hpp"

#include <cmath>
#include <fstream>
#include <mutex>

#include <fftw3.h>

#include "sharptrace/errors.hpp"

namespace sharptrace {

GridSpec GridSpec::defaults(int n) {
  if (n <= 2) return {n, 128, 16.0};
  return {n, 96, 12.0};
}

double GridSpec::dxi() const { return 2.0 * kPi / L; }

std::size_t GridSpec::size() const {
  std::size_t total = 1;
  for (int d = 0; d < n; ++d) total *= static_cast<std::size_t>(N);
  return total;
}

std::array<int, 3> GridSpec::unravel(std::size_t index) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = n - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(index % static_cast<std::size_t>(N));
    index /= static_cast<std::size_t>(N);
  }
  return idx;
}

Vec GridSpec::point(std::size_t index) const {
  const auto idx = unravel(index);
  Vec x(n);
  for (int d = 0; d < n; ++d) x(d) = -0.5 * L + idx[d] * h();
  return x;
}

Vec GridSpec::frequency(std::size_t index) const {
  const auto idx = unravel(index);
  Vec xi(n);
  for (int d = 0; d < n; ++d) {
    const int k = idx[d] < N / 2 ? idx[d] : idx[d] - N;
    xi(d) = k * dxi();
  }
  return xi;
}

double GridSpec::nyquist() const { return kPi * N / L; }

void GridSpec::validate() const {
  if (n < 1 || n > 3) throw InvalidArgument("grid: dimension must be 1, 2 or 3");
  if (N < 8 || N % 2 != 0) throw InvalidArgument("grid: N must be even and >= 8");
  if (!(L > 0.0) || !std::isfinite(L)) throw InvalidArgument("grid: extent L must be positive");
}

nlohmann::json GridSpec::to_json() const { return {{"n", n}, {"N", N}, {"L", L}}; }

namespace grid {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void execute_fft(const GridSpec& spec, std::vector<cdouble>& data, int sign) {
  std::array<int, 3> dims{spec.N, spec.N, spec.N};
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    // FFTW planning is not thread safe; execution of a private plan is.
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(spec.n, dims.data(), ptr, ptr, sign, FFTW_ESTIMATE);
  }
  if (!plan) throw Error("fftw: planning failed");
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

// multiplies sample k by scale * (-1)^{k_1 + ... + k_n}
void checkerboard(const GridSpec& spec, std::vector<cdouble>& data, double scale, Execution exec) {
  kernels::for_each_index(exec, data.size(), [&](std::size_t i) {
    const auto idx = spec.unravel(i);
    int parity = 0;
    for (int d = 0; d < spec.n; ++d) parity += idx[d];
    data[i] *= (parity % 2 == 0) ? scale : -scale;
  });
}

}  // namespace

std::vector<cdouble> forward(const GridSpec& spec, std::vector<cdouble> samples, Execution exec) {
  spec.validate();
  if (samples.size() != spec.size()) throw InvalidArgument("grid: sample count does not match the spec");
  execute_fft(spec, samples, FFTW_FORWARD);
  checkerboard(spec, samples, std::pow(spec.h(), spec.n), exec);
  return samples;
}

std::vector<cdouble> inverse(const GridSpec& spec, std::vector<cdouble> samples, Execution exec) {
  spec.validate();
  if (samples.size() != spec.size()) throw InvalidArgument("grid: sample count does not match the spec");
  checkerboard(spec, samples, 1.0, exec);
  execute_fft(spec, samples, FFTW_BACKWARD);
  const double scale = std::pow(spec.L, -spec.n);
  kernels::for_each_index(exec, samples.size(), [&](std::size_t i) { samples[i] *= scale; });
  return samples;
}

}  // namespace grid

GridField GridField::from_space(const GridSpec& spec, std::vector<cdouble> samples, Execution exec) {
  auto freq = grid::forward(spec, samples, exec);
  return GridField(spec, std::move(samples), std::move(freq));
}

GridField GridField::from_frequency(const GridSpec& spec, std::vector<cdouble> samples, Execution exec) {
  auto space = grid::inverse(spec, samples, exec);
  return GridField(spec, std::move(space), std::move(samples));
}

GridField GridField::from_function(const GridSpec& spec, const SpaceFunction& f, Execution exec) {
  spec.validate();
  std::vector<cdouble> samples(spec.size());
  kernels::for_each_index(exec, samples.size(), [&](std::size_t i) { samples[i] = f(spec.point(i)); });
  return from_space(spec, std::move(samples), exec);
}

GridField GridField::from_transform(const GridSpec& spec, const SpaceFunction& fhat, Execution exec) {
  spec.validate();
  std::vector<cdouble> samples(spec.size());
  kernels::for_each_index(exec, samples.size(), [&](std::size_t i) { samples[i] = fhat(spec.frequency(i)); });
  auto field = from_frequency(spec, std::move(samples), exec);
  field.analytic_ = fhat;
  return field;
}

double GridField::l2_norm() const {
  double sum = 0.0;
  for (const auto& v : space_) sum += std::norm(v);
  return std::sqrt(sum * std::pow(spec_.h(), spec_.n));
}

double GridField::frequency_l2_norm() const {
  double sum = 0.0;
  for (const auto& v : frequency_) sum += std::norm(v);
  return std::sqrt(sum * std::pow(spec_.dxi(), spec_.n));
}

bool GridField::interpolable(const Vec& x) const {
  if (x.size() != spec_.n) return false;
  const double h = spec_.h();
  for (int d = 0; d < spec_.n; ++d) {
    const double u = (x(d) + 0.5 * spec_.L) / h;
    if (!(u >= 1.0 && u <= spec_.N - 3.0)) return false;
  }
  return true;
}

cdouble GridField::interpolate(const Vec& x) const {
  if (!interpolable(x)) {
    throw InvalidArgument("interpolate: point lies outside the grid domain (surface extends beyond the grid)");
  }
  const int n = spec_.n;
  const double h = spec_.h();
  std::array<int, 3> base{};
  std::array<std::array<double, 4>, 3> weights{};
  for (int d = 0; d < n; ++d) {
    const double u = (x(d) + 0.5 * spec_.L) / h;
    int i = static_cast<int>(std::floor(u));
    if (i > spec_.N - 3) i = spec_.N - 3;
    const double t = u - i;  // in [0, 1]; stencil nodes at -1, 0, 1, 2
    base[d] = i - 1;
    weights[d][0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    weights[d][1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    weights[d][2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    weights[d][3] = (t + 1.0) * t * (t - 1.0) / 6.0;
  }
  cdouble sum = 0.0;
  const int corners = 1 << (2 * n);
  for (int c = 0; c < corners; ++c) {
    std::size_t index = 0;
    double w = 1.0;
    for (int d = 0; d < n; ++d) {
      const int o = (c >> (2 * d)) & 3;
      index = index * static_cast<std::size_t>(spec_.N) + static_cast<std::size_t>(base[d] + o);
      w *= weights[d][o];
    }
    sum += w * space_[index];
  }
  return sum;
}

cdouble GridField::evaluate(const Vec& x) const {
  if (x.size() != spec_.n) throw InvalidArgument("evaluate: dimension mismatch");
  const int n = spec_.n, N = spec_.N;
  std::array<std::vector<cdouble>, 3> phase;
  for (int d = 0; d < n; ++d) {
    phase[d].resize(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
      const int kk = k < N / 2 ? k : k - N;
      phase[d][static_cast<std::size_t>(k)] = std::polar(1.0, x(d) * kk * spec_.dxi());
    }
  }
  // contract the last axis first; sizes of missing axes are 1
  const int outer = n >= 3 ? N : 1, middle = n >= 2 ? N : 1;
  const std::vector<cdouble> one{cdouble(1.0)};
  const auto& p0 = n >= 3 ? phase[0] : one;
  const auto& p1 = n >= 2 ? phase[n - 2] : one;
  const auto& p2 = phase[n - 1];
  const auto mul_add = [](double& re, double& im, cdouble a, cdouble b) {
    re += a.real() * b.real() - a.imag() * b.imag();
    im += a.real() * b.imag() + a.imag() * b.real();
  };
  double re0 = 0.0, im0 = 0.0;
  const cdouble* row = frequency_.data();
  for (int i0 = 0; i0 < outer; ++i0) {
    double re1 = 0.0, im1 = 0.0;
    for (int i1 = 0; i1 < middle; ++i1, row += N) {
      double re2 = 0.0, im2 = 0.0;
      for (int i2 = 0; i2 < N; ++i2) mul_add(re2, im2, row[i2], p2[static_cast<std::size_t>(i2)]);
      mul_add(re1, im1, cdouble(re2, im2), p1[static_cast<std::size_t>(i1)]);
    }
    mul_add(re0, im0, cdouble(re1, im1), p0[static_cast<std::size_t>(i0)]);
  }
  const cdouble sum(re0, im0);
  return sum * std::pow(spec_.L, -n);
}

GridField GridField::apply_multiplier(const SpaceFunction& m, Execution exec) const {
  std::vector<cdouble> freq(frequency_.begin(), frequency_.end());
  kernels::for_each_index(exec, freq.size(), [&](std::size_t i) { freq[i] *= m(spec_.frequency(i)); });
  return from_frequency(spec_, std::move(freq), exec);
}

GridField GridField::multiply_space(const SpaceFunction& m, Execution exec) const {
  std::vector<cdouble> samples(space_.begin(), space_.end());
  kernels::for_each_index(exec, samples.size(), [&](std::size_t i) { samples[i] *= m(spec_.point(i)); });
  return from_space(spec_, std::move(samples), exec);
}

GridField GridField::plus(const GridField& other, cdouble scale) const {
  if (!(other.spec_ == spec_)) throw InvalidArgument("GridField::plus: grid mismatch");
  std::vector<cdouble> space(space_.size()), freq(frequency_.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    space[i] = space_[i] + scale * other.space_[i];
    freq[i] = frequency_[i] + scale * other.frequency_[i];
  }
  return GridField(spec_, std::move(space), std::move(freq));
}

double GridField::max_difference(const GridField& other) const {
  if (!(other.spec_ == spec_)) throw InvalidArgument("GridField::max_difference: grid mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < space_.size(); ++i) worst = std::max(worst, std::abs(space_[i] - other.space_[i]));
  return worst;
}

double GridField::max_abs() const {
  double worst = 0.0;
  for (const auto& v : space_) worst = std::max(worst, std::abs(v));
  return worst;
}

void GridField::dump(const std::string& prefix) const {
  {
    std::ofstream bin(prefix + ".bin", std::ios::binary);
    if (!bin) throw Error("cannot open " + prefix + ".bin for writing");
    bin.write(reinterpret_cast<const char*>(space_.data()),
              static_cast<std::streamsize>(space_.size() * sizeof(cdouble)));
  }
  nlohmann::json sidecar = {
      {"shape", std::vector<int>(static_cast<std::size_t>(spec_.n), spec_.N)},
      {"extent", spec_.L},
      {"origin", -0.5 * spec_.L},
      {"spacing", spec_.h()},
      {"dtype", "complex128 (interleaved re, im), row-major, last axis fastest"},
      {"domain", "space"},
      {"convention", "F f(xi) = int e^{-i x.xi} f(x) dx; inverse carries (2 pi)^{-n}"}};
  std::ofstream js(prefix + ".json");
  if (!js) throw Error("cannot open " + prefix + ".json for writing");
  js << sidecar.dump(2) << "\n";
}

}  // namespace sharptrace
