#include "sharptrace/special_functions.hpp"

#include <array>
#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "sharptrace/errors.hpp"
#include "sharptrace/quadrature.hpp"
#include "sharptrace/types.hpp"

namespace sharptrace {

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw InvalidArgument("log_gamma: argument must be positive, got " + std::to_string(x));
  }
  static constexpr std::array<double, 14> kCoefficients = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
      .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  double y = x;
  double tmp = x + 5.24218750000000000;  // g = 671/128
  tmp = (x + 0.5) * std::log(tmp) - tmp;
  double series = 0.999999999999997092;
  for (double c : kCoefficients) series += c / ++y;
  return tmp + std::log(2.5066282746310005 * series / x);
}

const char* to_string(BesselMethod method) {
  switch (method) {
    case BesselMethod::automatic: return "automatic";
    case BesselMethod::integral_representation: return "integral-representation";
    case BesselMethod::power_series: return "power-series";
    case BesselMethod::asymptotic: return "asymptotic";
  }
  return "unknown";
}

namespace {

constexpr int kRuleNodes = 48;

// Sum of the Poisson integral int_{-1}^{1} cos(t x) (1-x^2)^{l-1/2} dx with a Gauss-Jacobi rule.
double poisson_sum(const quadrature::Rule& rule, double t) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * std::cos(t * rule.nodes[i]);
  return sum;
}

// Hankel expansion J_nu(t) = sqrt(2/(pi t)) (P cos w - Q sin w), w = t - (nu/2 + 1/4) pi.
double hankel_expansion(double nu, double t) {
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 80; ++k) {
    term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * t);
    const double size = std::abs(term);
    if (size > last) break;  // asymptotic series started to diverge
    last = size;
    // term carries a_k / t^k; signs alternate in pairs
    const int r = k % 4;
    if (k % 2 == 0) {
      p += (r == 0 ? 1.0 : -1.0) * term;
    } else {
      q += (r == 1 ? 1.0 : -1.0) * term;
    }
    if (size < 1e-17 || term == 0.0) break;
  }
  const double w = t - (0.5 * nu + 0.25) * kPi;
  return std::sqrt(2.0 / (kPi * t)) * (p * std::cos(w) - q * std::sin(w));
}

}  // namespace

BesselEvaluator::BesselEvaluator(double order, BesselMethod method)
    : order_(order), method_(method) {
  if (!(order > -0.5)) {
    throw InvalidArgument("bessel_j: order must exceed -1/2, got " + std::to_string(order));
  }
  log_prefactor_ = -(order * std::log(2.0) + log_gamma(order + 0.5) + 0.5 * std::log(kPi));
  rule_ = std::make_shared<quadrature::Rule>(
      quadrature::gauss_jacobi(kRuleNodes, order - 0.5, order - 0.5));
}

double BesselEvaluator::integral_representation(double t) const {
  if (t < 0.0) throw InvalidArgument("bessel_j: argument must be non-negative");
  if (t == 0.0) return order_ == 0.0 ? 1.0 : 0.0;
  double sum;
  if (t <= kSwitch) {
    sum = poisson_sum(*rule_, t);
  } else {
    const int nodes = static_cast<int>(std::ceil(t)) + 40;
    sum = poisson_sum(quadrature::gauss_jacobi(nodes, order_ - 0.5, order_ - 0.5), t);
  }
  return std::exp(order_ * std::log(t) + log_prefactor_) * sum;
}

double BesselEvaluator::power_series(double t) const {
  if (t < 0.0) throw InvalidArgument("bessel_j: argument must be non-negative");
  if (t == 0.0) return order_ == 0.0 ? 1.0 : 0.0;
  const long double half = 0.5L * static_cast<long double>(t);
  const long double quarter_sq = half * half;
  long double term =
      std::exp(static_cast<long double>(order_) * std::log(half) -
               static_cast<long double>(log_gamma(order_ + 1.0)));
  long double sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= -quarter_sq / (static_cast<long double>(m) * (order_ + m));
    sum += term;
    if (m > half && std::abs(term) < 1e-22L * std::abs(sum)) break;
  }
  return static_cast<double>(sum);
}

double BesselEvaluator::asymptotic(double t) const {
  if (t < kAsymptoticMin) {
    throw InvalidArgument("bessel_j: asymptotic method requires t >= " +
                          std::to_string(kAsymptoticMin));
  }
  const double steps = std::floor(order_ + 0.5);
  const double base = order_ - steps;  // in [-1/2, 1/2)
  double lower = hankel_expansion(base, t);
  if (steps == 0.0) return lower;
  double upper = hankel_expansion(base + 1.0, t);
  for (int k = 1; k < static_cast<int>(steps); ++k) {
    const double nu = base + k;
    const double next = 2.0 * nu / t * upper - lower;
    lower = upper;
    upper = next;
  }
  return upper;
}

double BesselEvaluator::operator()(double t) const {
  switch (method_) {
    case BesselMethod::integral_representation: return integral_representation(t);
    case BesselMethod::power_series: return power_series(t);
    case BesselMethod::asymptotic: return asymptotic(t);
    case BesselMethod::automatic: break;
  }
  if (t <= kSwitch) return integral_representation(t);
  // upward recurrence is stable while the order stays below the argument
  if (order_ < t - 1.0) return asymptotic(t);
  return integral_representation(t);
}

double bessel_j(double order, double t) {
  thread_local std::vector<std::pair<double, BesselEvaluator>> cache;
  thread_local std::size_t next_slot = 0;
  for (const auto& [key, evaluator] : cache) {
    if (key == order) return evaluator(t);
  }
  BesselEvaluator evaluator(order);
  const double value = evaluator(t);
  if (cache.size() < 16) {
    cache.emplace_back(order, std::move(evaluator));
  } else {
    cache[next_slot] = {order, std::move(evaluator)};
    next_slot = (next_slot + 1) % cache.size();
  }
  return value;
}

double WeightSpec::operator()(double r) const {
  if (family == Family::power) return std::pow(r, exponent);
  return std::pow(1.0 + r * r, 0.5 * exponent);
}

double WeightSpec::log_derivative(double r) const {
  if (family == Family::power) return exponent / r;
  return exponent * r / (1.0 + r * r);
}

std::string WeightSpec::describe() const {
  std::ostringstream out;
  if (family == Family::power) {
    out << "r^" << exponent;
  } else {
    out << "(1+r^2)^(" << exponent << "/2)";
  }
  return out.str();
}

nlohmann::json WeightSpec::to_json() const {
  return {{"family", family == Family::power ? "power" : "bracket"}, {"exponent", exponent}};
}

WeightSpec WeightSpec::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("weight spec must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "family" && key != "exponent") {
      throw InvalidArgument("weight spec: unknown field '" + key + "'");
    }
  }
  if (!j.contains("family") || !j.contains("exponent")) {
    throw InvalidArgument("weight spec needs 'family' and 'exponent'");
  }
  const auto family = j.at("family").get<std::string>();
  const double exponent = j.at("exponent").get<double>();
  if (family == "power") return power(exponent);
  if (family == "bracket") return bracket(exponent);
  throw InvalidArgument("weight spec: unknown family '" + family + "'");
}

namespace {

// 1 / w(u/t)^2 and its u-derivative.
struct ArgumentWeight {
  const WeightSpec& w;
  double t;
  double operator()(double u) const {
    const double r = u / t;
    if (w.family == WeightSpec::Family::power) return std::exp(-2.0 * w.exponent * std::log(r));
    return std::exp(-w.exponent * std::log1p(r * r));
  }
  double derivative(double u) const { return -2.0 * (*this)(u) * w.log_derivative(u / t) / t; }
};

// int_U^inf v(u) S(u) du with S(u) = 1 + (mu-1)/(8u^2) + 3(mu-1)(mu-9)/(128u^4),
// the averaged square modulus of sqrt(pi u / 2) J_nu(u).
double smooth_tail(const ArgumentWeight& v, double mu, double upper) {
  const double c2 = (mu - 1.0) / 8.0;
  const double c4 = 3.0 * (mu - 1.0) * (mu - 9.0) / 128.0;
  if (v.w.family == WeightSpec::Family::power) {
    const double g = v.w.exponent;
    const double scale = std::exp(2.0 * g * std::log(v.t));
    return scale * (std::pow(upper, 1.0 - 2.0 * g) / (2.0 * g - 1.0) +
                    c2 * std::pow(upper, -1.0 - 2.0 * g) / (2.0 * g + 1.0) +
                    c4 * std::pow(upper, -3.0 - 2.0 * g) / (2.0 * g + 3.0));
  }
  // substitute u = U / x, du = U / x^2 dx
  auto integrand = [&](double x) {
    const double u = upper / x;
    const double inv = 1.0 / (u * u);
    return v(u) * (1.0 + inv * (c2 + c4 * inv)) * upper / (x * x);
  };
  return quadrature::integrate_from_origin(integrand, 1.0, 1e-18, 1e-14).value;
}

}  // namespace

BesselIntegral weighted_bessel_integral(double nu, double t, const WeightSpec& w,
                                        const BesselIntegralOptions& options) {
  if (!(t > 0.0)) throw InvalidArgument("weighted_bessel_integral: t must be positive");
  const double origin_exponent = nu + 1.0 - w.exponent_at_zero();
  if (!(origin_exponent > 0.0)) {
    std::ostringstream msg;
    msg << "weighted_bessel_integral: integrand ~ r^" << 2.0 * nu + 1.0 - 2.0 * w.exponent_at_zero()
        << " at r = 0 is not integrable (need nu + 1 - gamma_0 > 0, got " << origin_exponent
        << " for nu = " << nu << ", w = " << w.describe() << ")";
    throw InvalidArgument(msg.str());
  }
  const BesselEvaluator bessel(nu);
  const ArgumentWeight v{w, t};
  auto integrand = [&](double u) {
    const double j = bessel(u);
    return j * j * u * v(u);
  };
  const double inv_t2 = 1.0 / (t * t);
  auto integrate_to = [&](double a, double b) {
    return quadrature::integrate_panels(integrand, a, b, kPi, options.rel_tol, 1e-300);
  };

  BesselIntegral result;
  const bool converges_at_infinity = w.exponent_at_infinity() > 0.5;
  const double head_end = kPi;
  auto head = quadrature::integrate_from_origin(integrand, head_end, 1e-300, options.rel_tol);

  if (!converges_at_infinity) {
    // truncated values at r_cap / 2^j, j = 4..0, for the growth fit
    constexpr int kLevels = 5;
    std::array<double, kLevels> radii{}, values{};
    double running = head.value;
    double position = head_end;
    double error = head.error;
    for (int j = kLevels - 1; j >= 0; --j) {
      const double radius = std::ldexp(options.r_cap, -j);
      const double arg = std::max(radius * t, head_end);
      auto piece = integrate_to(position, arg);
      running += piece.value;
      error += piece.error;
      position = arg;
      radii[kLevels - 1 - j] = std::log(radius);
      values[kLevels - 1 - j] = running * inv_t2;
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (int i = 0; i < kLevels; ++i) {
      mean_x += radii[i] / kLevels;
      mean_y += values[i] / kLevels;
    }
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < kLevels; ++i) {
      sxy += (radii[i] - mean_x) * (values[i] - mean_y);
      sxx += (radii[i] - mean_x) * (radii[i] - mean_x);
    }
    result.value = values[kLevels - 1];
    result.tail = std::numeric_limits<double>::infinity();
    result.divergent = true;
    result.growth_rate = sxy / sxx;
    result.truncation = options.r_cap;
    result.quadrature_error = error * inv_t2;
    return result;
  }

  const double upper =
      std::max({options.crossover_argument, options.min_crossover_radius * t, head_end});
  auto body = integrate_to(head_end, upper);
  const double mu = 4.0 * nu * nu;
  const double phase = 2.0 * upper - nu * kPi;
  const double vu = v(upper);
  const double q = vu * (mu - 1.0) / (4.0 * upper);
  const double oscillatory = vu * std::cos(phase) / 2.0 - v.derivative(upper) * std::sin(phase) / 4.0 -
                             q * std::sin(phase) / 2.0;
  const double tail = (smooth_tail(v, mu, upper) + oscillatory) / kPi;

  result.tail = tail * inv_t2;
  result.value = (head.value + body.value + tail) * inv_t2;
  result.truncation = upper / t;
  result.quadrature_error = (head.error + body.error) * inv_t2;
  return result;
}

}  // namespace sharptrace
