#include "sharptrace/constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sharptrace/errors.hpp"
#include "sharptrace/surfaces.hpp"

namespace sharptrace {

const char* to_string(ConstantMethod method) {
  switch (method) {
    case ConstantMethod::gamma_closed_form: return "gamma-closed-form";
    case ConstantMethod::bessel_supremum: return "bessel-supremum";
    case ConstantMethod::smoothing_conversion: return "smoothing-conversion";
  }
  return "unknown";
}

const char* to_string(ConstantQuantity quantity) {
  return quantity == ConstantQuantity::trace ? "trace" : "smoothing";
}

nlohmann::json ConstantResult::to_json() const {
  nlohmann::json j;
  j["method"] = to_string(method);
  j["quantity"] = to_string(quantity);
  j["n"] = n;
  if (divergent) {
    j["value"] = "inf";
    j["divergent"] = true;
    j["growth_rate"] = growth_rate;
  } else {
    j["value"] = value;
    j["divergent"] = false;
  }
  if (s) j["s"] = *s;
  if (sigma) j["sigma"] = sigma->to_json();
  if (w) j["w"] = w->to_json();
  if (t_star) j["t_star"] = *t_star;
  if (k_star) j["k_star"] = *k_star;
  if (method == ConstantMethod::bessel_supremum) {
    j["t_independent"] = t_independent;
    j["k_max"] = k_max;
  }
  j["warnings"] = warnings;
  return j;
}

ConstantResult gamma_closed_form_constant(int n, double s) {
  if (n < 2) throw InvalidArgument("gamma_closed_form_constant: n must be >= 2");
  if (!(s > 0.5)) {
    std::ostringstream msg;
    msg << "gamma_closed_form_constant: s = " << s
        << " must exceed 1/2 (Gamma(2s-1) has a pole at s = 1/2)";
    throw InvalidArgument(msg.str());
  }
  if (!(s < 0.5 * n)) {
    std::ostringstream msg;
    msg << "gamma_closed_form_constant: s = " << s << " must stay below n/2 = " << 0.5 * n
        << " (Gamma(n/2-s) has a pole at s = n/2)";
    throw InvalidArgument(msg.str());
  }
  const double log_c2 = (1.0 - 2.0 * s) * std::log(2.0) + log_gamma(2.0 * s - 1.0) +
                        log_gamma(0.5 * n - s) - 2.0 * log_gamma(s) - log_gamma(0.5 * n - 1.0 + s);
  ConstantResult r;
  r.value = std::exp(0.5 * log_c2);
  r.method = ConstantMethod::gamma_closed_form;
  r.quantity = ConstantQuantity::trace;
  r.n = n;
  r.s = s;
  return r;
}

namespace {

struct BracketTable {
  std::vector<double> ts;
  // values[k][i]: bracket at ts[i], degree k
  std::vector<std::vector<double>> values;
};

// prefactor(t) * sigma(t)^{-2} * I(nu(k), t)
double bracket(int n, int k, double t, const WeightSpec& sigma, const WeightSpec& w, double prefactor,
               const BesselIntegralOptions& options) {
  const double nu = 0.5 * n + k - 1.0;
  const auto integral = weighted_bessel_integral(nu, t, w, options);
  const double sig = sigma(t);
  return prefactor * integral.value / (sig * sig);
}

void extend_table(BracketTable& table, int n, int k_from, int k_to, const WeightSpec& sigma,
                  const WeightSpec& w, double prefactor, const SupremumSearch& search, Execution exec) {
  const std::size_t points = table.ts.size();
  const int rows = k_to - k_from + 1;
  std::vector<double> flat(points * static_cast<std::size_t>(rows));
  kernels::for_each_index(exec, flat.size(), [&](std::size_t idx) {
    const int k = k_from + static_cast<int>(idx / points);
    const double t = table.ts[idx % points];
    flat[idx] = bracket(n, k, t, sigma, w, prefactor, search.integral);
  });
  for (int r = 0; r < rows; ++r) {
    table.values.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(r * points),
                              flat.begin() + static_cast<std::ptrdiff_t>((r + 1) * points));
  }
}

ConstantResult bracket_supremum(int n, const WeightSpec& sigma, const WeightSpec& w, double prefactor,
                                const SupremumSearch& search, Execution exec) {
  if (n < 2) throw InvalidArgument("constant: n must be >= 2");
  if (!(search.t_min > 0.0) || !(search.t_max > search.t_min) || search.grid_points < 3) {
    throw InvalidArgument("constant: invalid t search grid");
  }
  if (search.k_max < 0) throw InvalidArgument("constant: k_max must be >= 0");
  ConstantResult result;
  result.method = ConstantMethod::bessel_supremum;
  result.n = n;
  result.sigma = sigma;
  result.w = w;

  // divergence at infinity depends on w only; probe once at t = 1
  const auto probe = weighted_bessel_integral(0.5 * n - 1.0, 1.0, w, search.integral);
  if (probe.divergent) {
    const double sig = sigma(1.0);
    result.divergent = true;
    result.value = std::numeric_limits<double>::infinity();
    result.growth_rate = prefactor * probe.growth_rate / (sig * sig);
    std::ostringstream msg;
    msg << "bracket integral diverges at infinity for w = " << w.describe() << "; truncated at R = "
        << probe.truncation << " it grows like " << result.growth_rate << " log R";
    result.warnings.push_back(msg.str());
    return result;
  }

  BracketTable table;
  const double log_lo = std::log(search.t_min), log_hi = std::log(search.t_max);
  for (int i = 0; i < search.grid_points; ++i) {
    table.ts.push_back(std::exp(log_lo + (log_hi - log_lo) * i / (search.grid_points - 1)));
  }
  int k_max = search.k_max;
  extend_table(table, n, 0, k_max, sigma, w, prefactor, search, exec);

  auto locate = [&](int& k_best, std::size_t& i_best) {
    double best = -1.0;
    for (int k = 0; k <= k_max; ++k) {
      for (std::size_t i = 0; i < table.ts.size(); ++i) {
        if (table.values[k][i] > best) {
          best = table.values[k][i];
          k_best = k;
          i_best = i;
        }
      }
    }
    return best;
  };
  int k_best = 0;
  std::size_t i_best = 0;
  double sup = locate(k_best, i_best);
  // tail check in k: widen while the top degree still competes with the supremum
  while (true) {
    const auto& top = table.values[k_max];
    const double top_max = *std::max_element(top.begin(), top.end());
    if (top_max < sup * (1.0 - search.rel_tol) || k_max >= search.k_limit) break;
    const int next = std::min(2 * k_max + 1, search.k_limit);
    std::ostringstream msg;
    msg << "degree k_max = " << k_max << " still attains the running supremum; raised k_max to "
        << next;
    result.warnings.push_back(msg.str());
    extend_table(table, n, k_max + 1, next, sigma, w, prefactor, search, exec);
    k_max = next;
    sup = locate(k_best, i_best);
  }
  result.k_max = k_max;
  result.k_star = k_best;

  const auto& row = table.values[k_best];
  const double row_min = *std::min_element(row.begin(), row.end());
  if ((sup - row_min) <= search.flat_tolerance * sup) {
    // bracket independent of t: any t attains it; report t = 1
    result.t_independent = true;
    result.t_star = 1.0;
    result.value = std::sqrt(bracket(n, k_best, 1.0, sigma, w, prefactor, search.integral));
    return result;
  }

  // unimodality: count strict interior local maxima of the grid row
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < row.size(); ++i) {
    if (row[i] > row[i - 1] && row[i] > row[i + 1] && row[i] > sup * (1.0 - 1e-3)) ++maxima;
  }
  if (maxima > 1) result.warnings.push_back("bracket has several grid maxima in t; reporting the largest");

  if (i_best == 0 || i_best + 1 == row.size()) {
    std::ostringstream msg;
    msg << "supremum approached at the edge of the t grid (t = " << table.ts[i_best]
        << "); the value is the grid maximum and a lower bound for the supremum";
    result.warnings.push_back(msg.str());
    result.t_star = table.ts[i_best];
    result.value = std::sqrt(sup);
    return result;
  }

  // golden-section refinement in log t between the neighbours of the grid maximum
  double a = std::log(table.ts[i_best - 1]), b = std::log(table.ts[i_best + 1]);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double x) { return bracket(n, k_best, std::exp(x), sigma, w, prefactor, search.integral); };
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  double best_x = std::log(table.ts[i_best]), best_f = sup;
  for (int iter = 0; iter < 80; ++iter) {
    if (fc > best_f) best_f = fc, best_x = c;
    if (fd > best_f) best_f = fd, best_x = d;
    if (std::abs(fc - fd) <= 0.1 * search.rel_tol * best_f && (b - a) < 1e-4) break;
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = f(d);
    }
  }
  result.t_star = std::exp(best_x);
  result.value = std::sqrt(best_f);
  return result;
}

}  // namespace

ConstantResult c1_trace_constant(int n, const WeightSpec& sigma, const WeightSpec& w,
                                 const SupremumSearch& search, Execution exec) {
  auto r = bracket_supremum(n, sigma, w, 1.0, search, exec);
  r.quantity = ConstantQuantity::trace;
  return r;
}

ConstantResult walther_smoothing_constant(int n, const WeightSpec& sigma, const WeightSpec& w,
                                          const SupremumSearch& search, Execution exec) {
  // 2 pi * rho / g'(rho) = 2 pi * rho / (2 rho) = pi
  auto r = bracket_supremum(n, sigma, w, kPi, search, exec);
  r.quantity = ConstantQuantity::smoothing;
  return r;
}

namespace {

// true when |grad a| = 2 on Sigma_a up to round-off (the sphere normalization)
bool gradient_is_two(const Symbol& sym) {
  const auto q = build_quadrature(sym, 1.0, 16);
  for (double g : q.gradient_norms) {
    if (std::abs(g - 2.0) > 1e-12) return false;
  }
  return true;
}

}  // namespace

ConstantResult convert_smoothing_to_trace(const ConstantResult& c0, const Symbol& sym) {
  if (c0.quantity != ConstantQuantity::smoothing) {
    throw InvalidArgument("convert_smoothing_to_trace: input is not a smoothing constant");
  }
  if (!c0.finite()) throw InvalidArgument("convert_smoothing_to_trace: smoothing constant is not finite");
  ConstantResult r = c0;
  r.value = c0.value / std::sqrt(kPi);
  r.method = ConstantMethod::smoothing_conversion;
  r.quantity = ConstantQuantity::trace;
  if (!gradient_is_two(sym)) {
    r.warnings.push_back("|grad a| is not constant 2 on Sigma_a: the constant refers to the measure "
                         "2 rho^{n-1} d omega / |grad a|, not rho^{n-1} d omega");
  }
  return r;
}

ConstantResult convert_trace_to_smoothing(const ConstantResult& c1, const Symbol& sym) {
  if (c1.quantity != ConstantQuantity::trace) {
    throw InvalidArgument("convert_trace_to_smoothing: input is not a trace constant");
  }
  if (!c1.finite()) throw InvalidArgument("convert_trace_to_smoothing: trace constant is not finite");
  ConstantResult r = c1;
  r.value = c1.value * std::sqrt(kPi);
  r.method = ConstantMethod::smoothing_conversion;
  r.quantity = ConstantQuantity::smoothing;
  if (!gradient_is_two(sym)) {
    r.warnings.push_back("|grad a| is not constant 2 on Sigma_a: the trace constant was taken in the "
                         "2 rho^{n-1} d omega / |grad a| normalization");
  }
  return r;
}

}  // namespace sharptrace
