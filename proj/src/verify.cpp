#include "sharptrace/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "sharptrace/errors.hpp"
#include "sharptrace/quadrature.hpp"
#include "sharptrace/test_functions.hpp"

namespace sharptrace {

namespace {

nlohmann::json finite_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// groups node indices by radius (relative tolerance 1e-12)
std::vector<std::vector<std::size_t>> radius_groups(const std::vector<Vec>& nodes) {
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> radius(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) radius[i] = nodes[i].norm();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i : order) {
    if (!groups.empty() && radius[i] - radius[groups.back().front()] <= 1e-12 * radius[i]) {
      groups.back().push_back(i);
    } else {
      groups.push_back({i});
    }
  }
  return groups;
}

// per-node Hankel integrals, computed once per distinct radius
std::vector<RadialIntegrals> node_integrals(const RadialKernel& kernel, const RadialProfile& p,
                                            const std::vector<Vec>& nodes, bool riesz, Execution exec) {
  const auto groups = radius_groups(nodes);
  std::vector<RadialIntegrals> per_group(groups.size());
  kernels::for_each_index(exec, groups.size(), [&](std::size_t g) {
    per_group[g] = radial_integrals(kernel, p, nodes[groups[g].front()].norm(), riesz);
  });
  std::vector<RadialIntegrals> out(nodes.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t i : groups[g]) {
      out[i] = per_group[g];
      out[i].rho = nodes[i].norm();
    }
  }
  return out;
}

void check_dimension(int a, int b, const char* what) {
  if (a != b) throw InvalidArgument(std::string(what) + ": dimension of the field and the symbol differ");
}

double finish_ratio(TraceRatio& r, const Normalization& norm) {
  if (!std::isfinite(r.rhs)) {
    r.divergent = true;
    return 0.0;
  }
  if (!(r.rhs > 0.0)) throw InvalidArgument("trace_ratio: the Sobolev norm of f vanishes");
  r.ratio = r.lhs / r.rhs;
  r.normalized = r.ratio / norm.factor(r.rho);
  return r.ratio;
}

bool is_power(const WeightSpec& w) { return w.family == WeightSpec::Family::power; }

}  // namespace

// --- normalization ---------------------------------------------------------

Normalization Normalization::homogeneous(double s) {
  return {WeightSpec::power(s - 1.0), WeightSpec::power(s), "homogeneous", s};
}

Normalization Normalization::inhomogeneous(double s) {
  return {WeightSpec::power(-0.5), WeightSpec::bracket(s), "inhomogeneous", s};
}

Normalization Normalization::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("normalization: expected an object");
  const std::string flavor = j.value("flavor", std::string("homogeneous"));
  if (flavor == "homogeneous" || flavor == "inhomogeneous") {
    for (const auto& [key, value] : j.items()) {
      if (key != "flavor" && key != "s") throw InvalidArgument("normalization: unknown field '" + key + "'");
    }
    if (!j.contains("s") || !j.at("s").is_number()) throw InvalidArgument("normalization: s is required");
    const double s = j.at("s").get<double>();
    return flavor == "homogeneous" ? homogeneous(s) : inhomogeneous(s);
  }
  if (flavor == "custom") {
    for (const auto& [key, value] : j.items()) {
      if (key != "flavor" && key != "sigma" && key != "w") {
        throw InvalidArgument("normalization: unknown field '" + key + "'");
      }
    }
    return {WeightSpec::from_json(j.at("sigma")), WeightSpec::from_json(j.at("w")), "custom", std::nullopt};
  }
  throw InvalidArgument("normalization: flavor must be homogeneous, inhomogeneous or custom");
}

nlohmann::json Normalization::to_json() const {
  if (s) return {{"flavor", flavor}, {"s", *s}};
  return {{"flavor", flavor}, {"sigma", sigma.to_json()}, {"w", w.to_json()}};
}

// --- trace norms -----------------------------------------------------------

double trace_norm(const GridField& f, const SurfaceQuadrature& q, FieldEvaluation how, Execution exec) {
  check_dimension(f.spec().n, q.dimension, "trace_norm");
  const double sum = kernels::ordered_sum<double>(exec, q.size(), [&](std::size_t i) {
    const cdouble v = how == FieldEvaluation::interpolate ? f.interpolate(q.nodes[i]) : f.evaluate(q.nodes[i]);
    return q.weights[i] * std::norm(v);
  });
  return std::sqrt(sum);
}

double trace_norm(const RadialProfile& p, const SurfaceQuadrature& q, const RadialKernel& kernel, Execution exec) {
  check_dimension(p.n, q.dimension, "trace_norm");
  const auto integrals = node_integrals(kernel, p, q.nodes, false, exec);
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sum += q.weights[i] * std::norm(radial_value(integrals[i], p, q.nodes[i]));
  return std::sqrt(sum);
}

double trace_norm(const RadialProfile& p, const SurfaceQuadrature& q, Execution exec) {
  return trace_norm(p, q, RadialKernel::installed(), exec);
}

nlohmann::json TraceRatio::to_json() const {
  nlohmann::json j = {{"rho", rho}, {"lhs", lhs}, {"rhs", finite_or_null(rhs)}, {"divergent", divergent}};
  if (divergent) {
    j["ratio"] = nullptr;
    j["normalized"] = nullptr;
  } else {
    j["ratio"] = ratio;
    j["normalized"] = normalized;
  }
  return j;
}

TraceRatio trace_ratio(const GridField& f, const Symbol& sym, double rho, const Normalization& norm,
                       const TraceOptions& options, Execution exec) {
  if (!(rho > 0.0)) throw InvalidArgument("trace_ratio: rho must be positive");
  check_dimension(f.spec().n, sym.dimension(), "trace_ratio");
  TraceRatio r;
  r.rho = rho;
  r.lhs = trace_norm(f, build_quadrature(sym, rho, options.resolution), options.evaluation, exec);
  r.rhs = sobolev_norm(f, norm.w, options.norm_path);
  finish_ratio(r, norm);
  return r;
}

TraceRatio trace_ratio(const RadialProfile& p, const Symbol& sym, double rho, const Normalization& norm,
                       const TraceOptions& options, Execution exec) {
  if (!(rho > 0.0)) throw InvalidArgument("trace_ratio: rho must be positive");
  check_dimension(p.n, sym.dimension(), "trace_ratio");
  TraceRatio r;
  r.rho = rho;
  r.lhs = trace_norm(p, build_quadrature(sym, rho, options.resolution), exec);
  r.rhs = sobolev_norm(p, norm.w);
  finish_ratio(r, norm);
  return r;
}

// --- exponent fit ----------------------------------------------------------

nlohmann::json ExponentFit::to_json() const {
  return {{"slope", slope},
          {"intercept", intercept},
          {"standard_error", standard_error},
          {"band", 2.0 * standard_error},
          {"points_used", points_used},
          {"dropped_endpoints", dropped_endpoints}};
}

ExponentFit fit_exponent(const std::vector<double>& rho, const std::vector<double>& y) {
  if (rho.size() != y.size()) throw InvalidArgument("fit_exponent: size mismatch");
  if (rho.size() < 4) throw InvalidArgument("fit_exponent: at least 4 rho points are required");
  std::vector<std::size_t> order(rho.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rho[a] < rho[b]; });
  ExponentFit fit;
  std::size_t first = 0, last = order.size();
  if (order.size() >= 6) {
    first = 1;
    last = order.size() - 1;
    fit.dropped_endpoints = true;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = first; i < last; ++i) {
    const double r = rho[order[i]], v = y[order[i]];
    if (!(r > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("fit_exponent: rho and values must be positive and finite");
    }
    lx.push_back(std::log(r));
    ly.push_back(std::log(v));
  }
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_exponent: rho values must be distinct");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points_used = static_cast<int>(lx.size());
  if (lx.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - fit.intercept - fit.slope * lx[i];
      sse += e * e;
    }
    fit.standard_error = std::sqrt(sse / (m - 2.0) / sxx);
  }
  return fit;
}

// --- rho scan --------------------------------------------------------------

nlohmann::json TraceReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto j = rows[i].to_json();
    if (i < predicted.size()) j["predicted"] = predicted[i];
    rows_json.push_back(j);
  }
  nlohmann::json j = {{"symbol", symbol},
                      {"test_function", test_function},
                      {"normalization", norm.to_json()},
                      {"rows", rows_json},
                      {"expected_slope", expected_slope},
                      {"spread", spread}};
  if (!predicted.empty()) j["predicted_spread"] = predicted_spread;
  if (fit) j["fit"] = fit->to_json();
  if (constant) j["constant"] = *constant;
  return j;
}

TraceReport rho_scan(const HomogeneousSymbol& sym, const Normalization& norm, const std::vector<double>& rhos,
                     const RhoScanOptions& options, Execution exec) {
  if (rhos.size() < 4) throw InvalidArgument("rho_scan: at least 4 rho points are required");
  for (std::size_t i = 0; i < rhos.size(); ++i) {
    if (!(rhos[i] > 0.0)) throw InvalidArgument("rho_scan: rho values must be positive");
    if (i > 0 && !(rhos[i] > rhos[i - 1])) throw InvalidArgument("rho_scan: rho values must increase");
  }
  const int n = sym.dimension();
  const bool cs = options.family == "cs-optimal";
  if (cs && !options.params.empty()) throw InvalidArgument("rho_scan: cs-optimal takes no params (use k and truncation)");
  std::optional<RadialProfile> fixed;
  if (!cs) {
    auto tf = make_test_function(options.family, options.params, n, std::nullopt, false);
    if (!tf.radial) throw InvalidArgument("rho_scan: family '" + options.family + "' has no radial representation");
    fixed = *tf.radial;
  }

  const double min_truncation =
      options.min_truncation.value_or(is_power(norm.w) && is_power(norm.sigma) ? 0.0 : 4000.0);
  TraceReport report;
  report.symbol = sym.to_json();
  report.norm = norm;
  report.rows.resize(rhos.size());
  if (cs) {
    report.test_function = {{"family", "cs-optimal"},
                            {"k", options.k},
                            {"t", "rho"},
                            {"truncation_argument", options.truncation_argument},
                            {"min_truncation", min_truncation}};
  } else {
    report.test_function = {{"family", options.family}, {"params", options.params}};
  }
  TraceOptions topts;
  topts.resolution = options.resolution;
  kernels::for_each_index(exec, rhos.size(), [&](std::size_t i) {
    const double rho = rhos[i];
    if (cs) {
      const double R = std::max(min_truncation, options.truncation_argument / rho);
      const auto p = cs_optimal_profile(n, options.k, rho, R, norm.w);
      report.rows[i] = trace_ratio(p, sym, rho, norm, topts, Execution::serial);
    } else {
      report.rows[i] = trace_ratio(*fixed, sym, rho, norm, topts, Execution::serial);
    }
  });
  std::vector<double> ratios;
  for (const auto& r : report.rows) {
    if (r.divergent) throw InvalidArgument("rho_scan: the Sobolev norm diverges for this weight");
    ratios.push_back(r.ratio);
  }
  report.fit = fit_exponent(rhos, ratios);
  report.spread = *std::max_element(ratios.begin(), ratios.end()) / *std::min_element(ratios.begin(), ratios.end());
  report.expected_slope = is_power(norm.sigma) && is_power(norm.w) ? norm.sigma.exponent + 0.5 : 0.0;
  if (cs && sym.is_sphere()) {
    const double nu = 0.5 * n + options.k - 1.0;
    report.predicted.resize(rhos.size());
    kernels::for_each_index(exec, rhos.size(), [&](std::size_t i) {
      report.predicted[i] = std::sqrt(rhos[i] * weighted_bessel_integral(nu, rhos[i], norm.w).value);
    });
    report.predicted_spread = *std::max_element(report.predicted.begin(), report.predicted.end()) /
                              *std::min_element(report.predicted.begin(), report.predicted.end());
    const auto c = c1_trace_constant(n, norm.sigma, norm.w, {}, exec);
    if (c.finite()) report.constant = c.value;
  }
  return report;
}

// --- sharpness -------------------------------------------------------------

bool SharpnessRun::monotone() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].attainment < rows[i - 1].attainment - tolerance) return false;
  }
  return true;
}

bool SharpnessRun::bounded() const {
  return std::all_of(rows.begin(), rows.end(), [&](const SharpnessRow& r) { return r.attainment <= 1.0 + tolerance; });
}

nlohmann::json SharpnessRun::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j = {{"R", r.R}, {"trace", r.ratio.to_json()}, {"attainment", r.attainment}};
    if (r.gaussian_attainment) j["gaussian_attainment"] = *r.gaussian_attainment;
    rows_json.push_back(j);
  }
  return {{"n", n},
          {"normalization", norm.to_json()},
          {"constant", constant.to_json()},
          {"t_star", t_star},
          {"k_star", k_star},
          {"rows", rows_json},
          {"tolerance", tolerance},
          {"monotone", monotone()},
          {"bounded", bounded()}};
}

SharpnessRun sharpness_run(const HomogeneousSymbol& sym, const Normalization& norm, const SharpnessOptions& options,
                           Execution exec) {
  if (!sym.is_sphere()) {
    throw InvalidArgument("sharpness: the sharp constant is known for the sphere symbol only");
  }
  if (options.ladder.empty()) throw InvalidArgument("sharpness: empty truncation ladder");
  const int n = sym.dimension();
  SharpnessRun run;
  run.n = n;
  run.norm = norm;
  run.tolerance = options.tolerance;
  run.constant = c1_trace_constant(n, norm.sigma, norm.w, options.search, exec);
  if (!run.constant.finite()) throw InvalidArgument("sharpness: the constant diverges for these weights");
  run.t_star = run.constant.t_star.value_or(1.0);
  run.k_star = run.constant.k_star.value_or(0);
  const double rho = run.t_star;
  TraceOptions topts;
  topts.resolution = options.resolution;
  std::optional<double> gaussian;
  if (options.compare_gaussian) {
    const auto g = make_test_function("gaussian", {}, n, std::nullopt, false);
    const auto r = trace_ratio(*g.radial, sym, rho, norm, topts, exec);
    if (!r.divergent) gaussian = r.normalized / run.constant.value;
  }
  run.rows.resize(options.ladder.size());
  kernels::for_each_index(exec, options.ladder.size(), [&](std::size_t i) {
    const double R = options.ladder[i];
    const auto p = cs_optimal_profile(n, run.k_star, run.t_star, R, norm.w);
    SharpnessRow row;
    row.R = R;
    row.ratio = trace_ratio(p, sym, rho, norm, topts, Execution::serial);
    row.attainment = row.ratio.normalized / run.constant.value;
    row.gaussian_attainment = gaussian;
    run.rows[i] = row;
  });
  return run;
}

// --- critical case ---------------------------------------------------------

double CriticalReport::plain_growth() const {
  if (rows.size() < 2 || !(rows.front().plain_ratio > 0.0)) return 0.0;
  return rows.back().plain_ratio / rows.front().plain_ratio;
}

double CriticalReport::wedge_spread() const {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.wedge_ratio);
    hi = std::max(hi, r.wedge_ratio);
  }
  if (!(hi > 0.0)) return 0.0;
  return hi / lo;
}

bool CriticalReport::plain_increasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].plain_ratio > rows[i - 1].plain_ratio)) return false;
  }
  return true;
}

nlohmann::json CriticalReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"R", r.R},
                         {"norm", r.norm},
                         {"plain_trace", r.plain_trace},
                         {"wedge_trace", r.wedge_trace},
                         {"plain_ratio", r.plain_ratio},
                         {"wedge_ratio", r.wedge_ratio}});
  }
  return {{"symbol", symbol},
          {"k", k},
          {"rho", rho},
          {"s", 0.5},
          {"wedge", "grad a(x)/|grad a(x)| ^ D/|D|"},
          {"certificate", certificate.to_json()},
          {"rows", rows_json},
          {"plain_growth", plain_growth()},
          {"wedge_spread", wedge_spread()},
          {"plain_increasing", plain_increasing()}};
}

CriticalReport critical_comparison(const HomogeneousSymbol& sym, const CriticalOptions& options, Execution exec) {
  if (options.k < 0) throw InvalidArgument("critical: k must be >= 0");
  if (!(options.rho > 0.0)) throw InvalidArgument("critical: rho must be positive");
  if (options.ladder.empty()) throw InvalidArgument("critical: empty truncation ladder");
  CriticalReport report;
  report.symbol = sym.to_json();
  report.k = options.k;
  report.rho = options.rho;
  report.certificate = min_hessian_det_on_level(sym, options.certificate_resolution, exec);
  if (!report.certificate.positive()) {
    std::ostringstream msg;
    msg << "critical: curvature certificate failed, min det hess a on Sigma_a = " << report.certificate.min_det
        << " at resolution " << report.certificate.resolution;
    throw HypothesisViolation(msg.str());
  }
  const int n = sym.dimension();
  const RadialKernel& kernel = RadialKernel::installed();
  const WeightSpec w = WeightSpec::power(0.5);
  const auto q = build_quadrature(sym, options.rho, options.resolution);
  std::vector<Vec> normal(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) normal[i] = sym.gradient(q.nodes[i]).normalized();

  for (double R : options.ladder) {
    const auto p = cs_optimal_profile(n, options.k, options.rho, R, w);
    const auto integrals = node_integrals(kernel, p, q.nodes, true, exec);
    CriticalRow row;
    row.R = R;
    row.norm = sobolev_norm(p, w);
    double plain = 0.0, wedge = 0.0;
    for (std::size_t a = 0; a < q.size(); ++a) {
      plain += q.weights[a] * std::norm(radial_value(integrals[a], p, q.nodes[a]));
      const auto riesz = radial_riesz_values(integrals[a], p, q.nodes[a]);
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          sum += std::norm(normal[a](i) * riesz[static_cast<std::size_t>(j)] -
                           normal[a](j) * riesz[static_cast<std::size_t>(i)]);
        }
      }
      wedge += q.weights[a] * sum;
    }
    row.plain_trace = std::sqrt(plain);
    row.wedge_trace = std::sqrt(wedge);
    row.plain_ratio = row.plain_trace / row.norm;
    row.wedge_ratio = row.wedge_trace / row.norm;
    report.rows.push_back(row);
  }
  return report;
}

// --- duality ---------------------------------------------------------------

namespace {

double bump(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

}  // namespace

cdouble TimeProfile::transform(double tau) const {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double v = bump((tau - mid) / half);
  if (symmetric) v += bump((-tau - mid) / half);
  return v;
}

nlohmann::json TimeProfile::to_json() const {
  return {{"kind", symmetric ? "symmetric-bump" : "bump"}, {"lo", lo}, {"hi", hi}};
}

TimeProfile TimeProfile::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("time profile: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "kind" && key != "lo" && key != "hi") throw InvalidArgument("time profile: unknown field '" + key + "'");
  }
  TimeProfile g;
  const std::string kind = j.value("kind", std::string("bump"));
  if (kind == "symmetric-bump") {
    g.symmetric = true;
  } else if (kind != "bump") {
    throw InvalidArgument("time profile: kind must be bump or symmetric-bump");
  }
  g.lo = j.value("lo", 1.0);
  g.hi = j.value("hi", 2.0);
  if (!(g.hi > g.lo) || !std::isfinite(g.hi)) throw InvalidArgument("time profile: need lo < hi");
  if (g.symmetric && g.lo < 0.0) throw InvalidArgument("time profile: symmetric bump needs lo >= 0");
  return g;
}

nlohmann::json DualityReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"rho", r.rho},
                         {"weight", r.weight},
                         {"level_set", r.level_set},
                         {"polar", r.polar},
                         {"relative_difference", r.relative_difference}});
  }
  return {{"direct", direct},
          {"coarea", coarea},
          {"gap", gap},
          {"time_norm", time_norm},
          {"half_line", half_line},
          {"time_ratio", time_ratio},
          {"one_sided", one_sided},
          {"hypothesis_holds", hypothesis_holds},
          {"max_row_difference", max_row_difference},
          {"rows", rows_json},
          {"warnings", warnings},
          {"passes", passes()}};
}

GridSpec duality_grid(int n) {
  if (n <= 2) return {n, 512, 512.0};
  return {n, 160, 160.0};
}

DualityReport duality_check(const HomogeneousSymbol& sym, const TimeProfile& g, const GridField& f,
                            const DualityOptions& options, Execution exec) {
  const int n = sym.dimension();
  check_dimension(f.spec().n, n, "duality_check");
  if (!f.analytic_transform()) throw InvalidArgument("duality_check: f needs a closed-form transform");
  if (!(g.hi > g.lo)) throw InvalidArgument("duality_check: time profile needs lo < hi");
  if (!(g.hi > 0.0)) throw InvalidArgument("duality_check: g^ has no support on (0, inf)");
  const auto& fhat = *f.analytic_transform();
  DualityReport report;
  report.one_sided = g.one_sided();
  if (g.lo <= 0.0) {
    report.warnings.push_back("support of g^ touches 0: the change of variables tau = rho^2 degenerates there");
  }

  // direct: the adjoint applied to g(t) f(x), normed on the grid
  const auto u = f.apply_multiplier(
      [&](const Vec& xi) -> cdouble {
        const double r = xi.norm();
        return g.transform(r == 0.0 ? 0.0 : sym.value(xi));
      },
      exec);
  report.direct = u.l2_norm() * u.l2_norm();

  // coarea side
  const auto q = build_quadrature(sym, 1.0, options.resolution);
  const auto sphere = sphere_rule(n, options.resolution);
  std::vector<double> radial(sphere.size());
  for (std::size_t i = 0; i < sphere.size(); ++i) radial[i] = 1.0 / std::sqrt(sym.value(sphere.nodes[i]));
  auto level_set = [&](double rho) {
    double sum = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      sum += q.weights[i] * std::norm(fhat(rho * q.unit_nodes[i])) * 2.0 * std::pow(rho, n - 1) / q.gradient_norms[i];
    }
    return sum;
  };
  auto polar = [&](double rho) {
    double sum = 0.0;
    for (std::size_t i = 0; i < sphere.size(); ++i) {
      const double r = radial[i];
      sum += sphere.weights[i] * std::norm(fhat(rho * r * sphere.nodes[i])) * std::pow(r, n);
    }
    return std::pow(rho, n - 1) * sum;
  };
  const double a = std::sqrt(std::max(g.lo, 0.0)), b = std::sqrt(g.hi);
  const double scale = std::pow(2.0 * kPi, -n);
  report.coarea = scale * quadrature::integrate(
                              [&](double rho) { return std::norm(g.transform(rho * rho)) * level_set(rho); }, a, b,
                              0.0, options.rel_tol, 2000)
                              .value;
  report.gap = std::abs(report.direct - report.coarea) / std::abs(report.direct);

  report.rows.resize(static_cast<std::size_t>(std::max(options.table_points, 1)));
  kernels::for_each_index(exec, report.rows.size(), [&](std::size_t i) {
    DualityRow row;
    row.rho = a + (b - a) * (static_cast<double>(i) + 0.5) / static_cast<double>(report.rows.size());
    row.weight = std::norm(g.transform(row.rho * row.rho));
    row.level_set = level_set(row.rho);
    row.polar = polar(row.rho);
    row.relative_difference =
        std::abs(row.level_set - row.polar) / std::max(std::abs(row.polar), std::numeric_limits<double>::min());
    report.rows[i] = row;
  });
  for (const auto& r : report.rows) report.max_row_difference = std::max(report.max_row_difference, r.relative_difference);

  // ||g||^2 from time samples; |g|^2 is band-limited to |tau| <= 2 max|supp|, so
  // the trapezoid sum with dt = pi / (2 hi) is exact up to the truncation in t
  const int panels = 64;
  std::vector<double> taus, wts;
  auto add_support = [&](double s0, double s1) {
    for (int p = 0; p < panels; ++p) {
      const auto rule = quadrature::gauss_legendre(32, s0 + (s1 - s0) * p / panels, s0 + (s1 - s0) * (p + 1) / panels);
      taus.insert(taus.end(), rule.nodes.begin(), rule.nodes.end());
      wts.insert(wts.end(), rule.weights.begin(), rule.weights.end());
    }
  };
  if (g.symmetric) add_support(-g.hi, -g.lo);
  add_support(g.lo, g.hi);
  std::vector<cdouble> ghat(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) ghat[i] = g.transform(taus[i]) * wts[i];
  const double dt = kPi / (2.0 * g.hi);
  // a panel of width (hi - lo)/64 resolves e^{i t tau} for t (hi - lo) / 64 <= 10
  const double t_max = 640.0 / (g.hi - g.lo);
  const auto steps = static_cast<std::size_t>(t_max / dt);
  std::vector<double> samples(steps + 1);
  kernels::for_each_index(exec, samples.size(), [&](std::size_t m) {
    const double t = dt * static_cast<double>(m);
    cdouble v = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) v += ghat[i] * std::polar(1.0, t * taus[i]);
    samples[m] = std::norm(v / (2.0 * kPi));
  });
  // |g(-t)| = |g(t)| for real bumps
  double total = samples[0];
  for (std::size_t m = 1; m < samples.size(); ++m) total += 2.0 * samples[m];
  report.time_norm = dt * total;
  report.half_line =
      quadrature::integrate([&](double rho) { return std::norm(g.transform(rho * rho)) * rho; }, a, b, 0.0, 1e-13, 2000)
          .value /
      kPi;
  report.time_ratio = report.half_line / report.time_norm;
  report.hypothesis_holds = std::abs(report.time_ratio - 1.0) < 1e-5;
  if (!report.one_sided) {
    std::ostringstream msg;
    msg << "hypothesis violated: g^ is not supported in [0, inf); ||g||^2 differs from the half-line integral by "
           "the factor "
        << report.time_ratio;
    report.warnings.push_back(msg.str());
  }
  return report;
}

// --- csv -------------------------------------------------------------------

std::string format_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << "rho_or_R,lhs,rhs,ratio,series\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,", r.rho_or_R, r.lhs, r.rhs, r.ratio);
    out << buf << r.series << "\n";
  }
  return out.str();
}

std::vector<CsvRow> csv_rows(const TraceReport& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) out.push_back({row.rho, row.lhs, row.rhs, row.ratio, "trace"});
  return out;
}

std::vector<CsvRow> csv_rows(const SharpnessRun& r) {
  std::vector<CsvRow> out;
  // rhs is the bound C sqrt(rho) sigma(rho) ||w f||, so ratio is the attainment
  const double c = r.constant.value * r.norm.factor(r.t_star);
  for (const auto& row : r.rows) {
    out.push_back({row.R, row.ratio.lhs, c * row.ratio.rhs, row.attainment, "cs-optimal"});
  }
  return out;
}

std::vector<CsvRow> csv_rows(const CriticalReport& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) out.push_back({row.R, row.plain_trace, row.norm, row.plain_ratio, "plain"});
  for (const auto& row : r.rows) out.push_back({row.R, row.wedge_trace, row.norm, row.wedge_ratio, "wedge"});
  return out;
}

std::vector<CsvRow> csv_rows(const DualityReport& r) {
  std::vector<CsvRow> out;
  for (const auto& row : r.rows) {
    out.push_back({row.rho, row.level_set, row.polar, row.polar > 0.0 ? row.level_set / row.polar : 0.0, "coarea-density"});
  }
  out.push_back({0.0, r.direct, r.coarea, r.coarea > 0.0 ? r.direct / r.coarea : 0.0, "adjoint-norm"});
  out.push_back({0.0, r.time_norm, r.half_line, r.time_ratio, "time-norm"});
  return out;
}

}  // namespace sharptrace
