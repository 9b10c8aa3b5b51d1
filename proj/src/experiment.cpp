#include "sharptrace/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "sharptrace/constants.hpp"
#include "sharptrace/errors.hpp"
#include "sharptrace/surfaces.hpp"
#include "sharptrace/symbols.hpp"
#include "sharptrace/test_functions.hpp"

#ifndef SHARPTRACE_VERSION
#define SHARPTRACE_VERSION "0.0.0"
#endif

namespace sharptrace::experiment {

using nlohmann::json;

namespace {

// Reads an object field by field, records the resolved value of each, and
// rejects whatever was not read.
class Fields {
 public:
  Fields(const json& j, std::string context) : source_(j.is_null() ? json::object() : j), context_(std::move(context)) {
    if (!source_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw InvalidArgument(context_ + ": " + what); }

  bool has(const std::string& key) const { return source_.contains(key); }

  double number(const std::string& key, double fallback) {
    const double v = has(key) ? as_number(key) : fallback;
    resolved[key] = v;
    return v;
  }
  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(key + " must be positive");
    return v;
  }
  int integer(const std::string& key, int fallback, int min_value) {
    int v = fallback;
    if (has(key)) {
      const auto& x = source_.at(key);
      if (!x.is_number_integer()) fail(key + " must be an integer");
      v = x.get<int>();
    }
    if (v < min_value) fail(key + " must be at least " + std::to_string(min_value));
    resolved[key] = v;
    return v;
  }
  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (has(key)) {
      if (!source_.at(key).is_boolean()) fail(key + " must be true or false");
      v = source_.at(key).get<bool>();
    }
    resolved[key] = v;
    return v;
  }
  std::string choice(const std::string& key, const std::string& fallback, const std::vector<std::string>& allowed) {
    std::string v = fallback;
    if (has(key)) {
      if (!source_.at(key).is_string()) fail(key + " must be a string");
      v = source_.at(key).get<std::string>();
    }
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key + " must be one of " + list);
    }
    resolved[key] = v;
    return v;
  }
  /// Increasing positive numbers; a bare number counts as a one-element list.
  std::vector<double> ladder(const std::string& key, const std::vector<double>& fallback, std::size_t min_size) {
    std::vector<double> v = fallback;
    if (has(key)) {
      const auto& x = source_.at(key);
      v.clear();
      if (x.is_number()) {
        v.push_back(x.get<double>());
      } else if (x.is_array()) {
        for (const auto& e : x) {
          if (!e.is_number()) fail(key + " must hold numbers");
          v.push_back(e.get<double>());
        }
      } else {
        fail(key + " must be a number or a list of numbers");
      }
    }
    if (v.size() < min_size) fail(key + " needs at least " + std::to_string(min_size) + " values");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!(v[i] > 0.0) || !std::isfinite(v[i])) fail(key + " values must be positive");
      if (i > 0 && !(v[i] > v[i - 1])) fail(key + " values must increase");
    }
    resolved[key] = v;
    return v;
  }
  /// The raw value, to be validated by the caller.
  json raw(const std::string& key, const json& fallback) {
    json v = has(key) ? source_.at(key) : fallback;
    resolved[key] = v;
    return v;
  }
  json required(const std::string& key) {
    if (!has(key)) fail("missing '" + key + "'");
    resolved[key] = source_.at(key);
    return source_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : source_.items()) {
      if (!resolved.contains(key)) fail("unknown field '" + key + "'");
    }
  }

  json resolved = json::object();

 private:
  double as_number(const std::string& key) const {
    const auto& x = source_.at(key);
    if (!x.is_number()) fail(key + " must be a number");
    const double v = x.get<double>();
    if (!std::isfinite(v)) fail(key + " must be finite");
    return v;
  }

  json source_;
  std::string context_;
};

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = test_function_families();
  return names;
}

bool radial_only(const std::string& family) { return family == "cs-optimal"; }
bool grid_only(const std::string& family) { return family == "random-band-limited"; }

json resolve_norm(Fields& f) {
  const auto norm = Normalization::from_json(f.required("norm"));
  f.resolved["norm"] = norm.to_json();
  return f.resolved["norm"];
}

json resolve_test_function(Fields& parent, const std::string& key, int n) {
  Fields f(parent.raw(key, json::object()), key);
  const auto family = f.choice("family", "gaussian", family_names());
  const auto params = f.raw("params", json::object());
  if (!params.is_object()) f.fail("params must be an object");
  f.finish();
  if (!grid_only(family)) make_test_function(family, params, n, std::nullopt, false);
  parent.resolved[key] = f.resolved;
  return f.resolved;
}

json resolve_grid(Fields& parent, const GridSpec& fallback) {
  Fields f(parent.raw("grid", json::object()), "grid");
  GridSpec spec = fallback;
  spec.N = f.integer("N", fallback.N, 4);
  spec.L = f.positive("L", fallback.L);
  f.finish();
  spec.validate();
  parent.resolved["grid"] = f.resolved;
  return f.resolved;
}

GridSpec grid_from(const json& j, int n) { return {n, j.at("N").get<int>(), j.at("L").get<double>()}; }

json resolve_params(Kind kind, const json& raw, int n, bool sphere) {
  Fields p(raw, "params");
  switch (kind) {
    case Kind::constants:
      resolve_norm(p);
      p.integer("k_max", 8, 0);
      p.integer("grid_points", 61, 5);
      p.number("tolerance", 1e-6);
      break;
    case Kind::trace: {
      const auto tf = resolve_test_function(p, "test_function", n);
      const std::string family = tf.at("family");
      resolve_norm(p);
      p.ladder("rho", {1.0}, 1);
      const auto path = p.choice("path", radial_only(family) ? "radial" : "grid", {"grid", "radial"});
      if (path == "grid" && radial_only(family)) p.fail(family + " has no grid representation");
      if (path == "radial" && grid_only(family)) p.fail(family + " has no radial representation");
      if (path == "grid") resolve_grid(p, GridSpec::defaults(n));
      p.choice("evaluation", "interpolate", {"interpolate", "trigonometric"});
      p.choice("norm_path", "automatic", {"automatic", "lattice", "analytic"});
      p.integer("resolution", 16, 2);
      const int samples = p.integer("samples", 1, 1);
      if (samples > 1 && (!grid_only(family) || tf.at("params").contains("seed"))) {
        p.fail("samples > 1 needs a seeded family with the seed taken from the config");
      }
      p.number("tolerance", 1e-3);
      break;
    }
    case Kind::rho_scan: {
      resolve_norm(p);
      // an explicit list or {min, max, count}, log-spaced
      const auto r = p.raw("rhos", {{"min", 0.5}, {"max", 8.0}, {"count", 7}});
      if (r.is_object()) {
        Fields g(r, "rhos");
        const double lo = g.positive("min", 0.5), hi = g.positive("max", 8.0);
        const int count = g.integer("count", 7, 4);
        g.finish();
        if (!(hi > lo)) g.fail("max must exceed min");
        std::vector<double> list;
        for (int i = 0; i < count; ++i) list.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
        p.resolved["rhos"] = list;
      } else {
        p.ladder("rhos", {}, 4);
      }
      const auto family = p.choice("family", "cs-optimal", family_names());
      if (grid_only(family)) p.fail(family + " has no radial representation");
      const auto fp = p.raw("family_params", json::object());
      if (!fp.is_object()) p.fail("family_params must be an object");
      if (family != "cs-optimal") make_test_function(family, fp, n, std::nullopt, false);
      p.integer("k", 0, 0);
      p.positive("truncation_argument", 400.0);
      if (p.has("min_truncation")) p.positive("min_truncation", 0.0);
      p.integer("resolution", 16, 2);
      p.number("slope_tolerance", 0.05);
      break;
    }
    case Kind::sharpness:
      if (!sphere) p.fail("sharpness needs a sphere symbol (the constant is unknown otherwise)");
      resolve_norm(p);
      p.ladder("ladder", {10.0, 40.0, 160.0}, 1);
      p.integer("resolution", 16, 2);
      p.flag("compare_gaussian", true);
      p.positive("tolerance", 1e-3);
      break;
    case Kind::critical:
      p.integer("k", 1, 0);
      p.ladder("ladder", {10.0, 100.0, 1000.0, 10000.0}, 2);
      p.positive("rho", 1.0);
      p.integer("resolution", 16, 2);
      p.integer("certificate_resolution", 64, 2);
      break;
    case Kind::duality: {
      const auto g = TimeProfile::from_json(p.raw("time_profile", json::object()));
      p.resolved["time_profile"] = g.to_json();
      resolve_test_function(p, "test_function", n);
      const std::string family = p.resolved["test_function"].at("family");
      if (radial_only(family)) p.fail(family + " has no grid representation");
      resolve_grid(p, duality_grid(n));
      p.integer("resolution", 32, 2);
      p.integer("table_points", 17, 2);
      p.positive("rel_tol", 1e-11);
      p.positive("tolerance", 1e-5);
      break;
    }
    case Kind::surface_checks:
      p.integer("samples", 100, 1);
      p.integer("certificate_resolution", 256, 2);
      p.integer("coarea_resolution", 32, 2);
      p.positive("tolerance", 1e-6);
      break;
  }
  p.finish();
  return p.resolved;
}

Normalization norm_of(const json& params) { return Normalization::from_json(params.at("norm")); }

NormPath norm_path_of(const std::string& name) {
  if (name == "lattice") return NormPath::lattice;
  if (name == "analytic") return NormPath::analytic;
  return NormPath::automatic;
}

// --- runners ---------------------------------------------------------------

Outcome run_constants(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  const auto norm = norm_of(p);
  const int n = sym.dimension();
  SupremumSearch search;
  search.k_max = p.at("k_max");
  search.grid_points = p.at("grid_points");
  std::vector<ConstantResult> results;
  json notes = json::array();
  if (norm.flavor == "homogeneous") {
    const double s = *norm.s;
    if (s > 0.5 && s < 0.5 * n) {
      results.push_back(gamma_closed_form_constant(n, s));
    } else {
      notes.push_back("gamma closed form needs 1/2 < s < n/2");
    }
  }
  results.push_back(c1_trace_constant(n, norm.sigma, norm.w, search, exec));
  const auto c0 = walther_smoothing_constant(n, norm.sigma, norm.w, search, exec);
  results.push_back(convert_smoothing_to_trace(c0, sym));

  double worst = 0.0;
  bool finite = true;
  for (const auto& a : results) {
    finite = finite && a.finite();
    for (const auto& b : results) {
      if (a.finite() && b.finite()) worst = std::max(worst, std::abs(a.value - b.value) / std::abs(b.value));
    }
  }
  Outcome out;
  json list = json::array();
  for (const auto& r : results) list.push_back(r.to_json());
  out.result = {{"n", n},
                {"norm", norm.to_json()},
                {"constants", list},
                {"smoothing_constant", c0.to_json()},
                {"max_relative_difference", worst},
                {"finite", finite},
                {"agree", finite && worst <= p.at("tolerance").get<double>()},
                {"notes", notes}};
  const double reference = results.front().value;
  for (const auto& r : results) {
    out.rows.push_back({r.t_star.value_or(0.0), r.value, reference,
                        std::isfinite(reference) && reference != 0.0 ? r.value / reference : 0.0, to_string(r.method)});
  }
  return out;
}

std::optional<double> sphere_constant(const HomogeneousSymbol& sym, const Normalization& norm, Execution exec) {
  if (!sym.is_sphere()) return std::nullopt;
  const auto c = c1_trace_constant(sym.dimension(), norm.sigma, norm.w, {}, exec);
  if (!c.finite()) return std::nullopt;
  return c.value;
}

Outcome run_trace(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  const int n = sym.dimension();
  const auto norm = norm_of(p);
  const std::string family = p.at("test_function").at("family");
  const json fparams = p.at("test_function").at("params");
  const bool grid = p.at("path") == "grid";
  const auto rhos = p.at("rho").get<std::vector<double>>();
  const int samples = p.at("samples");
  TraceOptions topts;
  topts.resolution = p.at("resolution");
  topts.evaluation = p.at("evaluation") == "trigonometric" ? FieldEvaluation::trigonometric : FieldEvaluation::interpolate;
  topts.norm_path = norm_path_of(p.at("norm_path"));
  const auto constant = sphere_constant(sym, norm, exec);
  const double tol = p.at("tolerance");

  Outcome out;
  json rows = json::array();
  json functions = json::array();
  double worst = 0.0;
  bool any_divergent = false;
  for (int k = 0; k < samples; ++k) {
    json params = fparams;
    if (grid_only(family) && !params.contains("seed")) params["seed"] = c.seed + static_cast<std::uint64_t>(k);
    const auto f = grid ? make_test_function(family, params, n, grid_from(p.at("grid"), n), true, exec)
                        : make_test_function(family, params, n, std::nullopt, false, exec);
    functions.push_back(f.describe());
    for (double rho : rhos) {
      const auto r = grid ? trace_ratio(*f.grid, sym, rho, norm, topts, exec) : trace_ratio(*f.radial, sym, rho, norm, topts, exec);
      json row = r.to_json();
      row["sample"] = k;
      rows.push_back(row);
      any_divergent = any_divergent || r.divergent;
      if (!r.divergent) worst = std::max(worst, r.normalized);
      out.rows.push_back({rho, r.lhs, r.rhs, r.divergent ? 0.0 : r.ratio,
                          samples > 1 ? "sample-" + std::to_string(k) : std::string("trace")});
    }
  }
  out.result = {{"symbol", sym.to_json()},
                {"norm", norm.to_json()},
                {"test_functions", functions},
                {"rows", rows},
                {"max_normalized", worst},
                {"divergent", any_divergent}};
  if (constant) {
    out.result["constant"] = *constant;
    out.result["bounded"] = worst <= *constant * (1.0 + tol);
  } else {
    out.result["constant"] = nullptr;
  }
  return out;
}

Outcome run_rho_scan(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  const auto norm = norm_of(p);
  RhoScanOptions opts;
  opts.family = p.at("family");
  opts.params = p.at("family_params");
  opts.k = p.at("k");
  opts.truncation_argument = p.at("truncation_argument");
  if (p.contains("min_truncation")) opts.min_truncation = p.at("min_truncation").get<double>();
  opts.resolution = p.at("resolution");
  const auto report = rho_scan(sym, norm, p.at("rhos").get<std::vector<double>>(), opts, exec);
  Outcome out;
  out.result = report.to_json();
  const bool power = norm.sigma.family == WeightSpec::Family::power && norm.w.family == WeightSpec::Family::power;
  if (power && report.fit) {
    out.result["slope_ok"] = std::abs(report.fit->slope - report.expected_slope) <= p.at("slope_tolerance").get<double>();
  }
  out.rows = csv_rows(report);
  return out;
}

Outcome run_sharpness(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  SharpnessOptions opts;
  opts.ladder = p.at("ladder").get<std::vector<double>>();
  opts.resolution = p.at("resolution");
  opts.compare_gaussian = p.at("compare_gaussian");
  opts.tolerance = p.at("tolerance");
  const auto run = sharpness_run(sym, norm_of(p), opts, exec);
  Outcome out;
  out.result = run.to_json();
  out.rows = csv_rows(run);
  return out;
}

Outcome run_critical(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  CriticalOptions opts;
  opts.k = p.at("k");
  opts.ladder = p.at("ladder").get<std::vector<double>>();
  opts.rho = p.at("rho");
  opts.resolution = p.at("resolution");
  opts.certificate_resolution = p.at("certificate_resolution");
  const auto certificate = min_hessian_det_on_level(sym, opts.certificate_resolution, exec);
  Outcome out;
  if (!certificate.positive()) {
    out.status = Status::hypothesis_violation;
    out.result = {{"symbol", sym.to_json()},
                  {"certificate", certificate.to_json()},
                  {"message", "the curvature certificate is not positive: the level set has a flat point, so the "
                              "critical trace estimate does not apply"}};
    return out;
  }
  const auto report = critical_comparison(sym, opts, exec);
  out.result = report.to_json();
  out.rows = csv_rows(report);
  return out;
}

Outcome run_duality(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  const int n = sym.dimension();
  const auto g = TimeProfile::from_json(p.at("time_profile"));
  json fparams = p.at("test_function").at("params");
  const std::string family = p.at("test_function").at("family");
  if (grid_only(family) && !fparams.contains("seed")) fparams["seed"] = c.seed;
  const auto f = make_test_function(family, fparams, n, grid_from(p.at("grid"), n), true, exec);
  DualityOptions opts;
  opts.resolution = p.at("resolution");
  opts.table_points = p.at("table_points");
  opts.rel_tol = p.at("rel_tol");
  const auto report = duality_check(sym, g, *f.grid, opts, exec);
  Outcome out;
  out.result = report.to_json();
  out.result["test_function"] = f.describe();
  out.result["passes"] = report.passes(p.at("tolerance"));
  out.rows = csv_rows(report);
  return out;
}

Outcome run_surface_checks(const Config& c, const HomogeneousSymbol& sym, Execution exec) {
  const auto& p = c.params;
  const int n = sym.dimension();
  const int samples = p.at("samples");
  const double tol = p.at("tolerance");
  Outcome out;
  const auto h = check_homogeneity_euler(sym, samples, c.seed);
  out.result["homogeneity"] = {{"samples", h.samples},
                               {"seed", h.seed},
                               {"max_scaling_defect", h.max_scaling_defect},
                               {"max_euler_defect", h.max_euler_defect},
                               {"min_value", h.min_value},
                               {"min_gradient_norm", h.min_gradient_norm}};
  const auto certificate = min_hessian_det_on_level(sym, p.at("certificate_resolution"), exec);
  out.result["certificate"] = certificate.to_json();
  out.result["flat_point"] = certificate.min_det < 0.01;

  const int coarea_res = p.at("coarea_resolution");
  const auto coarea = coarea_verify(sym, [](const Vec& x) { return std::exp(-x.squaredNorm()); }, coarea_res, {}, exec);
  out.result["coarea"] = coarea.to_json();
  out.rows.push_back({double(coarea_res), coarea.lhs, coarea.rhs, coarea.rhs / coarea.lhs, "coarea"});

  if (certificate.positive()) {
    auto source = std::make_shared<HomogeneousSymbol>(sym);
    auto dual = std::make_shared<DualSymbol>(source, certificate);
    const DualSymbol dual_dual(dual, min_hessian_det_on_level(*dual, 8, exec));
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
      Vec y(n);
      for (int k = 0; k < n; ++k) y(k) = normal(rng);
      y /= y.norm();
      const double back = dual_dual.value(y), a = sym.value(y);
      worst = std::max(worst, std::abs(back - a));
      out.rows.push_back({double(i), back, a, back / a, "dual-round-trip"});
    }
    out.result["dual_round_trip"] = {{"directions", samples}, {"max_error", worst}, {"passes", worst <= tol}};
  } else {
    out.result["dual_round_trip"] = nullptr;
  }
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_atomically(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + tmp.string());
    out << text;
    if (!out) throw InvalidArgument("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

const std::vector<KindInfo>& kinds() {
  static const std::vector<KindInfo> list = {
      {Kind::constants, "constants", "sharp trace constant by the closed form, the Bessel supremum and the smoothing conversion",
       {"norm", "k_max", "grid_points", "tolerance"}},
      {Kind::trace, "trace", "trace norm over Sobolev norm for a test function on dilated level sets",
       {"test_function", "norm", "rho", "path", "grid", "evaluation", "norm_path", "resolution", "samples", "tolerance"}},
      {Kind::rho_scan, "rho-scan", "supremal ratio over rho with a least-squares exponent fit",
       {"norm", "rhos", "family", "family_params", "k", "truncation_argument", "min_truncation", "resolution",
        "slope_tolerance"}},
      {Kind::sharpness, "sharpness", "attainment of the sharp constant by truncated extremal profiles (sphere only)",
       {"norm", "ladder", "resolution", "compare_gaussian", "tolerance"}},
      {Kind::critical, "critical", "plain versus wedge trace ratios at s = 1/2 along a truncation ladder",
       {"k", "ladder", "rho", "resolution", "certificate_resolution"}},
      {Kind::duality, "duality", "adjoint norm of the evolution against its coarea evaluation",
       {"time_profile", "test_function", "grid", "resolution", "table_points", "rel_tol", "tolerance"}},
      {Kind::surface_checks, "surface-checks", "homogeneity, curvature certificate, coarea identity and dual round trip",
       {"samples", "certificate_resolution", "coarea_resolution", "tolerance"}},
  };
  return list;
}

const char* to_string(Kind kind) {
  for (const auto& k : kinds()) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

Kind kind_from_string(const std::string& name) {
  for (const auto& k : kinds()) {
    if (name == k.name) return k.kind;
  }
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

const char* version() { return SHARPTRACE_VERSION; }

const char* to_string(Status status) {
  switch (status) {
    case Status::ok: return "ok";
    case Status::hypothesis_violation: return "hypothesis-violation";
    case Status::non_convergence: return "non-convergence";
  }
  return "unknown";
}

int Outcome::exit_code() const {
  switch (status) {
    case Status::ok: return 0;
    case Status::hypothesis_violation: return 2;
    case Status::non_convergence: return 3;
  }
  return 1;
}

json Config::to_json() const {
  return {{"schema_version", schema_version}, {"name", name},  {"kind", experiment::to_string(kind)},
          {"symbol", symbol},                 {"params", params}, {"seed", seed},
          {"output_dir", output_dir}};
}

Config parse_config(const json& j) {
  try {
    Fields f(j, "config");
    Config c;
    const auto version_field = f.required("schema_version");
    if (!version_field.is_number_integer() || version_field.get<int>() != kSchemaVersion) {
      f.fail("schema_version must be " + std::to_string(kSchemaVersion));
    }
    const auto name = f.required("name");
    if (!name.is_string()) f.fail("name must be a string");
    c.name = name.get<std::string>();
    if (c.name.empty() || !std::all_of(c.name.begin(), c.name.end(), [](char ch) {
          return std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
        }) || c.name.front() == '.') {
      f.fail("name must be a nonempty file stem of letters, digits, '-', '_' or '.'");
    }
    const auto kind = f.required("kind");
    if (!kind.is_string()) f.fail("kind must be a string");
    c.kind = kind_from_string(kind.get<std::string>());
    const auto sym = HomogeneousSymbol::from_json(f.required("symbol"));
    c.symbol = sym.to_json();
    const int seed = f.integer("seed", 1, 0);
    c.seed = static_cast<std::uint64_t>(seed);
    const auto out = f.raw("output_dir", ".");
    if (!out.is_string() || out.get<std::string>().empty()) f.fail("output_dir must be a nonempty string");
    c.output_dir = out.get<std::string>();
    c.params = resolve_params(c.kind, f.raw("params", json::object()), sym.dimension(), sym.is_sphere());
    f.finish();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path + ": malformed JSON: " + e.what());
  }
  return parse_config(j);
}

Outcome execute(const Config& config, Execution exec) {
  const auto sym = HomogeneousSymbol::from_json(config.symbol);
  try {
    switch (config.kind) {
      case Kind::constants: return run_constants(config, sym, exec);
      case Kind::trace: return run_trace(config, sym, exec);
      case Kind::rho_scan: return run_rho_scan(config, sym, exec);
      case Kind::sharpness: return run_sharpness(config, sym, exec);
      case Kind::critical: return run_critical(config, sym, exec);
      case Kind::duality: return run_duality(config, sym, exec);
      case Kind::surface_checks: return run_surface_checks(config, sym, exec);
    }
  } catch (const HypothesisViolation& e) {
    Outcome out;
    out.status = Status::hypothesis_violation;
    out.result = {{"message", e.what()}};
    return out;
  } catch (const NonConvergence& e) {
    Outcome out;
    out.status = Status::non_convergence;
    out.result = {{"message", e.what()}, {"best_residual", e.best_residual()}};
    return out;
  }
  throw InvalidArgument("unhandled experiment kind");
}

json make_report(const Config& config, const Outcome& outcome, const json& wall_clock) {
  return {{"name", config.name},
          {"kind", to_string(config.kind)},
          {"status", to_string(outcome.status)},
          {"exit_code", outcome.exit_code()},
          {"version", version()},
          {"config", config.to_json()},
          {"wall_clock", wall_clock},
          {"result", outcome.result}};
}

std::vector<std::string> write_outputs(const Config& config, const Outcome& outcome, const json& wall_clock) {
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  const auto report = dir / (config.name + ".report.json");
  write_atomically(report, make_report(config, outcome, wall_clock).dump(2) + "\n");
  written.push_back(report.string());
  if (outcome.status == Status::ok) {
    const auto csv = dir / (config.name + ".csv");
    write_atomically(csv, format_csv(outcome.rows));
    written.push_back(csv.string());
  }
  return written;
}

int run_files(const std::vector<std::string>& paths, std::ostream& log, Execution exec) {
  std::vector<Config> configs;
  try {
    for (const auto& path : paths) configs.push_back(load_config(path));
  } catch (const Error& e) {
    log << "config error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& config : configs) {
    const auto started = utc_now();
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = execute(config, exec);
    } catch (const Uncalibrated& e) {
      log << config.name << ": " << e.what() << " (run `sharptrace calibrate --out <path>` and set SHARPTRACE_CALIBRATION)\n";
      return 1;
    } catch (const InvalidArgument& e) {
      log << config.name << ": invalid argument: " << e.what() << "\n";
      return 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json clock = {{"started_utc", started}, {"seconds", seconds}};
    for (const auto& file : write_outputs(config, outcome, clock)) log << "wrote " << file << "\n";
    if (outcome.exit_code() != 0) {
      log << config.name << ": " << to_string(outcome.status) << ": " << outcome.result.value("message", "") << "\n";
      return outcome.exit_code();
    }
  }
  return 0;
}

std::string list_text() {
  std::ostringstream os;
  for (const auto& k : kinds()) os << std::left << std::setw(16) << k.name << k.summary << "\n";
  return os.str();
}

json list_json() {
  json list = json::array();
  for (const auto& k : kinds()) list.push_back({{"name", k.name}, {"summary", k.summary}, {"params", k.params}});
  return {{"schema_version", kSchemaVersion}, {"version", version()}, {"kinds", list}};
}

}  // namespace sharptrace::experiment
