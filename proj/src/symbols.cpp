#include "sharptrace/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "sharptrace/errors.hpp"

namespace sharptrace {

namespace {

void require_dimension(int n) {
  if (n < 2 || n > kMaxDim) {
    throw InvalidArgument("symbol dimension must lie in [2, " + std::to_string(kMaxDim) +
                          "], got " + std::to_string(n));
  }
}

void require_nonzero(const Vec& xi) {
  if (xi.squaredNorm() == 0.0) throw InvalidArgument("symbol derivatives are undefined at xi = 0");
}

Mat matrix_from_json(const nlohmann::json& j, int n, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) {
    throw InvalidArgument(std::string(what) + " must be an " + std::to_string(n) + "x" +
                          std::to_string(n) + " array");
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) {
      throw InvalidArgument(std::string(what) + ": row " + std::to_string(i) + " has wrong length");
    }
    for (int k = 0; k < n; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& context) {
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw InvalidArgument(context + ": unknown field '" + key + "'");
    }
  }
}

}  // namespace

double AngularProfile::operator()(const Vec& theta) const {
  return c0 + b.dot(theta) + theta.dot(C * theta);
}

double AngularProfile::bound() const {
  double eig = 0.0;
  if (C.size() > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> solver(C, Eigen::EigenvaluesOnly);
    eig = solver.eigenvalues().cwiseAbs().maxCoeff();
  }
  return std::abs(c0) + b.norm() + eig;
}

HomogeneousSymbol HomogeneousSymbol::quadratic(const Mat& A) {
  const int n = static_cast<int>(A.rows());
  require_dimension(n);
  if (A.cols() != n) throw InvalidArgument("quadratic symbol: matrix must be square");
  if (!A.allFinite()) throw InvalidArgument("quadratic symbol: matrix has non-finite entries");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14 * A.cwiseAbs().maxCoeff()) {
    throw InvalidArgument("quadratic symbol: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(A, Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0)) {
    std::ostringstream msg;
    msg << "quadratic symbol: matrix is not positive definite (smallest eigenvalue "
        << solver.eigenvalues().minCoeff() << "); ellipticity a(xi) > 0 fails";
    throw InvalidArgument(msg.str());
  }
  HomogeneousSymbol s(Family::quadratic, n);
  s.matrix_ = 0.5 * (A + A.transpose());
  return s;
}

HomogeneousSymbol HomogeneousSymbol::sphere(int n) {
  require_dimension(n);
  return quadratic(Mat::Identity(n, n));
}

HomogeneousSymbol HomogeneousSymbol::quartic(int n) {
  require_dimension(n);
  return HomogeneousSymbol(Family::quartic, n);
}

HomogeneousSymbol HomogeneousSymbol::perturbed_sphere(int n, double epsilon, AngularProfile h) {
  require_dimension(n);
  if (h.b.size() == 0) h.b = Vec::Zero(n);
  if (h.C.size() == 0) h.C = Mat::Zero(n, n);
  if (h.b.size() != n || h.C.rows() != n || h.C.cols() != n) {
    throw InvalidArgument("perturbed-sphere: profile coefficients do not match n = " +
                          std::to_string(n));
  }
  if (!std::isfinite(epsilon) || !std::isfinite(h.c0) || !h.b.allFinite() || !h.C.allFinite()) {
    throw InvalidArgument("perturbed-sphere: non-finite parameters");
  }
  h.C = 0.5 * (h.C + h.C.transpose());
  const double bound = std::abs(epsilon) * h.bound();
  if (!(bound < 0.5)) {
    std::ostringstream msg;
    msg << "perturbed-sphere: |epsilon| max|h| <= " << bound
        << " must stay below 1/2 (ellipticity margin)";
    throw InvalidArgument(msg.str());
  }
  HomogeneousSymbol s(Family::perturbed_sphere, n);
  s.epsilon_ = epsilon;
  s.profile_ = std::move(h);
  return s;
}

bool HomogeneousSymbol::is_sphere() const {
  if (family_ == Family::perturbed_sphere) {
    return epsilon_ == 0.0;
  }
  return family_ == Family::quadratic && matrix_ == Mat::Identity(n_, n_);
}

double HomogeneousSymbol::value(const Vec& xi) const {
  switch (family_) {
    case Family::quadratic: return xi.dot(matrix_ * xi);
    case Family::quartic: return std::sqrt(xi.array().pow(4).sum());
    case Family::perturbed_sphere: {
      const double r2 = xi.squaredNorm();
      const double r = std::sqrt(r2);
      const auto& h = profile_;
      return r2 + epsilon_ * (h.c0 * r2 + r * h.b.dot(xi) + xi.dot(h.C * xi));
    }
  }
  return 0.0;
}

Vec HomogeneousSymbol::gradient(const Vec& xi) const {
  switch (family_) {
    case Family::quadratic: return 2.0 * (matrix_ * xi);
    case Family::quartic: {
      require_nonzero(xi);
      const double root = std::sqrt(xi.array().pow(4).sum());
      return (2.0 / root) * xi.array().cube().matrix();
    }
    case Family::perturbed_sphere: {
      require_nonzero(xi);
      const double r = xi.norm();
      const auto& h = profile_;
      Vec g = 2.0 * xi;
      g += epsilon_ * (2.0 * h.c0 * xi + (h.b.dot(xi) / r) * xi + r * h.b + 2.0 * (h.C * xi));
      return g;
    }
  }
  return {};
}

Mat HomogeneousSymbol::hessian(const Vec& xi) const {
  switch (family_) {
    case Family::quadratic: return 2.0 * matrix_;
    case Family::quartic: {
      require_nonzero(xi);
      const double sum = xi.array().pow(4).sum();
      const double root = std::sqrt(sum);
      const Vec cubes = xi.array().cube().matrix();
      Mat h = -4.0 / (sum * root) * (cubes * cubes.transpose());
      for (int i = 0; i < n_; ++i) h(i, i) += 6.0 * xi(i) * xi(i) / root;
      return h;
    }
    case Family::perturbed_sphere: {
      require_nonzero(xi);
      const double r = xi.norm();
      const Vec u = xi / r;
      const auto& h = profile_;
      const Mat id = Mat::Identity(n_, n_);
      // d/dxi of (b.xi) xi / r and of r b
      Mat d1 = u * h.b.transpose() + h.b.dot(u) * (id - u * u.transpose());
      Mat d2 = h.b * u.transpose();
      return 2.0 * id + epsilon_ * (2.0 * h.c0 * id + d1 + d2 + 2.0 * h.C);
    }
  }
  return {};
}

std::string HomogeneousSymbol::describe() const {
  std::ostringstream out;
  switch (family_) {
    case Family::quadratic:
      if (is_sphere()) {
        out << "sphere |xi|^2, n=" << n_;
      } else {
        out << "quadratic <A xi, xi>, n=" << n_;
      }
      break;
    case Family::quartic: out << "quartic (sum xi_i^4)^(1/2), n=" << n_; break;
    case Family::perturbed_sphere: out << "perturbed-sphere eps=" << epsilon_ << ", n=" << n_; break;
  }
  return out.str();
}

nlohmann::json HomogeneousSymbol::to_json() const {
  switch (family_) {
    case Family::quadratic:
      return {{"family", "quadratic"}, {"n", n_}, {"matrix", matrix_to_json(matrix_)}};
    case Family::quartic: return {{"family", "quartic"}, {"n", n_}};
    case Family::perturbed_sphere:
      return {{"family", "perturbed-sphere"},
              {"n", n_},
              {"epsilon", epsilon_},
              {"profile",
               {{"c0", profile_.c0},
                {"b", std::vector<double>(profile_.b.data(), profile_.b.data() + n_)},
                {"C", matrix_to_json(profile_.C)}}}};
  }
  return {};
}

HomogeneousSymbol HomogeneousSymbol::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("symbol must be a JSON object");
  if (!j.contains("family")) throw InvalidArgument("symbol: missing 'family'");
  if (!j.contains("n")) throw InvalidArgument("symbol: missing 'n'");
  const auto family = j.at("family").get<std::string>();
  nlohmann::json params = j;
  params.erase("family");
  params.erase("n");
  return make_symbol(family, params, j.at("n").get<int>());
}

HomogeneousSymbol make_symbol(const std::string& family, const nlohmann::json& params, int n) {
  try {
    if (family == "sphere") {
      reject_unknown(params, {}, "sphere symbol");
      return HomogeneousSymbol::sphere(n);
    }
    if (family == "quadratic") {
      reject_unknown(params, {"matrix"}, "quadratic symbol");
      if (!params.contains("matrix")) throw InvalidArgument("quadratic symbol: missing 'matrix'");
      require_dimension(n);
      return HomogeneousSymbol::quadratic(matrix_from_json(params.at("matrix"), n, "matrix"));
    }
    if (family == "quartic") {
      reject_unknown(params, {}, "quartic symbol");
      return HomogeneousSymbol::quartic(n);
    }
    if (family == "perturbed-sphere") {
      reject_unknown(params, {"epsilon", "profile"}, "perturbed-sphere symbol");
      require_dimension(n);
      AngularProfile h;
      h.b = Vec::Zero(n);
      h.C = Mat::Zero(n, n);
      if (params.contains("profile")) {
        const auto& p = params.at("profile");
        reject_unknown(p, {"c0", "b", "C"}, "perturbed-sphere profile");
        if (p.contains("c0")) h.c0 = p.at("c0").get<double>();
        if (p.contains("b")) {
          const auto b = p.at("b").get<std::vector<double>>();
          if (static_cast<int>(b.size()) != n) throw InvalidArgument("profile.b must have n entries");
          for (int i = 0; i < n; ++i) h.b(i) = b[i];
        }
        if (p.contains("C")) h.C = matrix_from_json(p.at("C"), n, "profile.C");
      }
      return HomogeneousSymbol::perturbed_sphere(n, params.value("epsilon", 0.0), h);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("symbol: ") + e.what());
  }
  throw InvalidArgument("unknown symbol family '" + family +
                        "' (expected sphere, quadratic, quartic, perturbed-sphere)");
}

HomogeneityReport check_homogeneity_euler(const Symbol& sym, int samples, std::uint64_t seed) {
  if (samples < 1) throw InvalidArgument("check_homogeneity_euler: samples must be >= 1");
  const int n = sym.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  HomogeneityReport report;
  report.samples = samples;
  report.seed = seed;
  report.min_value = std::numeric_limits<double>::infinity();
  report.min_gradient_norm = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    Vec xi(n);
    for (int k = 0; k < n; ++k) xi(k) = normal(rng);
    xi *= (0.5 + 1.5 * unit(rng)) / xi.norm();
    const double lambda = std::exp(std::log(0.25) + unit(rng) * std::log(16.0));
    const double a = sym.value(xi);
    const double scaled = sym.value(lambda * xi);
    report.max_scaling_defect =
        std::max(report.max_scaling_defect, std::abs(scaled - lambda * lambda * a) / scaled);
    report.max_euler_defect =
        std::max(report.max_euler_defect, std::abs(a - 0.5 * xi.dot(sym.gradient(xi))) / a);
    report.min_value = std::min(report.min_value, a / xi.squaredNorm());
    report.min_gradient_norm = std::min(report.min_gradient_norm, sym.gradient(xi).norm() / xi.norm());
  }
  return report;
}

std::vector<Vec> level_set_samples(const Symbol& sym, int resolution) {
  if (resolution < 1) throw InvalidArgument("level_set_samples: resolution must be >= 1");
  const int n = sym.dimension();
  std::vector<Vec> dirs;
  if (n == 2) {
    dirs.reserve(resolution);
    for (int j = 0; j < resolution; ++j) {
      const double phi = 2.0 * kPi * j / resolution;
      Vec t(2);
      t << std::cos(phi), std::sin(phi);
      dirs.push_back(t);
    }
  } else {
    int res = resolution;
    while (res > 1 && 2.0 * n * std::pow(res + 1.0, n - 1) > 2e6) --res;
    const int per_axis = res + 1;
    long face_points = 1;
    for (int d = 0; d < n - 1; ++d) face_points *= per_axis;
    dirs.reserve(static_cast<std::size_t>(2 * n * face_points));
    for (int axis = 0; axis < n; ++axis) {
      for (int sign : {1, -1}) {
        for (long idx = 0; idx < face_points; ++idx) {
          Vec p(n);
          long rest = idx;
          for (int d = 0; d < n; ++d) {
            if (d == axis) {
              p(d) = sign;
              continue;
            }
            p(d) = -1.0 + 2.0 * static_cast<double>(rest % per_axis) / res;
            rest /= per_axis;
          }
          dirs.push_back(p / p.norm());
        }
      }
    }
  }
  for (auto& t : dirs) t /= std::sqrt(sym.value(t));
  return dirs;
}

nlohmann::json CurvatureCertificate::to_json() const {
  return {{"resolution", resolution},
          {"min_hessian_det", min_det},
          {"argmin", std::vector<double>(argmin.data(), argmin.data() + argmin.size())},
          {"positive", positive()}};
}

CurvatureCertificate min_hessian_det_on_level(const Symbol& sym, int resolution, Execution exec) {
  const auto points = level_set_samples(sym, resolution);
  std::vector<double> dets(points.size());
  kernels::for_each_index(exec, points.size(),
                          [&](std::size_t i) { dets[i] = sym.hessian(points[i]).determinant(); });
  CurvatureCertificate cert;
  cert.resolution = resolution;
  const auto it = std::min_element(dets.begin(), dets.end());
  cert.min_det = *it;
  cert.argmin = points[static_cast<std::size_t>(it - dets.begin())];
  return cert;
}

namespace {

double angle_between(const Vec& g, const Vec& x) {
  const Vec u = x / x.norm();
  const double along = g.dot(u);
  const double across = (g - along * u).norm();
  return std::atan2(across, along);
}

void finish(const Symbol& sym, const Vec& x, const Vec& xi, int iterations, DualEvaluation& out) {
  out.iterations = iterations;
  out.value = sym.value(xi);
  out.scale = std::sqrt(out.value);
  out.xi_star = xi / out.scale;
  out.gradient = xi;
  out.hessian = sym.hessian(xi).inverse();
  out.residual = angle_between(sym.gradient(out.xi_star), x);
}

// Damped Newton on grad a(xi) = x from xi0. Returns false when it stalls.
bool newton_gradient_solve(const Symbol& sym, const Vec& x, Vec xi, double tol, int max_iterations,
                           DualEvaluation& out, double& best) {
  const double scale = x.norm();
  Vec residual = sym.gradient(xi) - x;
  double norm = residual.norm();
  for (int iter = 0; iter < max_iterations; ++iter) {
    best = std::min(best, norm / scale);
    if (norm <= tol * scale) {
      finish(sym, x, xi, iter, out);
      return true;
    }
    const Mat h = sym.hessian(xi);
    const Vec step = h.partialPivLu().solve(residual);
    if (!step.allFinite()) return false;
    double alpha = 1.0;
    bool accepted = false;
    while (alpha > 1e-8) {
      const Vec trial = xi - alpha * step;
      if (trial.squaredNorm() > 0.0) {
        const Vec r = sym.gradient(trial) - x;
        if (r.norm() < (1.0 - 1e-4 * alpha) * norm) {
          xi = trial;
          residual = r;
          norm = r.norm();
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // round-off floor: accept a residual within a few ulps of the target
      if (norm <= 1e3 * tol * scale) {
        finish(sym, x, xi, iter, out);
        return true;
      }
      return false;
    }
  }
  return false;
}

}  // namespace

DualEvaluation dual_eval(const Symbol& sym, const Vec& x, double tol, int max_iterations) {
  const int n = sym.dimension();
  if (x.size() != n) throw InvalidArgument("dual_eval: point has wrong dimension");
  if (!(x.squaredNorm() > 0.0) || !x.allFinite()) throw InvalidArgument("dual_eval: x must be nonzero and finite");
  DualEvaluation out;
  out.x = x;
  double best = std::numeric_limits<double>::infinity();
  auto start_from = [&](const Vec& direction) {
    const Vec unit = direction / direction.norm();
    const Vec xi0 = unit * (x.norm() / sym.gradient(unit).norm());
    return newton_gradient_solve(sym, x, xi0, tol, max_iterations, out, best);
  };
  if (start_from(x)) return out;
  // fall back to the sampled directions whose gradients align best with x
  auto samples = level_set_samples(sym, n == 2 ? 64 : 6);
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    order.emplace_back(angle_between(sym.gradient(samples[i]), x), i);
  }
  std::sort(order.begin(), order.end());
  for (std::size_t k = 0; k < std::min<std::size_t>(order.size(), 8); ++k) {
    if (start_from(samples[order[k].second])) return out;
  }
  std::ostringstream msg;
  msg << "dual_eval: Newton did not converge for " << sym.describe() << " (best relative residual "
      << best << ")";
  throw NonConvergence(msg.str(), best);
}

DualSymbol::DualSymbol(std::shared_ptr<const Symbol> source, const CurvatureCertificate& certificate,
                       double tol)
    : source_(std::move(source)), tol_(tol) {
  if (!source_) throw InvalidArgument("DualSymbol: null source symbol");
  if (!certificate.positive()) {
    std::ostringstream msg;
    msg << "dual function undefined: curvature certificate failed for " << source_->describe()
        << " (min det hess a = " << certificate.min_det << " at resolution " << certificate.resolution
        << ")";
    throw HypothesisViolation(msg.str());
  }
}

std::string DualSymbol::describe() const { return "dual of " + source_->describe(); }

nlohmann::json DualSymbol::to_json() const { return {{"dual_of", source_->to_json()}}; }

}  // namespace sharptrace
