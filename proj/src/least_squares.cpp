#include "hcf/least_squares.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <limits>

#include "hcf/error.hpp"

namespace hcf {

const FitParameter& FitResult::parameter(std::string_view name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw InvariantError(std::string(name), "no such fit parameter in '" + model + "'");
}

std::optional<double> FitResult::derived_value(std::string_view name) const {
  for (const auto& [key, v] : derived)
    if (key == name) return v;
  return std::nullopt;
}

namespace detail {

namespace {

const char* status_name(int status) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (status) {
    case NotStarted: return "not_started";
    case Running: return "max_iterations";
    case ImproperInputParameters: return "improper_input";
    case RelativeReductionTooSmall: return "relative_cost_change";
    case RelativeErrorTooSmall: return "relative_step";
    case RelativeErrorAndReductionTooSmall: return "relative_step_and_cost_change";
    case CosinusTooSmall: return "zero_gradient";
    case TooManyFunctionEvaluation: return "max_function_evaluations";
    case FtolTooSmall: return "cost_at_machine_precision";
    case XtolTooSmall: return "step_at_machine_precision";
    case GtolTooSmall: return "gradient_at_machine_precision";
    case UserAsked: return "user_abort";
  }
  return "unknown";
}

bool is_stationary_status(int status) {
  using namespace Eigen::LevenbergMarquardtSpace;
  switch (status) {
    case RelativeReductionTooSmall:
    case RelativeErrorTooSmall:
    case RelativeErrorAndReductionTooSmall:
    case CosinusTooSmall:
    case FtolTooSmall:
    case XtolTooSmall:
    case GtolTooSmall:
      return true;
    default:
      return false;
  }
}

}  // namespace

Eigen::VectorXd ParamTransform::natural(const Eigen::VectorXd& x) const {
  Eigen::VectorXd p = initial;
  for (std::size_t j = 0; j < free.size(); ++j) {
    const auto k = free[j];
    const double xj = x[static_cast<Eigen::Index>(j)];
    const auto& spec = specs[static_cast<std::size_t>(k)];
    p[k] = spec.scale == ParamScale::log ? initial[k] * std::exp(xj) : initial[k] + spec.step_scale * xj;
  }
  return p;
}

Eigen::VectorXd ParamTransform::derivative(const Eigen::VectorXd& x) const {
  Eigen::VectorXd d(static_cast<Eigen::Index>(free.size()));
  for (std::size_t j = 0; j < free.size(); ++j) {
    const auto k = free[j];
    const auto& spec = specs[static_cast<std::size_t>(k)];
    const double xj = x[static_cast<Eigen::Index>(j)];
    d[static_cast<Eigen::Index>(j)] = spec.scale == ParamScale::log ? initial[k] * std::exp(xj) : spec.step_scale;
  }
  return d;
}

ParamTransform make_transform(std::vector<ParamSpec> specs, const Eigen::VectorXd& initial) {
  if (static_cast<Eigen::Index>(specs.size()) != initial.size())
    throw InvariantError("initial", "parameter count does not match the model");
  ParamTransform t;
  t.initial = initial;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const auto& s = specs[k];
    const double v = initial[static_cast<Eigen::Index>(k)];
    if (!std::isfinite(v)) throw InvariantError(s.name, "initial value is not finite");
    if (s.scale == ParamScale::log && !(v > 0.0))
      throw InvariantError(s.name, "initial value must be positive for a log-scaled parameter");
    if (s.scale == ParamScale::linear && !(s.step_scale > 0.0))
      throw InvariantError(s.name, "step scale must be positive");
    if (!s.fixed) t.free.push_back(static_cast<Eigen::Index>(k));
  }
  if (t.free.empty()) throw InvariantError("parameters", "every parameter is fixed");
  t.specs = std::move(specs);
  return t;
}

void check_identifiable(const Eigen::MatrixXd& jac, const ParamTransform& transform) {
  const Eigen::Index n = jac.cols();
  const Eigen::VectorXd norms = jac.colwise().norm();
  const double largest = norms.maxCoeff();
  auto name = [&](Eigen::Index j) { return transform.specs[static_cast<std::size_t>(transform.free[j])].name; };
  if (!(largest > 0.0)) throw SingularFitError(name(0), n > 1 ? name(1) : name(0));
  for (Eigen::Index j = 0; j < n; ++j)
    if (!(norms[j] > 1e-14 * largest)) {
      const Eigen::Index other = j == 0 ? (n > 1 ? 1 : 0) : 0;
      throw SingularFitError(name(j), name(other));
    }
  if (n < 2) return;
  const Eigen::MatrixXd unit = jac * norms.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(unit, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s[n - 1] > 1e-9 * s[0]) return;
  // the null direction names the degenerate pair: its two largest components
  const Eigen::VectorXd null = svd.matrixV().col(n - 1).cwiseAbs();
  Eigen::Index first = 0;
  null.maxCoeff(&first);
  Eigen::Index second = first == 0 ? 1 : 0;
  for (Eigen::Index j = 0; j < n; ++j)
    if (j != first && null[j] > null[second]) second = j;
  throw SingularFitError(name(std::min(first, second)), name(std::max(first, second)));
}

FitResult summarize(std::string model, const ParamTransform& transform, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& r, const Eigen::MatrixXd& fjac, bool weighted, int iterations, int status,
                    const SolverOptions& options, double data_norm) {
  FitResult result;
  result.model = std::move(model);
  result.weighted = weighted;
  result.iterations = iterations;
  result.solver_status = status_name(status);

  const Eigen::VectorXd p = transform.natural(x);
  const Eigen::VectorXd dp = transform.derivative(x);
  const auto m = r.size();
  const auto k = static_cast<Eigen::Index>(transform.free.size());

  result.chi_square = r.squaredNorm();
  result.residual_norm = std::sqrt(result.chi_square);
  result.dof = m - k;

  // stationarity: residual orthogonal to every Jacobian column
  double worst_cosine = 0.0;
  if (result.residual_norm > 0.0)
    for (Eigen::Index j = 0; j < k; ++j) {
      const double cn = fjac.col(j).norm();
      if (cn > 0.0) worst_cosine = std::max(worst_cosine, std::abs(fjac.col(j).dot(r)) / (cn * result.residual_norm));
    }
  // a residual at round-off level has no meaningful direction
  const bool exact = result.residual_norm <= 1e-12 * data_norm;
  result.gradient_criterion = exact || worst_cosine <= options.gradient_tolerance;
  result.step_criterion = is_stationary_status(status);
  result.converged = result.gradient_criterion && result.step_criterion;
  if (!result.converged) {
    result.warnings.push_back("fit did not converge (" + result.solver_status + ")");
  }

  // covariance in natural free parameters, via SVD of the column-equilibrated Jacobian
  Eigen::MatrixXd jn = fjac;
  for (Eigen::Index j = 0; j < k; ++j) jn.col(j) /= dp[j];
  const Eigen::VectorXd norms = jn.colwise().norm();
  const double largest = norms.size() ? norms.maxCoeff() : 0.0;
  Eigen::VectorXd uncertainty = Eigen::VectorXd::Constant(k, std::numeric_limits<double>::quiet_NaN());
  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < k; ++j)
    if (norms[j] > 1e-12 * largest && largest > 0.0) active.push_back(j);
  if (!active.empty()) {
    Eigen::MatrixXd ja(m, static_cast<Eigen::Index>(active.size()));
    for (std::size_t a = 0; a < active.size(); ++a)
      ja.col(static_cast<Eigen::Index>(a)) = jn.col(active[a]) / norms[active[a]];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ja, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv_s2 = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > 1e-12 * s[0]) inv_s2[i] = 1.0 / (s[i] * s[i]);
    const Eigen::MatrixXd cov = svd.matrixV() * inv_s2.asDiagonal() * svd.matrixV().transpose();
    double scale = 1.0;
    if (!weighted) scale = result.dof > 0 ? result.chi_square / static_cast<double>(result.dof) : 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto i = static_cast<Eigen::Index>(a);
      uncertainty[active[a]] = std::sqrt(std::max(0.0, cov(i, i) * scale)) / norms[active[a]];
    }
  }

  Eigen::Index next_free = 0;
  for (std::size_t i = 0; i < transform.specs.size(); ++i) {
    FitParameter fp;
    fp.name = transform.specs[i].name;
    fp.value = p[static_cast<Eigen::Index>(i)];
    fp.fixed = transform.specs[i].fixed;
    if (fp.fixed) {
      fp.uncertainty = 0.0;
    } else {
      fp.uncertainty = uncertainty[next_free++];
      if (std::isnan(fp.uncertainty)) result.warnings.push_back("parameter '" + fp.name + "' is not constrained by the data");
    }
    result.parameters.push_back(std::move(fp));
  }
  return result;
}

}  // namespace detail

}  // namespace hcf
