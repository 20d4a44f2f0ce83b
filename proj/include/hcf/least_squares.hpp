#ifndef HCF_LEAST_SQUARES_HPP
#define HCF_LEAST_SQUARES_HPP

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <utility>
#include <vector>

namespace hcf {

struct FitParameter {
  std::string name;
  double value = 0.0;
  double uncertainty = 0.0;  // 1-sigma; NaN when the data do not constrain the parameter
  bool fixed = false;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  std::vector<std::pair<std::string, double>> derived;
  double residual_norm = 0.0;  // ||weighted residuals||_2
  double chi_square = 0.0;
  Eigen::Index dof = 0;
  int iterations = 0;
  bool converged = false;
  bool gradient_criterion = false;
  bool step_criterion = false;  // relative step or relative cost change below tolerance
  std::string solver_status;
  bool weighted = false;  // per-point sigmas supplied
  std::vector<std::string> warnings;

  const FitParameter& parameter(std::string_view name) const;
  double value(std::string_view name) const { return parameter(name).value; }
  double uncertainty(std::string_view name) const { return parameter(name).uncertainty; }
  std::optional<double> derived_value(std::string_view name) const;
};

/// How a parameter is mapped to the unconstrained optimizer coordinate.
enum class ParamScale {
  linear,  // p = p0 + scale * x
  log,     // p = p0 * exp(x), keeps p > 0
};

struct ParamSpec {
  std::string name;
  ParamScale scale = ParamScale::linear;
  double step_scale = 1.0;  // linear parameters only
  bool fixed = false;
};

struct SolverOptions {
  int max_iterations = 200;
  double relative_step_tolerance = 1e-10;
  double relative_cost_tolerance = 1e-12;
  /// Largest |cos| between the residual vector and any Jacobian column accepted as stationary.
  double gradient_tolerance = 1e-6;
};

namespace detail {

/// Maps optimizer coordinates x to natural parameters, starting from p0 at x = 0.
struct ParamTransform {
  std::vector<ParamSpec> specs;
  Eigen::VectorXd initial;
  std::vector<Eigen::Index> free;  // natural index of each optimizer coordinate

  Eigen::VectorXd natural(const Eigen::VectorXd& x) const;
  /// dp/dx for each free coordinate.
  Eigen::VectorXd derivative(const Eigen::VectorXd& x) const;
};

ParamTransform make_transform(std::vector<ParamSpec> specs, const Eigen::VectorXd& initial);

/// Throws SingularFitError when the weighted free-parameter Jacobian is rank deficient.
void check_identifiable(const Eigen::MatrixXd& weighted_jacobian, const ParamTransform& transform);

FitResult summarize(std::string model, const ParamTransform& transform, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& weighted_residual, const Eigen::MatrixXd& weighted_jacobian, bool weighted,
                    int iterations, int status, const SolverOptions& options, double data_norm);

}  // namespace detail

/*
 * Weighted nonlinear least squares on a model exposing
 *
 *   Eigen::Index values() const;
 *   void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& out) const;
 *   void jacobian(const Eigen::VectorXd& p, Eigen::MatrixXd& out) const;   // values() x p.size()
 *
 * in natural parameters. Minimizes sum(((model - observed) / sigma)^2) with Eigen's
 * trust-region Levenberg-Marquardt in transformed coordinates; fixed parameters stay at
 * their initial value. Uncertainties come from the linearized covariance, scaled by the
 * reduced chi-square when no sigmas are supplied.
 */
template <typename Model>
FitResult fit_model(std::string name, const Model& model, std::vector<ParamSpec> specs, const Eigen::VectorXd& initial,
                    const Eigen::VectorXd& observed, const std::optional<Eigen::VectorXd>& sigma,
                    const SolverOptions& options = {}) {
  const detail::ParamTransform transform = detail::make_transform(std::move(specs), initial);
  const Eigen::VectorXd inv_sigma =
      sigma ? Eigen::VectorXd(sigma->cwiseInverse()) : Eigen::VectorXd::Ones(observed.size());

  struct Functor : Eigen::DenseFunctor<double> {
    const Model& model;
    const detail::ParamTransform& transform;
    const Eigen::VectorXd& observed;
    const Eigen::VectorXd& inv_sigma;
    mutable Eigen::VectorXd buffer;
    mutable Eigen::MatrixXd jac_buffer;

    Functor(const Model& m, const detail::ParamTransform& t, const Eigen::VectorXd& y, const Eigen::VectorXd& w)
        : Eigen::DenseFunctor<double>(static_cast<int>(t.free.size()), static_cast<int>(y.size())),
          model(m), transform(t), observed(y), inv_sigma(w) {}

    int operator()(const InputType& x, ValueType& fvec) const {
      model.evaluate(transform.natural(x), buffer);
      fvec = (buffer - observed).cwiseProduct(inv_sigma);
      return 0;
    }
    int df(const InputType& x, JacobianType& fjac) const {
      model.jacobian(transform.natural(x), jac_buffer);
      const Eigen::VectorXd dp = transform.derivative(x);
      fjac.resize(observed.size(), static_cast<Eigen::Index>(transform.free.size()));
      for (std::size_t j = 0; j < transform.free.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        fjac.col(k) = jac_buffer.col(transform.free[j]).cwiseProduct(inv_sigma) * dp[k];
      }
      return 0;
    }
  };

  Functor functor(model, transform, observed, inv_sigma);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(transform.free.size()));
  Eigen::VectorXd fvec(observed.size());
  Eigen::MatrixXd fjac;

  functor.df(x, fjac);
  detail::check_identifiable(fjac, transform);

  Eigen::LevenbergMarquardt<Functor> lm(functor);
  lm.setXtol(options.relative_step_tolerance);
  lm.setFtol(options.relative_cost_tolerance);
  lm.setGtol(0.0);
  lm.setMaxfev(1000 * (options.max_iterations + 1));

  int iterations = 0;
  auto status = lm.minimizeInit(x);
  if (status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
    do {
      status = lm.minimizeOneStep(x);
      ++iterations;
    } while (status == Eigen::LevenbergMarquardtSpace::Running && iterations < options.max_iterations);
  }

  functor(x, fvec);
  functor.df(x, fjac);
  return detail::summarize(std::move(name), transform, x, fvec, fjac, sigma.has_value(), iterations,
                           static_cast<int>(status), options, observed.cwiseProduct(inv_sigma).norm());
}

/// Central finite-difference Jacobian of a model in natural parameters, with one step per parameter.
template <typename Model>
Eigen::MatrixXd numeric_jacobian(const Model& model, const Eigen::VectorXd& p, const Eigen::VectorXd& steps) {
  Eigen::VectorXd plus, minus;
  Eigen::MatrixXd jac(model.values(), p.size());
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    Eigen::VectorXd q = p;
    q[j] = p[j] + steps[j];
    model.evaluate(q, plus);
    q[j] = p[j] - steps[j];
    model.evaluate(q, minus);
    jac.col(j) = (plus - minus) / (2.0 * steps[j]);
  }
  return jac;
}

}  // namespace hcf

#endif  // HCF_LEAST_SQUARES_HPP
