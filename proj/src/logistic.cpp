#include "curemix/logistic.hpp"

#include "curemix/errors.hpp"

#include <cmath>

namespace curemix {

double
phi(double u)
{
  if (u >= 0.0)
    return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double
log_phi(double u)
{
  // -log(1 + e^{-u})
  return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

double
log_one_minus_phi(double u)
{
  return log_phi(-u);
}

namespace {

constexpr double step_tolerance = 1e-6;

void
check_inputs(const Eigen::MatrixXd& design,
             const Eigen::VectorXd& responses,
             const Eigen::VectorXd& trim)
{
  if (responses.size() != design.rows() || trim.size() != design.rows())
    throw InvalidInput("logistic inputs differ in length");
  for (Eigen::Index i = 0; i < responses.size(); ++i) {
    if (!(responses(i) >= 0.0 && responses(i) <= 1.0))
      throw InvalidInput("logistic responses must lie in [0, 1]");
    if (!(trim(i) >= 0.0) || !std::isfinite(trim(i)))
      throw InvalidInput("trim weights must be finite and non-negative");
  }
  if (!design.allFinite())
    throw InvalidInput("design matrix must be finite");
}

} // namespace

double
fractional_logistic_objective(const Eigen::MatrixXd& design,
                              const Eigen::VectorXd& responses,
                              const Eigen::VectorXd& trim_weights,
                              const Eigen::VectorXd& gamma)
{
  const Eigen::VectorXd eta = design * gamma;
  double value = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (trim_weights(i) == 0.0)
      continue;
    const double r = responses(i);
    double term = 0.0;
    if (r > 0.0)
      term += r * log_phi(eta(i));
    if (r < 1.0)
      term += (1.0 - r) * log_one_minus_phi(eta(i));
    value += trim_weights(i) * term;
  }
  return value;
}

Eigen::VectorXd
fractional_logistic_gradient(const Eigen::MatrixXd& design,
                             const Eigen::VectorXd& responses,
                             const Eigen::VectorXd& trim_weights,
                             const Eigen::VectorXd& gamma)
{
  const Eigen::VectorXd eta = design * gamma;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    resid(i) = trim_weights(i) * (responses(i) - phi(eta(i)));
  return design.transpose() * resid;
}

LogisticFit
fit_fractional_logistic(const Eigen::MatrixXd& design,
                        const Eigen::VectorXd& responses,
                        const Eigen::VectorXd& trim_weights,
                        const LogisticOptions& options)
{
  check_inputs(design, responses, trim_weights);
  const auto k = design.cols();
  {
    Eigen::Index active = 0;
    for (Eigen::Index i = 0; i < design.rows(); ++i)
      active += trim_weights(i) > 0.0 ? 1 : 0;
    Eigen::MatrixXd kept(active, k);
    for (Eigen::Index i = 0, r = 0; i < design.rows(); ++i)
      if (trim_weights(i) > 0.0)
        kept.row(r++) = design.row(i);
    if (active < k || Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(kept).rank() < k)
      throw SingularDesign("incidence design is rank deficient on the rows kept by trimming");
  }

  LogisticFit fit;
  fit.gamma = options.start ? *options.start : Eigen::VectorXd::Zero(k);
  if (fit.gamma.size() != k)
    throw InvalidInput("logistic start vector has the wrong length");

  const auto n = design.rows();
  Eigen::VectorXd residual(n), curvature(n);
  auto evaluate = [&](const Eigen::VectorXd& gamma, Eigen::VectorXd& gradient, Eigen::MatrixXd& neg_hessian) {
    const Eigen::VectorXd eta = design * gamma;
    // r - p written as r (1 - p) - (1 - r) p keeps precision when p is near 1.
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = phi(eta(i)), q = phi(-eta(i));
      residual(i) = trim_weights(i) * (responses(i) * q - (1.0 - responses(i)) * p);
      curvature(i) = trim_weights(i) * p * q;
    }
    gradient = design.transpose() * residual;
    neg_hessian = design.transpose() * curvature.asDiagonal() * design;
  };

  Eigen::VectorXd gradient;
  Eigen::MatrixXd neg_hessian;
  evaluate(fit.gamma, gradient, neg_hessian);
  fit.objective = fractional_logistic_objective(design, responses, trim_weights, fit.gamma);
  for (int it = 0;; ++it) {
    fit.n_iterations = it;
    fit.final_gradient_norm = gradient.lpNorm<Eigen::Infinity>();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hessian);
    Eigen::VectorXd step = ldlt.solve(gradient);
    if (ldlt.info() != Eigen::Success || !step.allFinite())
      step = neg_hessian.completeOrthogonalDecomposition().solve(gradient);
    // A vanishing gradient with a non-vanishing Newton step is a likelihood
    // still rising towards infinity, not a maximum.
    if (fit.final_gradient_norm < options.tolerance &&
        step.lpNorm<Eigen::Infinity>() <= step_tolerance * (1.0 + fit.gamma.lpNorm<Eigen::Infinity>())) {
      fit.converged = true;
      break;
    }
    if (it == options.max_iterations)
      break;
    double scale = 1.0, value = 0.0;
    bool accepted = false;
    Eigen::VectorXd candidate;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      candidate = fit.gamma + scale * step;
      value = fractional_logistic_objective(design, responses, trim_weights, candidate);
      if (std::isfinite(value) && value >= fit.objective - 1e-12 * (1.0 + std::abs(fit.objective))) {
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
    fit.gamma = candidate;
    fit.objective = value;
    evaluate(fit.gamma, gradient, neg_hessian);
    if (fit.gamma.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      fit.separation_warning = true;
      fit.n_iterations = it + 1;
      fit.final_gradient_norm = gradient.lpNorm<Eigen::Infinity>();
      break;
    }
  }
  // Also catches warm starts that are already past the bound.
  if (fit.gamma.lpNorm<Eigen::Infinity>() > options.separation_bound) {
    fit.separation_warning = true;
    fit.converged = false;
  }
  fit.neg_hessian = neg_hessian;
  return fit;
}

Eigen::VectorXd
trim_by_index_density(const Eigen::VectorXd& index_values,
                      double bandwidth,
                      const Kernel& kernel,
                      double threshold)
{
  if (!(bandwidth > 0.0))
    throw InvalidInput("bandwidth must be positive");
  if (!(threshold >= 0.0))
    throw InvalidInput("trim threshold must be non-negative");
  const auto n = index_values.size();
  Eigen::VectorXd keep = Eigen::VectorXd::Ones(n);
  if (threshold == 0.0)
    return keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    double density = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      density += kernel.scaled(index_values(j) - index_values(i), bandwidth);
    density /= static_cast<double>(n);
    keep(i) = density >= threshold ? 1.0 : 0.0;
  }
  return keep;
}

} // namespace curemix
