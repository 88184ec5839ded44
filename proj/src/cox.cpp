#include "curemix/cox.hpp"

#include "curemix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace curemix {

CoxPartialLikelihood::CoxPartialLikelihood(const Eigen::VectorXd& times,
                                           const Eigen::VectorXi& events,
                                           const Eigen::MatrixXd& z,
                                           const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& offsets)
{
  const auto n = times.size();
  if (events.size() != n || z.rows() != n || weights.size() != n || offsets.size() != n)
    throw InvalidInput("Cox inputs differ in length");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (weights(i) < 0.0 || !std::isfinite(weights(i)))
      throw InvalidInput("case weights must be finite and non-negative");
    if (weights(i) > 0.0)
      keep.push_back(i);
  }
  std::stable_sort(keep.begin(), keep.end(), [&](Eigen::Index a, Eigen::Index b) {
    return times(a) < times(b);
  });
  const auto m = static_cast<Eigen::Index>(keep.size());
  time_.resize(m);
  event_.resize(m);
  z_.resize(m, z.cols());
  weight_.resize(m);
  offset_.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = keep[static_cast<std::size_t>(k)];
    time_(k) = times(i);
    event_(k) = events(i);
    z_.row(k) = z.row(i);
    weight_(k) = weights(i);
    offset_(k) = offsets(i);
  }
  if (!offset_.allFinite())
    throw InvalidInput("offsets of positive-weight subjects must be finite");
  for (Eigen::Index k = 0; k < m; ++k)
    if (k + 1 == m || time_(k + 1) != time_(k))
      group_end_.push_back(k + 1);
}

bool
CoxPartialLikelihood::has_weighted_event() const
{
  return (event_.array() == 1).any();
}

double
CoxPartialLikelihood::value(const Eigen::VectorXd& beta) const
{
  const Eigen::VectorXd eta = z_ * beta + offset_;
  if (eta.size() == 0)
    return 0.0;
  const double shift = eta.maxCoeff();
  double risk = 0.0, value = 0.0;
  // Groups are visited from the latest time so risk sets only grow.
  for (std::size_t g = group_end_.size(); g-- > 0;) {
    const Eigen::Index begin = g == 0 ? 0 : group_end_[g - 1];
    const Eigen::Index end = group_end_[g];
    double d = 0.0, d_eta = 0.0;
    for (Eigen::Index k = begin; k < end; ++k) {
      risk += weight_(k) * std::exp(eta(k) - shift);
      if (event_(k) == 1) {
        d += weight_(k);
        d_eta += weight_(k) * eta(k);
      }
    }
    if (d > 0.0)
      value += d_eta - d * (std::log(risk) + shift);
  }
  return value;
}

CoxPartialLikelihood::Derivatives
CoxPartialLikelihood::derivatives(const Eigen::VectorXd& beta) const
{
  const auto q = z_.cols();
  Derivatives out;
  out.gradient = Eigen::VectorXd::Zero(q);
  out.neg_hessian = Eigen::MatrixXd::Zero(q, q);
  const Eigen::VectorXd eta = z_ * beta + offset_;
  if (eta.size() == 0)
    return out;
  const double shift = eta.maxCoeff();
  // Running weighted mean and centred scatter of z over the risk set; the
  // raw second moment loses the variance once one subject dominates.
  double s0 = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(q, q);
  Eigen::VectorXd delta(q);
  for (std::size_t g = group_end_.size(); g-- > 0;) {
    const Eigen::Index begin = g == 0 ? 0 : group_end_[g - 1];
    const Eigen::Index end = group_end_[g];
    double d = 0.0, d_eta = 0.0;
    Eigen::VectorXd d_z = Eigen::VectorXd::Zero(q);
    for (Eigen::Index k = begin; k < end; ++k) {
      const double r = weight_(k) * std::exp(eta(k) - shift);
      if (r > 0.0) {
        delta = z_.row(k).transpose() - mean;
        const double total = s0 + r;
        scatter.noalias() += (r * s0 / total) * delta * delta.transpose();
        mean = (s0 * mean + r * z_.row(k).transpose()) / total;
        s0 = total;
      }
      if (event_(k) == 1) {
        d += weight_(k);
        d_eta += weight_(k) * eta(k);
        d_z.noalias() += weight_(k) * z_.row(k).transpose();
      }
    }
    if (d > 0.0) {
      out.value += d_eta - d * (std::log(s0) + shift);
      out.gradient += d_z - d * mean;
      out.neg_hessian.noalias() += (d / s0) * scatter;
    }
  }
  return out;
}

StepFunction
CoxPartialLikelihood::breslow(const Eigen::VectorXd& beta) const
{
  const Eigen::VectorXd eta = z_ * beta + offset_;
  std::vector<double> jump_time, jump_size;
  if (eta.size() > 0) {
    const double shift = eta.maxCoeff();
    double risk = 0.0;
    for (std::size_t g = group_end_.size(); g-- > 0;) {
      const Eigen::Index begin = g == 0 ? 0 : group_end_[g - 1];
      const Eigen::Index end = group_end_[g];
      double d = 0.0;
      for (Eigen::Index k = begin; k < end; ++k) {
        risk += weight_(k) * std::exp(eta(k) - shift);
        if (event_(k) == 1)
          d += weight_(k);
      }
      if (d > 0.0) {
        jump_time.push_back(time_(begin));
        jump_size.push_back(d / risk * std::exp(-shift));
      }
    }
  }
  std::reverse(jump_time.begin(), jump_time.end());
  std::reverse(jump_size.begin(), jump_size.end());
  std::vector<double> cumulative(jump_size.size());
  std::partial_sum(jump_size.begin(), jump_size.end(), cumulative.begin());
  return StepFunction(std::move(jump_time), std::move(cumulative), 0.0);
}

namespace {

constexpr double step_tolerance = 1e-6;

Eigen::VectorXd
newton_direction(const Eigen::MatrixXd& neg_hessian, const Eigen::VectorXd& gradient)
{
  Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hessian);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    Eigen::VectorXd step = ldlt.solve(gradient);
    if (step.allFinite() && (neg_hessian * step - gradient).norm() <=
                              1e-8 * (1.0 + gradient.norm()))
      return step;
  }
  // Singular directions (e.g. a constant covariate) get no update.
  return neg_hessian.completeOrthogonalDecomposition().solve(gradient);
}

} // namespace

CoxFit
fit_cox(const Eigen::VectorXd& times,
        const Eigen::VectorXi& events,
        const Eigen::MatrixXd& z,
        const Eigen::VectorXd& case_weights,
        const Eigen::VectorXd& offsets,
        const CoxOptions& options)
{
  const CoxPartialLikelihood lik(times, events, z, case_weights, offsets);
  if (!lik.has_weighted_event())
    throw InvalidInput("Cox fit needs an observed event with positive weight");
  const auto q = z.cols();
  CoxFit fit;
  fit.beta = options.start ? *options.start : Eigen::VectorXd::Zero(q);
  if (fit.beta.size() != q)
    throw InvalidInput("Cox start vector has the wrong length");

  auto d = lik.derivatives(fit.beta);
  if (!std::isfinite(d.value))
    throw DivergenceError("Cox partial likelihood is not finite at the start point");
  for (int it = 0;; ++it) {
    fit.final_gradient_norm = q == 0 ? 0.0 : d.gradient.lpNorm<Eigen::Infinity>();
    fit.n_iterations = it;
    const Eigen::VectorXd step = newton_direction(d.neg_hessian, d.gradient);
    // Monotone likelihood: the gradient dies out while Newton keeps stepping.
    if (fit.final_gradient_norm < options.tolerance &&
        (q == 0 || step.lpNorm<Eigen::Infinity>() <= step_tolerance * (1.0 + fit.beta.lpNorm<Eigen::Infinity>()))) {
      fit.converged = true;
      break;
    }
    if (it == options.max_iterations)
      break;
    double scale = 1.0;
    bool accepted = false, any_finite = false;
    Eigen::VectorXd candidate;
    for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      candidate = fit.beta + scale * step;
      const double v = lik.value(candidate);
      if (!std::isfinite(v))
        continue;
      any_finite = true;
      if (v >= d.value - 1e-12 * (1.0 + std::abs(d.value))) {
        accepted = true;
        break;
      }
    }
    if (!any_finite)
      throw DivergenceError("Cox partial likelihood overflowed along the Newton direction");
    if (!accepted)
      break; // no ascent possible at working precision
    fit.beta = candidate;
    d = lik.derivatives(fit.beta);
    if (fit.beta.lpNorm<Eigen::Infinity>() > options.separation_bound) {
      fit.separation_warning = true;
      fit.n_iterations = it + 1;
      fit.final_gradient_norm = d.gradient.lpNorm<Eigen::Infinity>();
      break;
    }
  }
  fit.log_partial_likelihood = d.value;
  fit.baseline_cum_hazard = lik.breslow(fit.beta);
  return fit;
}

CoxFit
fit_cox(const Dataset& dataset,
        const Eigen::VectorXd& case_weights,
        const Eigen::VectorXd& offsets,
        const CoxOptions& options)
{
  return fit_cox(dataset.time(), dataset.event(), dataset.z(), case_weights, offsets, options);
}

double
latency_survival(const StepFunction& baseline_cum_hazard, double linear_predictor, double t)
{
  if (t <= 0.0)
    return 1.0;
  if (baseline_cum_hazard.empty() || t > baseline_cum_hazard.last_jump_time())
    return 0.0;
  return std::exp(-baseline_cum_hazard(t) * std::exp(linear_predictor));
}

double
uncured_survival(const CoxFit& fit, double t, const Eigen::VectorXd& z)
{
  return latency_survival(fit.baseline_cum_hazard, fit.beta.dot(z), t);
}

} // namespace curemix
