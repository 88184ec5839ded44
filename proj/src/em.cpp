#include "curemix/em.hpp"

#include "curemix/cox.hpp"
#include "curemix/errors.hpp"
#include "curemix/logistic.hpp"

#include <algorithm>
#include <cmath>

namespace curemix {

void
EmConfig::validate() const
{
  if (max_iterations <= 0 || !(param_tolerance > 0.0) || !(clamp_epsilon > 0.0) ||
      clamp_epsilon >= 0.5)
    throw InvalidInput("EM configuration values must be positive");
}

std::string
to_string(Diagnostic d)
{
  switch (d) {
    case Diagnostic::logistic_separation:
      return "logistic_separation";
    case Diagnostic::cox_separation:
      return "cox_separation";
    case Diagnostic::cox_divergence:
      return "cox_divergence";
  }
  return "unknown";
}

namespace {

void
check_dimensions(const Eigen::VectorXd& gamma, const Eigen::VectorXd& beta, const Dataset& data)
{
  if (static_cast<std::size_t>(gamma.size()) != data.p() + 1)
    throw InvalidInput("gamma must have p + 1 entries (intercept first)");
  if (static_cast<std::size_t>(beta.size()) != data.q())
    throw InvalidInput("beta must have q entries");
}

double
clamp_probability(double p, double eps)
{
  return std::clamp(p, eps, 1.0 - eps);
}

} // namespace

Eigen::VectorXd
e_step(const Eigen::VectorXd& gamma,
       const Eigen::VectorXd& beta,
       const StepFunction& baseline_cum_hazard,
       const Dataset& dataset,
       double clamp_epsilon)
{
  check_dimensions(gamma, beta, dataset);
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::VectorXd incidence = dataset.incidence_design() * gamma;
  const Eigen::VectorXd latency = dataset.z() * beta;
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dataset.event()(i) == 1) {
      w(i) = 1.0;
      continue;
    }
    const double p = clamp_probability(phi(incidence(i)), clamp_epsilon);
    const double s = latency_survival(baseline_cum_hazard, latency(i), dataset.time()(i));
    w(i) = p * s / (1.0 - p + p * s);
  }
  return w;
}

double
observed_loglik(const Eigen::VectorXd& gamma,
                const Eigen::VectorXd& beta,
                const StepFunction& baseline_cum_hazard,
                const Dataset& dataset,
                double clamp_epsilon)
{
  check_dimensions(gamma, beta, dataset);
  const auto n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::VectorXd incidence = dataset.incidence_design() * gamma;
  const Eigen::VectorXd latency = dataset.z() * beta;
  double value = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = dataset.time()(i);
    const double p = clamp_probability(phi(incidence(i)), clamp_epsilon);
    const double s = latency_survival(baseline_cum_hazard, latency(i), t);
    if (dataset.event()(i) == 1) {
      const double hazard = baseline_cum_hazard.jump_at(t) * std::exp(latency(i));
      value += std::log(p) + std::log(std::max(hazard * s, clamp_epsilon));
    } else {
      value += std::log(std::max(1.0 - p + p * s, clamp_epsilon));
    }
  }
  return value;
}

namespace {

struct EmState
{
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  StepFunction baseline;
};

double
relative_change(const EmState& before, const EmState& after)
{
  double delta = 0.0, scale = 1.0;
  for (Eigen::Index k = 0; k < before.gamma.size(); ++k) {
    delta = std::max(delta, std::abs(after.gamma(k) - before.gamma(k)));
    scale = std::max(scale, std::abs(before.gamma(k)));
  }
  for (Eigen::Index k = 0; k < before.beta.size(); ++k) {
    delta = std::max(delta, std::abs(after.beta(k) - before.beta(k)));
    scale = std::max(scale, std::abs(before.beta(k)));
  }
  return delta / scale;
}

void
add_diagnostic(std::vector<Diagnostic>& list, Diagnostic d)
{
  if (std::find(list.begin(), list.end(), d) == list.end())
    list.push_back(d);
}

// Breslow estimate among observed events only (w = delta) at beta = 0.
StepFunction
initial_baseline(const Dataset& data)
{
  const Eigen::VectorXd delta = data.event().cast<double>();
  const CoxPartialLikelihood lik(
    data.time(), data.event(), data.z(), delta, Eigen::VectorXd::Zero(data.size()));
  return lik.breslow(Eigen::VectorXd::Zero(data.q()));
}

MixtureCureFit
run_em(const Dataset& data, EmState state, bool update_incidence, const EmConfig& config,
       std::vector<Diagnostic> diagnostics)
{
  const Eigen::MatrixXd design = data.incidence_design();
  const auto n = static_cast<Eigen::Index>(data.size());
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  MixtureCureFit fit;
  fit.observed_loglik_trace.push_back(
    observed_loglik(state.gamma, state.beta, state.baseline, data, config.clamp_epsilon));

  for (int it = 1; it <= config.max_iterations; ++it) {
    const Eigen::VectorXd w =
      e_step(state.gamma, state.beta, state.baseline, data, config.clamp_epsilon);

    EmState next = state;
    bool separated = false;
    if (update_incidence) {
      LogisticOptions lo;
      lo.start = state.gamma;
      const auto lf = fit_fractional_logistic(design, w, ones, lo);
      if (lf.separation_warning) {
        add_diagnostic(diagnostics, Diagnostic::logistic_separation);
        separated = true;
      }
      next.gamma = lf.gamma;
    }

    Eigen::VectorXd case_weights(n), offsets(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      case_weights(i) = w(i) > 0.0 ? 1.0 : 0.0;
      offsets(i) = w(i) > 0.0 ? std::log(w(i)) : 0.0;
    }
    CoxOptions co;
    co.start = state.beta;
    try {
      const auto cf = fit_cox(data.time(), data.event(), data.z(), case_weights, offsets, co);
      if (cf.separation_warning) {
        add_diagnostic(diagnostics, Diagnostic::cox_separation);
        separated = true;
      }
      next.beta = cf.beta;
      next.baseline = cf.baseline_cum_hazard;
    } catch (const DivergenceError&) {
      add_diagnostic(diagnostics, Diagnostic::cox_divergence);
      fit.n_iterations = it;
      break;
    }

    const double change = relative_change(state, next);
    state = std::move(next);
    fit.n_iterations = it;
    fit.observed_loglik_trace.push_back(
      observed_loglik(state.gamma, state.beta, state.baseline, data, config.clamp_epsilon));
    if (!state.gamma.allFinite() || !state.beta.allFinite())
      break;
    // A small relative change while an M-step drifts past the separation
    // bound is a slow divergence, not a fixed point.
    if (change < config.param_tolerance) {
      fit.converged = !separated;
      break;
    }
  }
  fit.gamma = std::move(state.gamma);
  fit.beta = std::move(state.beta);
  fit.baseline_cum_hazard = std::move(state.baseline);
  fit.diagnostics = std::move(diagnostics);
  return fit;
}

void
check_em_inputs(const Dataset& data, const EmConfig& config)
{
  config.validate();
  if (data.censored_count() == 0)
    throw InvalidInput("mixture cure fit needs at least one censored subject");
}

} // namespace

MixtureCureFit
fit_em(const Dataset& dataset, const EmConfig& config)
{
  check_em_inputs(dataset, config);
  std::vector<Diagnostic> diagnostics;
  const Eigen::VectorXd delta = dataset.event().cast<double>();
  const auto start = fit_fractional_logistic(
    dataset.incidence_design(), delta, Eigen::VectorXd::Ones(dataset.size()));
  if (start.separation_warning)
    add_diagnostic(diagnostics, Diagnostic::logistic_separation);
  EmState state{ start.gamma, Eigen::VectorXd::Zero(dataset.q()), initial_baseline(dataset) };
  return run_em(dataset, std::move(state), true, config, std::move(diagnostics));
}

MixtureCureFit
refit_latency(const Dataset& dataset, const Eigen::VectorXd& gamma_fixed, const EmConfig& config)
{
  check_em_inputs(dataset, config);
  if (static_cast<std::size_t>(gamma_fixed.size()) != dataset.p() + 1)
    throw InvalidInput("gamma must have p + 1 entries (intercept first)");
  if (!gamma_fixed.allFinite())
    throw InvalidInput("fixed gamma must be finite");
  EmState state{ gamma_fixed, Eigen::VectorXd::Zero(dataset.q()), initial_baseline(dataset) };
  return run_em(dataset, std::move(state), false, config, {});
}

} // namespace curemix
