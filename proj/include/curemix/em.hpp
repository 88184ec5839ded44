#pragma once

#include "curemix/dataset.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace curemix {

struct EmConfig
{
  int max_iterations = 500;
  double param_tolerance = 1e-7; // ||delta theta||_inf / max(1, ||theta||_inf)
  double clamp_epsilon = 1e-10;

  void validate() const;
};

//! Structural problems met while fitting; attached to fits, never thrown.
enum class Diagnostic
{
  logistic_separation,
  cox_separation,
  cox_divergence,
};

std::string to_string(Diagnostic d);

//! (gamma, beta, Lambda0) of a logistic-Cox mixture cure model.
//! gamma carries the intercept first.
struct CureModelParameters
{
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  StepFunction baseline_cum_hazard;
};

struct MixtureCureFit
{
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  StepFunction baseline_cum_hazard;
  bool converged = false;
  int n_iterations = 0;
  //! Observed-data log-likelihood at the start point and after each iteration.
  std::vector<double> observed_loglik_trace;
  std::vector<Diagnostic> diagnostics;

  CureModelParameters parameters() const { return { gamma, beta, baseline_cum_hazard }; }
};

//! Posterior probability of being uncured:
//!   w = d + (1 - d) phi S_u / (1 - phi + phi S_u).
Eigen::VectorXd e_step(const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& beta,
                       const StepFunction& baseline_cum_hazard,
                       const Dataset& dataset,
                       double clamp_epsilon = 1e-10);

//! Mixture log-likelihood with f_u = (Breslow jump) x exp(beta'z) x S_u at
//! event times and the zero-tail completion for S_u.
double observed_loglik(const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& beta,
                       const StepFunction& baseline_cum_hazard,
                       const Dataset& dataset,
                       double clamp_epsilon = 1e-10);

//! EM maximum likelihood for the logistic-Cox mixture cure model.
//! Non-convergence is reported through `converged`, not thrown.
MixtureCureFit fit_em(const Dataset& dataset, const EmConfig& config = {});

//! EM over (beta, Lambda0) only, with gamma held at `gamma_fixed`.
MixtureCureFit refit_latency(const Dataset& dataset,
                             const Eigen::VectorXd& gamma_fixed,
                             const EmConfig& config = {});

} // namespace curemix
