#pragma once

#include "curemix/dataset.hpp"
#include "curemix/em.hpp"
#include "curemix/kernel.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace curemix {

struct TwoStepOptions
{
  EmConfig latency_config{};
  std::size_t grid_size = 30;
  //! Overrides the default log-spaced grid when non-empty.
  std::vector<double> bandwidth_grid;
  //! Smoothing kernel of the cure-probability estimator.
  Kernel kernel = Kernel::epanechnikov();
  //! Kernel of the cross-validation criterion. Bandwidths are selected on the
  //! unit-variance scale and then used as-is with `kernel`.
  Kernel selection_kernel = Kernel::epanechnikov_unit_variance();
};

struct TwoStepDiagnostics
{
  bool preliminary_converged = true;
  int preliminary_iterations = 0;
  bool bandwidth_from_cv = false;
  std::size_t degenerate_neighborhoods = 0;
  std::size_t trimmed = 0; // subjects with zero trim weight
  bool projection_converged = false;
  int projection_iterations = 0;
  bool projection_separation = false;
  bool latency_converged = false;
  int latency_iterations = 0;
  std::vector<Diagnostic> latency_diagnostics;
};

struct TwoStepFit
{
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  StepFunction baseline_cum_hazard;
  Eigen::VectorXd preliminary_gamma;
  double bandwidth = 0.0;
  //! Nonparametric cure probability of each subject.
  Eigen::VectorXd pi_hat;
  TwoStepDiagnostics diagnostics;

  CureModelParameters parameters() const { return { gamma, beta, baseline_cum_hazard }; }
};

//! Presmoothed estimator: smooth the cure status on the preliminary index
//! gamma_tilde'(1, x), project the smoothed cure probabilities onto the
//! logistic family, then refit the latency with gamma fixed.
TwoStepFit fit_two_step(const Dataset& dataset,
                        const Eigen::VectorXd& preliminary_gamma,
                        double trim_threshold = 0.0,
                        std::optional<double> bandwidth_override = std::nullopt,
                        const TwoStepOptions& options = {});

TwoStepFit fit_two_step(const Dataset& dataset,
                        const MixtureCureFit& preliminary,
                        double trim_threshold = 0.0,
                        std::optional<double> bandwidth_override = std::nullopt,
                        const TwoStepOptions& options = {});

//! fit_em() followed by fit_two_step(); the EM config also drives the latency refit.
TwoStepFit two_step_with_em_preliminary(const Dataset& dataset,
                                        const EmConfig& em_config = {},
                                        double trim_threshold = 0.0,
                                        std::optional<double> bandwidth_override = std::nullopt);

} // namespace curemix
