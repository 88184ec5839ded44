#include "curemix/two_step.hpp"

#include "curemix/errors.hpp"
#include "curemix/logistic.hpp"
#include "curemix/survival.hpp"

#include <cmath>

namespace curemix {

TwoStepFit
fit_two_step(const Dataset& dataset,
             const Eigen::VectorXd& preliminary_gamma,
             double trim_threshold,
             std::optional<double> bandwidth_override,
             const TwoStepOptions& options)
{
  if (static_cast<std::size_t>(preliminary_gamma.size()) != dataset.p() + 1)
    throw InvalidInput("preliminary gamma must have p + 1 entries (intercept first)");
  if (!preliminary_gamma.allFinite())
    throw InvalidInput("preliminary gamma must be finite");
  if (!(trim_threshold >= 0.0))
    throw InvalidInput("trim threshold must be non-negative");

  TwoStepFit fit;
  fit.preliminary_gamma = preliminary_gamma;
  const Eigen::MatrixXd design = dataset.incidence_design();
  const Eigen::VectorXd index = design * preliminary_gamma;
  const auto n = index.size();

  if (bandwidth_override) {
    if (!(*bandwidth_override > 0.0) || !std::isfinite(*bandwidth_override))
      throw InvalidInput("bandwidth override must be positive and finite");
    fit.bandwidth = *bandwidth_override;
  } else {
    const auto grid = options.bandwidth_grid.empty()
                        ? default_bandwidth_grid(index, options.grid_size)
                        : options.bandwidth_grid;
    fit.bandwidth = cv_bandwidth(index, dataset.time(), dataset.event(), grid, options.selection_kernel);
    fit.diagnostics.bandwidth_from_cv = true;
  }

  const ConditionalProductLimit smoother(index, dataset.time(), dataset.event(), options.kernel);
  Eigen::VectorXd usable = Eigen::VectorXd::Ones(n);
  fit.pi_hat.resize(n);
  std::optional<double> plateau;
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      fit.pi_hat(i) = smoother.cure_probability(index(i), fit.bandwidth);
    } catch (const DegenerateNeighborhood&) {
      // Excluded from the projection; the placeholder keeps pi_hat in [0, 1].
      if (!plateau)
        plateau = kaplan_meier(dataset).values().back();
      fit.pi_hat(i) = *plateau;
      usable(i) = 0.0;
      ++fit.diagnostics.degenerate_neighborhoods;
    }
  }

  const Eigen::VectorXd trim =
    trim_by_index_density(index, fit.bandwidth, options.kernel, trim_threshold)
      .cwiseProduct(usable);
  fit.diagnostics.trimmed = static_cast<std::size_t>((trim.array() == 0.0).count());

  const Eigen::VectorXd responses = (1.0 - fit.pi_hat.array()).matrix();
  const auto projection = fit_fractional_logistic(design, responses, trim);
  fit.gamma = projection.gamma;
  fit.diagnostics.projection_converged = projection.converged;
  fit.diagnostics.projection_iterations = projection.n_iterations;
  fit.diagnostics.projection_separation = projection.separation_warning;

  const auto latency = refit_latency(dataset, fit.gamma, options.latency_config);
  fit.beta = latency.beta;
  fit.baseline_cum_hazard = latency.baseline_cum_hazard;
  fit.diagnostics.latency_converged = latency.converged;
  fit.diagnostics.latency_iterations = latency.n_iterations;
  fit.diagnostics.latency_diagnostics = latency.diagnostics;
  return fit;
}

TwoStepFit
fit_two_step(const Dataset& dataset,
             const MixtureCureFit& preliminary,
             double trim_threshold,
             std::optional<double> bandwidth_override,
             const TwoStepOptions& options)
{
  auto fit = fit_two_step(dataset, preliminary.gamma, trim_threshold, bandwidth_override, options);
  fit.diagnostics.preliminary_converged = preliminary.converged;
  fit.diagnostics.preliminary_iterations = preliminary.n_iterations;
  return fit;
}

TwoStepFit
two_step_with_em_preliminary(const Dataset& dataset,
                             const EmConfig& em_config,
                             double trim_threshold,
                             std::optional<double> bandwidth_override)
{
  const auto preliminary = fit_em(dataset, em_config);
  TwoStepOptions options;
  options.latency_config = em_config;
  return fit_two_step(dataset, preliminary, trim_threshold, bandwidth_override, options);
}

} // namespace curemix
