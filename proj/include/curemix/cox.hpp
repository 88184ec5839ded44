#pragma once

#include "curemix/dataset.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace curemix {

struct CoxOptions
{
  int max_iterations = 100;
  double tolerance = 1e-8;      // gradient infinity-norm
  int max_halvings = 30;
  double separation_bound = 50; // |beta| beyond this flags monotone likelihood
  std::optional<Eigen::VectorXd> start;
};

struct CoxFit
{
  Eigen::VectorXd beta;
  StepFunction baseline_cum_hazard;
  int n_iterations = 0;
  bool converged = false;
  double final_gradient_norm = 0.0;
  double log_partial_likelihood = 0.0;
  bool separation_warning = false;
};

//! Weighted Breslow log partial likelihood
//!   sum_i d_i w_i [eta_i - log sum_{Y_j >= Y_i} w_j exp(eta_j)],
//! eta = z beta + offset. Subjects with zero weight are dropped.
class CoxPartialLikelihood
{
public:
  CoxPartialLikelihood(const Eigen::VectorXd& times,
                       const Eigen::VectorXi& events,
                       const Eigen::MatrixXd& z,
                       const Eigen::VectorXd& weights,
                       const Eigen::VectorXd& offsets);

  struct Derivatives
  {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd neg_hessian;
  };

  double value(const Eigen::VectorXd& beta) const;
  Derivatives derivatives(const Eigen::VectorXd& beta) const;
  //! Weighted Breslow estimator of the baseline cumulative hazard.
  StepFunction breslow(const Eigen::VectorXd& beta) const;

  std::size_t dimension() const { return static_cast<std::size_t>(z_.cols()); }
  bool has_weighted_event() const;

private:
  // Compact copy of the positive-weight subjects sorted by time.
  Eigen::VectorXd time_;
  Eigen::VectorXi event_;
  Eigen::MatrixXd z_;
  Eigen::VectorXd weight_;
  Eigen::VectorXd offset_;
  std::vector<Eigen::Index> group_end_; // exclusive ends of tied-time groups
};

CoxFit fit_cox(const Dataset& dataset,
               const Eigen::VectorXd& case_weights,
               const Eigen::VectorXd& offsets,
               const CoxOptions& options = {});

CoxFit fit_cox(const Eigen::VectorXd& times,
               const Eigen::VectorXi& events,
               const Eigen::MatrixXd& z,
               const Eigen::VectorXd& case_weights,
               const Eigen::VectorXd& offsets,
               const CoxOptions& options = {});

//! exp(-Lambda0(t) exp(linear_predictor)), completed by zero strictly after
//! the last jump of the baseline.
double latency_survival(const StepFunction& baseline_cum_hazard,
                        double linear_predictor,
                        double t);

double uncured_survival(const CoxFit& fit, double t, const Eigen::VectorXd& z);

} // namespace curemix
