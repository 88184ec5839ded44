#pragma once

#include "curemix/kernel.hpp"

#include <Eigen/Dense>

#include <optional>

namespace curemix {

//! Logistic function e^u / (1 + e^u), evaluated without overflow.
double phi(double u);
//! log phi(u) and log(1 - phi(u)), accurate in both tails.
double log_phi(double u);
double log_one_minus_phi(double u);

struct LogisticOptions
{
  int max_iterations = 200;
  double tolerance = 1e-10; // gradient infinity-norm
  int max_halvings = 30;
  double separation_bound = 50;
  std::optional<Eigen::VectorXd> start;
};

struct LogisticFit
{
  Eigen::VectorXd gamma;
  bool converged = false;
  int n_iterations = 0;
  Eigen::MatrixXd neg_hessian;
  double objective = 0.0;
  double final_gradient_norm = 0.0;
  bool separation_warning = false;
};

//! sum_i trim_i [r_i log phi(x_i'gamma) + (1 - r_i) log(1 - phi(x_i'gamma))]
double fractional_logistic_objective(const Eigen::MatrixXd& design,
                                     const Eigen::VectorXd& responses,
                                     const Eigen::VectorXd& trim_weights,
                                     const Eigen::VectorXd& gamma);

Eigen::VectorXd fractional_logistic_gradient(const Eigen::MatrixXd& design,
                                             const Eigen::VectorXd& responses,
                                             const Eigen::VectorXd& trim_weights,
                                             const Eigen::VectorXd& gamma);

//! Maximises the fractional-response logistic objective by Newton-Raphson
//! with step-halving. Responses may be any values in [0, 1].
//! Throws SingularDesign when the design restricted to rows with positive
//! trim weight is rank deficient.
LogisticFit fit_fractional_logistic(const Eigen::MatrixXd& design,
                                    const Eigen::VectorXd& responses,
                                    const Eigen::VectorXd& trim_weights,
                                    const LogisticOptions& options = {});

//! 1{f_hat(index_i) >= threshold} with f_hat the kernel density estimate of
//! the index evaluated at each subject's own index value.
Eigen::VectorXd trim_by_index_density(const Eigen::VectorXd& index_values,
                                      double bandwidth,
                                      const Kernel& kernel,
                                      double threshold);

} // namespace curemix
