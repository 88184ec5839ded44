#pragma once

#include "curemix/dataset.hpp"
#include "curemix/kernel.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace curemix {

//! Product-limit survival estimate. Ties among event times form one factor;
//! a subject censored at an event time stays in that event's risk set.
StepFunction kaplan_meier(const Dataset& dataset);
StepFunction kaplan_meier(const Eigen::VectorXd& times,
                          const Eigen::VectorXi& events);

//! Kernel-weighted product-limit estimator of S(t | index = u).
//!
//! The sample is sorted once; each evaluation is linear in n. Jumps are
//! placed at every distinct observed event time, so with constant index
//! values the result coincides with kaplan_meier().
class ConditionalProductLimit
{
public:
  ConditionalProductLimit(Eigen::VectorXd index,
                          const Eigen::VectorXd& times,
                          const Eigen::VectorXi& events,
                          Kernel kernel = Kernel::epanechnikov());

  //! Throws DegenerateNeighborhood when every weight vanishes at u.
  StepFunction survival(double u, double bandwidth) const;

  //! Survival at the largest observed event time, clamped into [0, 1].
  double cure_probability(double u, double bandwidth) const;

  std::size_t size() const { return static_cast<std::size_t>(index_.size()); }
  double last_event_time() const;

private:
  // Fills group_weight_/event_weight_ and returns the total weight.
  double accumulate(double u, double bandwidth) const;

  Eigen::VectorXd index_;
  Kernel kernel_;
  // Subjects grouped by distinct observed time, ascending.
  std::vector<double> group_time_;
  std::vector<std::size_t> group_begin_;    // into member_ (size groups+1)
  std::vector<std::size_t> member_;         // subject ids
  std::vector<int> member_event_;
  std::vector<bool> group_has_event_;
  std::size_t last_event_group_ = 0;
  mutable std::vector<double> group_weight_;
  mutable std::vector<double> event_weight_;
};

StepFunction beran_survival(const Eigen::VectorXd& index_values,
                            const Eigen::VectorXd& times,
                            const Eigen::VectorXi& events,
                            double u,
                            double bandwidth,
                            const Kernel& kernel = Kernel::epanechnikov());

//! Beran estimate of the cure probability: the conditional survival at the
//! last observed event time.
double nonparametric_cure_prob(const Eigen::VectorXd& index_values,
                               const Eigen::VectorXd& times,
                               const Eigen::VectorXi& events,
                               double u,
                               double bandwidth,
                               const Kernel& kernel = Kernel::epanechnikov());

//! Leave-one-out least-squares cross-validation score for the conditional
//! distribution of Y given the index, summed over observed event times.
//! Returns +inf when some subject has an empty leave-one-out window.
double cv_score(const Eigen::VectorXd& index_values,
                const Eigen::VectorXd& times,
                const Eigen::VectorXi& events,
                double bandwidth,
                const Kernel& kernel = Kernel::epanechnikov());

//! Grid value minimising cv_score(); ties go to the smaller bandwidth.
double cv_bandwidth(const Eigen::VectorXd& index_values,
                    const Eigen::VectorXd& times,
                    const Eigen::VectorXi& events,
                    const std::vector<double>& grid,
                    const Kernel& kernel = Kernel::epanechnikov());

//! `count` log-spaced values from 0.05 sd(index) n^(-1/5) up to the index range.
std::vector<double> default_bandwidth_grid(const Eigen::VectorXd& index_values,
                                           std::size_t count = 30);

} // namespace curemix
