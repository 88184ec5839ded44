#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace curemix {

//! One censored observation.
struct Subject
{
  double time = 0.0;       // follow-up time Y = min(T, C)
  int event = 0;           // 1 when the event was observed
  std::vector<double> x;   // incidence covariates, no intercept
  std::vector<double> z;   // latency covariates
};

//! Column-oriented sample of censored observations.
//!
//! Construction validates the invariants: non-empty, finite positive
//! times, binary events, at least one observed event.
class Dataset
{
public:
  Dataset(Eigen::VectorXd time,
          Eigen::VectorXi event,
          Eigen::MatrixXd x,
          Eigen::MatrixXd z);

  static Dataset from_subjects(std::span<const Subject> subjects);

  std::size_t size() const { return static_cast<std::size_t>(time_.size()); }
  std::size_t p() const { return static_cast<std::size_t>(x_.cols()); }
  std::size_t q() const { return static_cast<std::size_t>(z_.cols()); }

  const Eigen::VectorXd& time() const { return time_; }
  const Eigen::VectorXi& event() const { return event_; }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::MatrixXd& z() const { return z_; }

  Subject subject(std::size_t i) const;
  std::size_t event_count() const;
  std::size_t censored_count() const { return size() - event_count(); }

  //! n x (p + 1) matrix with a leading column of ones.
  Eigen::MatrixXd incidence_design() const;

  //! Rows in the given order; indices may repeat (bootstrap).
  Dataset subset(std::span<const std::size_t> rows) const;

  Dataset with_latency_covariates(Eigen::MatrixXd z) const;

private:
  Eigen::VectorXd time_;
  Eigen::VectorXi event_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd z_;
};

} // namespace curemix
