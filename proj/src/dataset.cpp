#include "curemix/dataset.hpp"

#include "curemix/errors.hpp"

#include <cmath>
#include <string>

namespace curemix {

Dataset::Dataset(Eigen::VectorXd time,
                 Eigen::VectorXi event,
                 Eigen::MatrixXd x,
                 Eigen::MatrixXd z)
  : time_(std::move(time))
  , event_(std::move(event))
  , x_(std::move(x))
  , z_(std::move(z))
{
  const auto n = time_.size();
  if (n == 0)
    throw InvalidInput("dataset is empty");
  if (event_.size() != n || x_.rows() != n || z_.rows() != n)
    throw InvalidInput("dataset columns have inconsistent lengths");
  bool any_event = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(time_(i)) || time_(i) <= 0.0)
      throw InvalidInput("time of subject " + std::to_string(i) +
                         " must be positive and finite");
    if (event_(i) != 0 && event_(i) != 1)
      throw InvalidInput("event indicator of subject " + std::to_string(i) +
                         " must be 0 or 1");
    any_event = any_event || event_(i) == 1;
  }
  if (!any_event)
    throw InvalidInput("dataset has no observed event");
  if (!x_.allFinite() || !z_.allFinite())
    throw InvalidInput("covariates must be finite");
}

Dataset
Dataset::from_subjects(std::span<const Subject> subjects)
{
  if (subjects.empty())
    throw InvalidInput("dataset is empty");
  const auto n = static_cast<Eigen::Index>(subjects.size());
  const auto p = static_cast<Eigen::Index>(subjects.front().x.size());
  const auto q = static_cast<Eigen::Index>(subjects.front().z.size());
  Eigen::VectorXd time(n);
  Eigen::VectorXi event(n);
  Eigen::MatrixXd x(n, p);
  Eigen::MatrixXd z(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = subjects[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(s.x.size()) != p ||
        static_cast<Eigen::Index>(s.z.size()) != q)
      throw InvalidInput("subject " + std::to_string(i) +
                         " has covariate dimensions differing from subject 0");
    time(i) = s.time;
    event(i) = s.event;
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = s.x[static_cast<std::size_t>(j)];
    for (Eigen::Index j = 0; j < q; ++j)
      z(i, j) = s.z[static_cast<std::size_t>(j)];
  }
  return Dataset(std::move(time), std::move(event), std::move(x), std::move(z));
}

Subject
Dataset::subject(std::size_t i) const
{
  const auto r = static_cast<Eigen::Index>(i);
  Subject s;
  s.time = time_(r);
  s.event = event_(r);
  s.x.assign(x_.row(r).begin(), x_.row(r).end());
  s.z.assign(z_.row(r).begin(), z_.row(r).end());
  return s;
}

std::size_t
Dataset::event_count() const
{
  return static_cast<std::size_t>(event_.sum());
}

Eigen::MatrixXd
Dataset::incidence_design() const
{
  Eigen::MatrixXd design(x_.rows(), x_.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x_.cols()) = x_;
  return design;
}

Dataset
Dataset::subset(std::span<const std::size_t> rows) const
{
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd time(m);
  Eigen::VectorXi event(m);
  Eigen::MatrixXd x(m, x_.cols());
  Eigen::MatrixXd z(m, z_.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)]);
    if (r >= time_.size())
      throw InvalidInput("subset row index out of range");
    time(k) = time_(r);
    event(k) = event_(r);
    x.row(k) = x_.row(r);
    z.row(k) = z_.row(r);
  }
  return Dataset(std::move(time), std::move(event), std::move(x), std::move(z));
}

Dataset
Dataset::with_latency_covariates(Eigen::MatrixXd z) const
{
  return Dataset(time_, event_, x_, std::move(z));
}

} // namespace curemix
