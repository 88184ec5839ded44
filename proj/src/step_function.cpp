#include "curemix/step_function.hpp"

#include "curemix/errors.hpp"

#include <algorithm>

namespace curemix {

StepFunction::StepFunction(std::vector<double> jump_times,
                           std::vector<double> values,
                           double initial_value)
  : jump_times_(std::move(jump_times))
  , values_(std::move(values))
  , initial_value_(initial_value)
{
  if (jump_times_.size() != values_.size())
    throw InvalidInput("step function needs one value per jump time");
  for (std::size_t k = 1; k < jump_times_.size(); ++k)
    if (!(jump_times_[k] > jump_times_[k - 1]))
      throw InvalidInput("step function jump times must increase strictly");
}

double
StepFunction::operator()(double t) const
{
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.begin())
    return initial_value_;
  return values_[static_cast<std::size_t>(it - jump_times_.begin()) - 1];
}

double
StepFunction::jump_at(double t) const
{
  const auto it = std::lower_bound(jump_times_.begin(), jump_times_.end(), t);
  if (it == jump_times_.end() || *it != t)
    return 0.0;
  const auto k = static_cast<std::size_t>(it - jump_times_.begin());
  const double before = k == 0 ? initial_value_ : values_[k - 1];
  return values_[k] - before;
}

double
StepFunction::last_jump_time() const
{
  if (jump_times_.empty())
    throw InvalidInput("step function has no jumps");
  return jump_times_.back();
}

bool
StepFunction::is_survival(double tol) const
{
  if (initial_value_ != 1.0)
    return false;
  double prev = initial_value_;
  for (double v : values_) {
    if (v > prev + tol || v < -tol || v > 1.0 + tol)
      return false;
    prev = v;
  }
  return true;
}

bool
StepFunction::is_cumulative_hazard(double tol) const
{
  if (initial_value_ != 0.0)
    return false;
  double prev = initial_value_;
  for (double v : values_) {
    if (v < prev - tol)
      return false;
    prev = v;
  }
  return true;
}

} // namespace curemix
