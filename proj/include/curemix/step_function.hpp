#pragma once

#include <vector>

namespace curemix {

//! Right-continuous piecewise-constant function on [0, inf).
//!
//! Takes `initial_value` on [0, jump_times[0]) and `values[k]` on
//! [jump_times[k], jump_times[k+1]). Used for survival curves and
//! cumulative hazards.
class StepFunction
{
public:
  StepFunction() = default;
  StepFunction(std::vector<double> jump_times,
               std::vector<double> values,
               double initial_value);

  double operator()(double t) const;

  //! f(t) - f(t-); zero away from the jump locations.
  double jump_at(double t) const;

  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<double>& values() const { return values_; }
  double initial_value() const { return initial_value_; }
  bool empty() const { return jump_times_.empty(); }
  double last_jump_time() const;

  //! Starts at 1, non-increasing, values in [0, 1].
  bool is_survival(double tol = 1e-12) const;
  //! Starts at 0, non-decreasing.
  bool is_cumulative_hazard(double tol = 1e-12) const;

  bool operator==(const StepFunction&) const = default;

private:
  std::vector<double> jump_times_;
  std::vector<double> values_;
  double initial_value_ = 0.0;
};

} // namespace curemix
