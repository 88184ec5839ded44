#pragma once

namespace curemix {

//! (3/4)(1 - u^2) on [-1, 1], zero elsewhere.
double epanechnikov(double u);
//! Epanechnikov rescaled to unit variance: (3 / (4 sqrt5)) (1 - u^2 / 5) on [-sqrt5, sqrt5].
double epanechnikov_unit_variance(double u);

//! Symmetric probability density with compact support.
class Kernel
{
public:
  using Function = double (*)(double);

  constexpr Kernel(Function f, double support_radius)
    : f_(f)
    , radius_(support_radius)
  {
  }

  double operator()(double u) const { return f_(u); }
  double evaluate(double u) const { return f_(u); }
  //! k_b(u) = k(u / b) / b
  double scaled(double u, double bandwidth) const
  {
    return f_(u / bandwidth) / bandwidth;
  }
  double support_radius() const { return radius_; }

  static Kernel epanechnikov() { return Kernel(&curemix::epanechnikov, 1.0); }
  static Kernel epanechnikov_unit_variance();

private:
  Function f_;
  double radius_;
};

} // namespace curemix
