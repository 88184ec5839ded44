#include "curemix/kernel.hpp"

#include <cmath>

namespace curemix {

double
epanechnikov(double u)
{
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

double
epanechnikov_unit_variance(double u)
{
  const double s5 = std::sqrt(5.0);
  return std::abs(u) <= s5 ? 0.75 / s5 * (1.0 - u * u / 5.0) : 0.0;
}

Kernel
Kernel::epanechnikov_unit_variance()
{
  return Kernel(&curemix::epanechnikov_unit_variance, std::sqrt(5.0));
}

} // namespace curemix
