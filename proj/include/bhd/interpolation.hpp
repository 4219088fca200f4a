#pragma once

#include <span>
#include <vector>

#include "bhd/axis.hpp"

namespace bhd {

// Monotone piecewise-cubic Hermite interpolant (Fritsch-Butland slopes) on
// the bin centers of a uniform axis. Between the outermost centers and the
// axis edges the end value is held; outside the axis the interpolant is 0.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(const UniformAxis& axis, std::span<const double> values);

  double operator()(double x) const;

  const UniformAxis& axis() const { return axis_; }
  // Largest |x| at which the interpolant can be nonzero.
  double support_radius() const;
  // Sorted |x| of every point where the interpolant may have a kink.
  std::vector<double> abs_knots() const;

 private:
  UniformAxis axis_;
  std::vector<double> y_;
  std::vector<double> slope_;
  double h_ = 1.0;
  double x0_ = 0.0;
};

}  // namespace bhd
