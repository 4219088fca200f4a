#include "bhd/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bhd {
namespace {

double end_slope(double h, double d0, double d1) {
  // Three-point one-sided estimate, limited to keep the end monotone.
  double m = (3.0 * h * d0 - h * d1) / (2.0 * h);
  if (m * d0 <= 0.0) return 0.0;
  if (d0 * d1 <= 0.0 && std::abs(m) > std::abs(3.0 * d0)) return 3.0 * d0;
  return m;
}

}  // namespace

MonotoneCubic::MonotoneCubic(const UniformAxis& axis, std::span<const double> values)
    : axis_(axis), y_(values.begin(), values.end()), slope_(values.size(), 0.0) {
  if (values.size() != axis.n) throw std::invalid_argument("MonotoneCubic: size mismatch");
  h_ = axis.width();
  x0_ = axis.center(0);
  const std::size_t n = y_.size();
  if (n < 2) return;
  std::vector<double> secant(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) secant[k] = (y_[k + 1] - y_[k]) / h_;
  if (n == 2) {
    slope_[0] = slope_[1] = secant[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double a = secant[k - 1], b = secant[k];
    slope_[k] = a * b > 0.0 ? 2.0 * a * b / (a + b) : 0.0;
  }
  slope_[0] = end_slope(h_, secant[0], secant[1]);
  slope_[n - 1] = end_slope(h_, secant[n - 2], secant[n - 3]);
}

double MonotoneCubic::operator()(double x) const {
  if (y_.empty() || !(x >= axis_.lo) || !(x <= axis_.hi)) return 0.0;
  const std::size_t n = y_.size();
  const double t_global = (x - x0_) / h_;
  if (t_global <= 0.0) return y_.front();
  if (t_global >= static_cast<double>(n - 1)) return y_.back();
  const auto k = std::min(static_cast<std::size_t>(t_global), n - 2);
  const double t = t_global - static_cast<double>(k);
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[k] + h10 * h_ * slope_[k] + h01 * y_[k + 1] + h11 * h_ * slope_[k + 1];
}

double MonotoneCubic::support_radius() const {
  return std::max(std::abs(axis_.lo), std::abs(axis_.hi));
}

std::vector<double> MonotoneCubic::abs_knots() const {
  std::vector<double> k;
  k.reserve(2 * axis_.n + 2);
  for (std::size_t i = 0; i < axis_.n; ++i) k.push_back(std::abs(axis_.center(i)));
  k.push_back(std::abs(axis_.lo));
  k.push_back(std::abs(axis_.hi));
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

}  // namespace bhd
