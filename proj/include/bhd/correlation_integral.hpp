#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "bhd/quadrature.hpp"

namespace bhd {

// Density of M = (S^2 - D^2) / 4 for independent, symmetric S and D:
//
//   w(M) = 8 * int_{x > eta} p_s(sqrt(4M + x^2)) / sqrt(4M + x^2) * p_d(x) dx,
//   eta = sqrt(max(0, -4M)).
//
// With a Gaussian p_s of variance sigma0^2 this is the ideal-LO correlation
// density. For M < 0 the 1/sqrt endpoint singularity at x = eta is removed
// by u = sqrt(x^2 + 4M), giving
//
//   w(M) = 8 * int_0^inf p_s(u) * p_d(sqrt(u^2 - 4M)) / sqrt(u^2 - 4M) du,
//
// whose integrand is smooth since u^2 - 4M >= 4|M| > 0. For M > 0 the direct
// form has no singularity. M = 0 diverges logarithmically and is rejected.
struct CorrelationIntegralOptions {
  double s_support = 12.0;  // p_s vanishes beyond this |s|
  double d_support = 12.0;  // p_d vanishes beyond this |x|
  // Nonnegative kink locations of p_s and p_d (e.g. interpolation knots);
  // mapped into the integration variable and used as panel breakpoints.
  std::span<const double> s_breaks{};
  std::span<const double> d_breaks{};
  QuadratureOptions quadrature{};
};

namespace detail {

inline std::vector<double> merge_breaks(double lo, double hi, std::vector<double> pts, int panels) {
  for (int i = 0; i <= panels; ++i) pts.push_back(lo + (hi - lo) * i / panels);
  std::erase_if(pts, [&](double p) { return !(p >= lo && p <= hi); });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace detail

template <class PS, class PD>
QuadratureResult correlation_integral(double m, PS&& p_s, PD&& p_d,
                                      const CorrelationIntegralOptions& opt = {}) {
  if (m == 0.0 || !std::isfinite(m))
    throw std::invalid_argument("correlation_integral: M must be finite and nonzero");
  QuadratureResult r;
  std::vector<double> pts;
  if (m < 0.0) {
    const double reach = opt.d_support * opt.d_support + 4.0 * m;
    if (reach <= 0.0) {
      r.converged = true;
      return r;
    }
    const double upper = std::min(opt.s_support, std::sqrt(reach));
    for (double s : opt.s_breaks) pts.push_back(s);
    for (double x : opt.d_breaks)
      if (x * x + 4.0 * m > 0.0) pts.push_back(std::sqrt(x * x + 4.0 * m));
    auto integrand = [&](double u) {
      const double x = std::sqrt(u * u - 4.0 * m);
      return p_s(u) * p_d(x) / x;
    };
    const auto breaks = detail::merge_breaks(0.0, upper, std::move(pts), opt.quadrature.initial_panels);
    r = integrate_adaptive(integrand, std::span<const double>(breaks), opt.quadrature);
  } else {
    const double reach = opt.s_support * opt.s_support - 4.0 * m;
    if (reach <= 0.0) {
      r.converged = true;
      return r;
    }
    const double upper = std::min(opt.d_support, std::sqrt(reach));
    for (double x : opt.d_breaks) pts.push_back(x);
    for (double s : opt.s_breaks)
      if (s * s - 4.0 * m > 0.0) pts.push_back(std::sqrt(s * s - 4.0 * m));
    auto integrand = [&](double x) {
      const double s = std::sqrt(4.0 * m + x * x);
      return p_s(s) / s * p_d(x);
    };
    const auto breaks = detail::merge_breaks(0.0, upper, std::move(pts), opt.quadrature.initial_panels);
    r = integrate_adaptive(integrand, std::span<const double>(breaks), opt.quadrature);
  }
  r.value *= 8.0;
  r.error *= 8.0;
  return r;
}

// Zero-mean Gaussian density, the ideal-LO sum-current distribution.
struct GaussianDensity {
  double sigma = 1.0;
  double operator()(double s) const {
    const double z = s / sigma;
    return std::exp(-0.5 * z * z) / (sigma * 2.5066282746310002);
  }
};

}  // namespace bhd
