#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/hermite.hpp>

namespace oracle {

// Fock-n quadrature density for sigma0 = 1 via physicists' Hermite
// polynomials: p(x) = |psi_n(x / sqrt 2)|^2 / sqrt 2.
inline double fock_pdf(unsigned n, double x) {
  const double q = x / std::numbers::sqrt2;
  const double h = boost::math::hermite(n, q);
  const double norm = std::ldexp(1.0, static_cast<int>(n)) * boost::math::factorial<double>(n) *
                      std::sqrt(std::numbers::pi);
  return h * h * std::exp(-q * q) / norm / std::numbers::sqrt2;
}

inline double poisson(double mu, unsigned n) {
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

inline double prcs_pdf(double mu, double x) {
  double p = 0.0;
  for (unsigned n = 0; n <= 60; ++n) p += poisson(mu, n) * fock_pdf(n, x);
  return p;
}

inline double vacuum_w0(double m) {
  return 2.0 / std::numbers::pi * std::cyl_bessel_k(0.0, 2.0 * std::abs(m));
}

// Raw one-sided form with eta = sqrt(max(0, -4M)), sigma0 = 1. The first
// piece carries the 1/sqrt endpoint singularity and goes to tanh-sinh; the
// rest are split at `kinks` (where p_d is only piecewise smooth).
template <class PD>
double raw_w0(double m, PD&& p_d, std::vector<double> kinks = {}) {
  const double eta = std::sqrt(std::max(0.0, -4.0 * m));
  const double top = 14.0;
  auto f = [&](double x) {
    const double s2 = 4.0 * m + x * x;
    if (s2 <= 0.0) return 0.0;
    return std::exp(-0.5 * s2) / std::sqrt(s2) * p_d(x);
  };
  std::vector<double> pts{eta};
  for (double k : kinks)
    if (k > eta && k < top) pts.push_back(k);
  if (kinks.empty()) pts.push_back(eta + 1.0);
  pts.push_back(top);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double sum = 0.0;
  if (m < 0.0) {
    boost::math::quadrature::tanh_sinh<double> ts(15);
    // Two-argument form: near the left end xc = eta - x exactly, which keeps
    // 4M + x^2 = (x - eta)(x + eta) accurate where it vanishes.
    auto g = [&](double x, double xc) {
      const double gap = xc < 0.0 ? -xc : x - eta;
      const double s2 = gap * (x + eta);
      if (s2 <= 0.0) return 0.0;
      return std::exp(-0.5 * s2) / std::sqrt(s2) * p_d(x);
    };
    sum += ts.integrate(g, pts[0], pts[1], 1e-14);
  } else {
    sum += GK::integrate(f, pts[0], pts[1], 25, 1e-14);
  }
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) sum += GK::integrate(f, pts[i], pts[i + 1], 10, 1e-14);
  return 8.0 / std::sqrt(2.0 * std::numbers::pi) * sum;
}

}  // namespace oracle
