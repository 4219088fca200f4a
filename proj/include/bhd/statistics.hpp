#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bhd/axis.hpp"
#include "bhd/density.hpp"
#include "bhd/simulator.hpp"

namespace bhd {

// Default grids, in sigma0 (or sigma0^2 for M) units.
struct GridDefaults {
  static UniformAxis quadrature(double sigma0 = 1.0) { return {-8.0 * sigma0, 8.0 * sigma0, 320}; }
  static UniformAxis joint(double sigma0 = 1.0) { return {-6.0 * sigma0, 6.0 * sigma0, 160}; }
  static UniformAxis correlation(double sigma0 = 1.0) {
    return {-4.0 * sigma0 * sigma0, 4.0 * sigma0 * sigma0, 400};
  }
  static constexpr double eps0 = 0.02;
};

struct HistogramOptions {
  std::size_t min_samples = 1000;
  double max_overflow_fraction = 1e-3;
};

// Normalized histogram density. Throws NumericalError when more than
// max_overflow_fraction of the samples fall outside the axis.
Density1D estimate_density_1d(std::span<const double> samples, const UniformAxis& axis,
                              Exec exec = Exec::parallel, const HistogramOptions& opt = {});

// Standard deviation of d = i1 - i2 over vacuum records.
double estimate_sigma0(std::span<const DetectorRecord> vacuum_records, Exec exec = Exec::parallel);

Density2D joint_histogram(std::span<const DetectorRecord> records, const UniformAxis& x_axis,
                          const UniformAxis& y_axis, Exec exec = Exec::parallel,
                          const HistogramOptions& opt = {});

// Second moments of a 2D density along the diagonal (x = y) and
// anti-diagonal (x = -y) directions.
struct DiagonalVariances {
  double diagonal = 0.0;
  double anti_diagonal = 0.0;
};
DiagonalVariances diagonal_variances(const Density2D& p);

// Projection of a 2D density onto u = (x - y) / sqrt 2, on `axis`.
Density1D anti_diagonal_marginal(const Density2D& p, const UniformAxis& axis);

struct SymmetryReport {
  Density1D symmetrized;
  double asymmetry_norm = 0.0;  // 0.5 * integral |p(x) - p(-x)| dx
  bool within_noise = true;     // every bin pair within 5 standard errors
};

// Averages p(x) and p(-x). Requires an axis symmetric about zero.
SymmetryReport symmetrize(const Density1D& p, double n_sigma = 5.0);

// Density of v = x^2 as bin averages on v_axis (v_axis.lo >= 0):
// Q(v) = [P(sqrt v) + P(-sqrt v)] / (2 sqrt v). Warns when p fails the
// symmetry check, in which case the two-sided form is the meaningful one.
Density1D q_square_transform(const Density1D& p, const UniformAxis& v_axis);

// Histogram of per-record products m = i1 * i2, normalized by the record
// count. Requires >= kMinCorrelationRecords records.
inline constexpr std::size_t kMinCorrelationRecords = 100'000;
CorrelationDensity correlation_density_empirical(std::span<const DetectorRecord> records,
                                                 const UniformAxis& m_axis,
                                                 double eps0 = GridDefaults::eps0,
                                                 Exec exec = Exec::parallel,
                                                 const HistogramOptions& opt = {});

// Same density from the marginals alone:
// w(M) = 4 int Q_{S^2}(4M + v) Q_{D^2}(v) dv, evaluated through the
// substitution v = x^2 with monotone-cubic interpolants of p_s and p_d.
CorrelationDensity correlation_density_convolution(const Density1D& p_s, const Density1D& p_d,
                                                   const UniformAxis& m_axis,
                                                   double eps0 = GridDefaults::eps0,
                                                   Exec exec = Exec::parallel);

double negative_product_fraction(std::span<const DetectorRecord> records);

// Ideal-LO joint density
// P0(x, y) = 2 / sqrt(2 pi sigma0^2) exp(-(x + y)^2 / (2 sigma0^2)) P_D(x - y).
Density2D reconstruct_joint_ideal(const Density1D& p_d, double sigma0, const UniformAxis& x_axis,
                                  const UniformAxis& y_axis);

struct ReconstructOptions {
  double eps0 = GridDefaults::eps0;
  double rel_tol = 1e-7;
  double u_max = 12.0;  // in sigma0 units
  double max_tail_fraction = 1e-6;
};

// Ideal-LO correlation density from a quadrature density estimate. The
// estimate is symmetrized first. Throws NumericalError when a quadrature
// fails to converge.
CorrelationDensity reconstruct_w0(const Density1D& p_d, double sigma0, const UniformAxis& m_axis,
                                  const ReconstructOptions& opt = {}, Exec exec = Exec::parallel);

// Pointwise evaluation of the same integral for an arbitrary M != 0.
double reconstruct_w0_at(const Density1D& p_d, double sigma0, double m,
                         const ReconstructOptions& opt = {});

}  // namespace bhd
