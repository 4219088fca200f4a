#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bhd/axis.hpp"
#include "bhd/density.hpp"

namespace bhd {

inline constexpr int kDefaultMaxFock = 20;
inline constexpr double kMaxPoissonTail = 1e-9;

// Units of all quadrature samples: sigma0 is the vacuum standard deviation
// of the difference current.
struct QuadratureConvention {
  double sigma0 = 1.0;
};

struct Vacuum {};
struct Fock {
  int n = 0;
};
struct Coherent {
  double amplitude = 0.0;
  double phase = 0.0;
};
// Phase-randomized coherent state with mean photon number mu.
struct Prcs {
  double mu = 0.0;
};

using StateSpec = std::variant<Vacuum, Fock, Coherent, Prcs>;

void validate(const StateSpec& state, int n_max = kDefaultMaxFock);
void validate(const QuadratureConvention& conv);
std::string describe(const StateSpec& state);
// Accepts "vacuum", "fock:N", "coherent:A[:PHASE]", "prcs:MU".
StateSpec parse_state(std::string_view text);

// Normalized Hermite functions phi_0..phi_{n_max} at x (sigma0 = 1 units),
// scaled so that phi_n(x)^2 is the Fock-n quadrature density.
std::vector<double> hermite_functions(int n_max, double x);

double fock_density(int n, double x, const QuadratureConvention& conv = {});
double gaussian_density(double x, double mean, double sigma);

// PRCS density by 256-point periodic trapezoid over the LO phase.
double prcs_density_phase(double mu, double x, const QuadratureConvention& conv = {});
// PRCS density as the Poisson-weighted Fock sum up to n_max. Throws when the
// neglected Poisson tail exceeds kMaxPoissonTail.
double prcs_density_fock_sum(double mu, double x, const QuadratureConvention& conv = {},
                             int n_max = kDefaultMaxFock);

double quadrature_density(const StateSpec& state, double x,
                          const QuadratureConvention& conv = {},
                          int n_max = kDefaultMaxFock);

// Probability that the quadrature falls in [a, b].
double quadrature_bin_mass(const StateSpec& state, double a, double b,
                           const QuadratureConvention& conv = {});

// Bin masses over every bin of `axis`, sharing the edge evaluations.
std::vector<double> quadrature_bin_masses(const StateSpec& state, const UniformAxis& axis,
                                          const QuadratureConvention& conv = {});

struct PoissonWeights {
  std::vector<double> weights;  // e^{-mu} mu^n / n!, n = 0..n_max
  double tail = 0.0;            // 1 - sum(weights)
};

PoissonWeights poisson_weights(double mu, int n_max);

// Cumulative distribution of a Fock-state quadrature tabulated on
// [-12 sigma0, 12 sigma0]; used for inverse-CDF sampling.
class FockCdfTable {
 public:
  static constexpr std::size_t kPoints = std::size_t{1} << 14;
  FockCdfTable(int n, const QuadratureConvention& conv = {});

  double cdf(double x) const;
  double inverse(double u) const;  // u in [0, 1)
  int n() const { return n_; }

 private:
  int n_;
  double lo_, hi_, step_;
  std::vector<double> cdf_;
};

// Analytic density sampled at the bin centers of `axis`.
Density1D analytic_density(const StateSpec& state, const UniformAxis& axis,
                           const QuadratureConvention& conv = {});

// Ideal-LO joint density P0(x, y) for an analytic state.
Density2D theoretical_joint(const StateSpec& state, const UniformAxis& x_axis,
                            const UniformAxis& y_axis, const QuadratureConvention& conv = {});

// Ideal-LO correlation density w0(M) at bin centers outside the exclusion
// window, using the analytic quadrature density.
CorrelationDensity theoretical_w0(const StateSpec& state, const UniformAxis& m_axis,
                                  double eps0, const QuadratureConvention& conv = {});
// Pointwise form; rejects M = 0.
std::vector<double> theoretical_w0(const StateSpec& state, std::span<const double> m_points,
                                   const QuadratureConvention& conv = {});

}  // namespace bhd
