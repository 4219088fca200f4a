#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bhd/density.hpp"
#include "bhd/quantum_states.hpp"

namespace bhd {

struct InversionResult {
  StatObject l1;
  std::optional<StatObject> l2;
  std::vector<double> mus_used;
  // Diagnostics only: inverted statistics are approximately normalized.
  double total_mass_l1 = 0.0;
  double total_mass_l2 = 0.0;
};

// Pointwise sum_j coefficients[j] * objects[j]. All objects must share the
// same kind and grid. Standard errors add in quadrature and effective sample
// counts combine as 1 / sum(c_j^2 / N_j).
StatObject linear_combination(std::span<const double> coefficients,
                              std::span<const StatObject* const> objects);

double stat_mass(const StatObject& obj);

// Mean photon number minimizing the squared L2 distance between the
// difference-current density and the analytic PRCS density (bin-averaged),
// searched on [0, 10] by golden section to 1e-4.
double fit_mu(const Density1D& d_marginal, const QuadratureConvention& conv = {});

// Single-photon statistic from vacuum and one PRCS:
// L1 = (e^mu L(rho_mu) - L0) / mu.
InversionResult invert_single_mu(const StatObject& l0, const StatObject& l_mu, double mu);

// One- and two-photon statistics from vacuum and two PRCS. With
// A_i = e^{mu_i} L(rho_{mu_i}) - L0 and Delta = (mu1 mu2^2 - mu2 mu1^2) / 2:
// L1 = (A1 mu2^2 - A2 mu1^2) / (2 Delta), L2 = (A2 mu1 - A1 mu2) / Delta.
InversionResult invert_two_mu(const StatObject& l0, const StatObject& l_mu1,
                              const StatObject& l_mu2, double mu1, double mu2);

// Normalized overlap int p q / sqrt(int p^2 int q^2) on matching grids.
double overlap_2d(const Density2D& p, const Density2D& p_th);
// Same on the M grid; excluded bins take no part.
double overlap_1d(const CorrelationDensity& w, const CorrelationDensity& w_th);
double overlap_1d(const Density1D& p, const Density1D& p_th);

struct VogelResult {
  bool nonclassical = false;
  double max_excess = 0.0;  // max_k |Phi(k)| - exp(-sigma0^2 k^2 / 2)
  double k_at_max = 0.0;
  double threshold_at_max = 0.0;
};

inline constexpr int kVogelPoints = 256;
inline constexpr double kVogelSigmas = 5.0;
// Floor on the decision threshold so exact analytic densities do not fire on
// round-off.
inline constexpr double kVogelFloor = 1e-6;

// Characteristic function of p_d by direct bin summation on k in
// [0, 6 / sigma0], normalized to unit mass, against the vacuum Gaussian.
// Fires when the excess at some k exceeds 5 sqrt((1 - |Phi|^2) / N).
VogelResult vogel_criterion(const Density1D& p_d, double sigma0);

}  // namespace bhd
