#include "bhd/quantum_states.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bhd/correlation_integral.hpp"
#include "bhd/errors.hpp"
#include "bhd/parallel.hpp"

namespace bhd {
namespace {

constexpr int kPhasePoints = 256;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::invalid_argument("not a number: " + std::string(s));
  return v;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double phase_mean(double mu, int j, double sigma0) {
  const double phi = 2.0 * std::numbers::pi * j / kPhasePoints;
  return 2.0 * std::sqrt(mu) * std::cos(phi) * sigma0;
}

}  // namespace

void validate(const QuadratureConvention& conv) {
  if (!(conv.sigma0 > 0.0) || !std::isfinite(conv.sigma0))
    throw std::invalid_argument("sigma0 must be positive and finite");
}

void validate(const StateSpec& state, int n_max) {
  std::visit(overloaded{
                 [](const Vacuum&) {},
                 [&](const Fock& f) {
                   if (f.n < 0) throw std::invalid_argument("Fock n must be non-negative");
                   if (f.n > n_max)
                     throw std::invalid_argument("Fock n=" + std::to_string(f.n) +
                                                 " exceeds truncation N_MAX=" +
                                                 std::to_string(n_max));
                 },
                 [](const Coherent& c) {
                   if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude) ||
                       !std::isfinite(c.phase))
                     throw std::invalid_argument("coherent amplitude must be finite and >= 0");
                 },
                 [](const Prcs& p) {
                   if (!(p.mu >= 0.0) || !std::isfinite(p.mu))
                     throw std::invalid_argument("PRCS mu must be finite and >= 0");
                 },
             },
             state);
}

std::string describe(const StateSpec& state) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Vacuum&) { os << "vacuum"; },
                 [&](const Fock& f) { os << "fock:" << f.n; },
                 [&](const Coherent& c) { os << "coherent:" << c.amplitude << ':' << c.phase; },
                 [&](const Prcs& p) { os << "prcs:" << p.mu; },
             },
             state);
  return os.str();
}

StateSpec parse_state(std::string_view text) {
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  StateSpec state;
  if (head == "vacuum" && rest.empty()) {
    state = Vacuum{};
  } else if (head == "fock" && !rest.empty()) {
    state = Fock{static_cast<int>(parse_double(rest))};
    if (parse_double(rest) != std::get<Fock>(state).n)
      throw std::invalid_argument("Fock n must be an integer");
  } else if (head == "coherent" && !rest.empty()) {
    const auto c2 = rest.find(':');
    Coherent c;
    c.amplitude = parse_double(rest.substr(0, c2));
    if (c2 != std::string_view::npos) c.phase = parse_double(rest.substr(c2 + 1));
    state = c;
  } else if (head == "prcs" && !rest.empty()) {
    state = Prcs{parse_double(rest)};
  } else {
    throw std::invalid_argument("unrecognized state: " + std::string(text));
  }
  validate(state);
  return state;
}

std::vector<double> hermite_functions(int n_max, double x) {
  if (n_max < 0) throw std::invalid_argument("hermite_functions: n_max < 0");
  std::vector<double> phi(static_cast<std::size_t>(n_max) + 1);
  // phi_0 = (2 pi)^{-1/4} exp(-x^2 / 4); recurrence in q = x / sqrt 2.
  phi[0] = std::exp(-0.25 * x * x) / std::sqrt(std::sqrt(2.0 * std::numbers::pi));
  if (n_max == 0) return phi;
  const double q = x / std::numbers::sqrt2;
  phi[1] = std::numbers::sqrt2 * q * phi[0];
  for (int n = 1; n < n_max; ++n) {
    phi[n + 1] = std::sqrt(2.0 / (n + 1)) * q * phi[n] - std::sqrt(double(n) / (n + 1)) * phi[n - 1];
  }
  return phi;
}

double fock_density(int n, double x, const QuadratureConvention& conv) {
  const double t = x / conv.sigma0;
  const double phi = hermite_functions(n, t)[static_cast<std::size_t>(n)];
  return phi * phi / conv.sigma0;
}

double gaussian_density(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double prcs_density_phase(double mu, double x, const QuadratureConvention& conv) {
  double s = 0.0;
  for (int j = 0; j < kPhasePoints; ++j) s += gaussian_density(x, phase_mean(mu, j, conv.sigma0), conv.sigma0);
  return s / kPhasePoints;
}

PoissonWeights poisson_weights(double mu, int n_max) {
  if (n_max < 0) throw std::invalid_argument("poisson_weights: n_max < 0");
  if (!(mu >= 0.0)) throw std::invalid_argument("poisson_weights: mu < 0");
  PoissonWeights pw;
  pw.weights.resize(static_cast<std::size_t>(n_max) + 1);
  double w = std::exp(-mu);
  for (int n = 0; n <= n_max; ++n) {
    if (n > 0) w *= mu / n;
    pw.weights[static_cast<std::size_t>(n)] = w;
  }
  // Sum the tail directly; 1 - sum loses everything below 1e-16.
  double term = w;
  for (int n = n_max + 1; term > 0.0; ++n) {
    term *= mu / n;
    pw.tail += term;
    if (n > mu && term <= 1e-17 * pw.tail) break;
  }
  return pw;
}

double prcs_density_fock_sum(double mu, double x, const QuadratureConvention& conv, int n_max) {
  const auto pw = poisson_weights(mu, n_max);
  if (pw.tail > kMaxPoissonTail)
    throw std::invalid_argument("Poisson tail " + std::to_string(pw.tail) + " above 1e-9 for mu=" +
                                std::to_string(mu) + " at N_MAX=" + std::to_string(n_max));
  const auto phi = hermite_functions(n_max, x / conv.sigma0);
  double s = 0.0;
  for (int n = 0; n <= n_max; ++n) s += pw.weights[n] * phi[n] * phi[n];
  return s / conv.sigma0;
}

double quadrature_density(const StateSpec& state, double x, const QuadratureConvention& conv,
                          int n_max) {
  validate(state, n_max);
  validate(conv);
  return std::visit(
      overloaded{
          [&](const Vacuum&) { return gaussian_density(x, 0.0, conv.sigma0); },
          [&](const Fock& f) { return fock_density(f.n, x, conv); },
          [&](const Coherent& c) {
            return gaussian_density(x, 2.0 * c.amplitude * std::cos(c.phase) * conv.sigma0,
                                    conv.sigma0);
          },
          [&](const Prcs& p) { return prcs_density_phase(p.mu, x, conv); },
      },
      state);
}

double quadrature_bin_mass(const StateSpec& state, double a, double b,
                           const QuadratureConvention& conv) {
  validate(state);
  const double s = conv.sigma0;
  auto gauss_mass = [&](double mean) { return normal_cdf((b - mean) / s) - normal_cdf((a - mean) / s); };
  return std::visit(
      overloaded{
          [&](const Vacuum&) { return gauss_mass(0.0); },
          [&](const Coherent& c) { return gauss_mass(2.0 * c.amplitude * std::cos(c.phase) * s); },
          [&](const Prcs& p) {
            double m = 0.0;
            for (int j = 0; j < kPhasePoints; ++j) m += gauss_mass(phase_mean(p.mu, j, s));
            return m / kPhasePoints;
          },
          [&](const Fock& f) {
            QuadratureOptions opt;
            opt.rel_tol = 1e-10;
            opt.abs_tol = 1e-16;
            return integrate_adaptive([&](double x) { return fock_density(f.n, x, conv); }, a, b, opt)
                .value;
          },
      },
      state);
}

std::vector<double> quadrature_bin_masses(const StateSpec& state, const UniformAxis& axis,
                                          const QuadratureConvention& conv) {
  validate(state);
  validate(conv);
  std::vector<double> out(axis.n);
  const auto* prcs = std::get_if<Prcs>(&state);
  if (!prcs) {
    for (std::size_t i = 0; i < axis.n; ++i) out[i] = quadrature_bin_mass(state, axis.edge(i), axis.edge(i + 1), conv);
    return out;
  }
  // Phases j and kPhasePoints - j share cos, so only half the means are distinct.
  const double s = conv.sigma0;
  std::vector<double> lower(axis.n + 1, 0.0), upper(axis.n + 1, 0.0);
  for (int j = 0; j <= kPhasePoints / 2; ++j) {
    const double w = (j == 0 || j == kPhasePoints / 2) ? 1.0 : 2.0;
    const double mean = phase_mean(prcs->mu, j, s);
    for (std::size_t e = 0; e <= axis.n; ++e) {
      const double z = (axis.edge(e) - mean) / (s * std::numbers::sqrt2);
      lower[e] += w * 0.5 * std::erfc(-z);
      upper[e] += w * 0.5 * std::erfc(z);
    }
  }
  for (std::size_t i = 0; i < axis.n; ++i) {
    // Difference the smaller tail to keep relative accuracy far out.
    const double m = axis.edge(i) >= 0.0 ? upper[i] - upper[i + 1] : lower[i + 1] - lower[i];
    out[i] = m / kPhasePoints;
  }
  return out;
}

FockCdfTable::FockCdfTable(int n, const QuadratureConvention& conv)
    : n_(n), lo_(-12.0 * conv.sigma0), hi_(12.0 * conv.sigma0) {
  validate(StateSpec{Fock{n}});
  step_ = (hi_ - lo_) / static_cast<double>(kPoints - 1);
  cdf_.resize(kPoints);
  double prev = fock_density(n, lo_, conv);
  cdf_[0] = 0.0;
  // Cumulative Simpson on each step using the midpoint.
  for (std::size_t j = 1; j < kPoints; ++j) {
    const double x1 = lo_ + static_cast<double>(j) * step_;
    const double mid = fock_density(n, x1 - 0.5 * step_, conv);
    const double cur = fock_density(n, x1, conv);
    cdf_[j] = cdf_[j - 1] + step_ * (prev + 4.0 * mid + cur) / 6.0;
    prev = cur;
  }
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
}

double FockCdfTable::cdf(double x) const {
  if (x <= lo_) return 0.0;
  if (x >= hi_) return 1.0;
  const double t = (x - lo_) / step_;
  const auto j = std::min(static_cast<std::size_t>(t), kPoints - 2);
  const double f = t - static_cast<double>(j);
  return cdf_[j] + f * (cdf_[j + 1] - cdf_[j]);
}

double FockCdfTable::inverse(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return lo_;
  if (it == cdf_.end()) return hi_;
  const auto j = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double span = cdf_[j + 1] - cdf_[j];
  const double f = span > 0.0 ? (u - cdf_[j]) / span : 0.0;
  return lo_ + (static_cast<double>(j) + f) * step_;
}

Density1D analytic_density(const StateSpec& state, const UniformAxis& axis,
                           const QuadratureConvention& conv) {
  Density1D d;
  d.axis = axis;
  d.values.resize(axis.n);
  d.stderrs.assign(axis.n, 0.0);
  d.provenance = Provenance::analytic;
  d.effective_samples = kInfiniteSamples;
  for (std::size_t i = 0; i < axis.n; ++i) d.values[i] = quadrature_density(state, axis.center(i), conv);
  d.total_mass = d.mass();
  return d;
}

Density2D theoretical_joint(const StateSpec& state, const UniformAxis& x_axis,
                            const UniformAxis& y_axis, const QuadratureConvention& conv) {
  Density2D p;
  p.x_axis = x_axis;
  p.y_axis = y_axis;
  p.provenance = Provenance::analytic;
  p.values.resize(x_axis.n * y_axis.n);
  const double s2 = conv.sigma0 * conv.sigma0;
  const double pref = 2.0 / std::sqrt(2.0 * std::numbers::pi * s2);
  for (std::size_t iy = 0; iy < y_axis.n; ++iy) {
    for (std::size_t ix = 0; ix < x_axis.n; ++ix) {
      const double x = x_axis.center(ix), y = y_axis.center(iy);
      p.at(ix, iy) = pref * std::exp(-(x + y) * (x + y) / (2.0 * s2)) *
                     quadrature_density(state, x - y, conv);
    }
  }
  return p;
}

namespace {

// Pointwise analytic P_D, preferring the Fock sum for PRCS where the
// truncation is negligible.
struct AnalyticPd {
  StateSpec state;
  QuadratureConvention conv;
  bool prcs_by_sum = false;

  double operator()(double x) const {
    if (prcs_by_sum) return prcs_density_fock_sum(std::get<Prcs>(state).mu, x, conv);
    return quadrature_density(state, x, conv);
  }
};

double support_for(const StateSpec& state, const QuadratureConvention& conv) {
  double shift = 0.0;
  if (auto* p = std::get_if<Prcs>(&state)) shift = 2.0 * std::sqrt(p->mu);
  if (auto* c = std::get_if<Coherent>(&state)) shift = 2.0 * c->amplitude;
  if (auto* f = std::get_if<Fock>(&state)) shift = std::sqrt(2.0 * f->n + 1.0);
  return (12.0 + shift) * conv.sigma0;
}

AnalyticPd make_pd(const StateSpec& state, const QuadratureConvention& conv) {
  AnalyticPd pd{state, conv, false};
  if (auto* p = std::get_if<Prcs>(&state))
    pd.prcs_by_sum = poisson_weights(p->mu, kDefaultMaxFock).tail <= kMaxPoissonTail;
  return pd;
}

double w0_point(const AnalyticPd& pd, double m, const CorrelationIntegralOptions& opt) {
  GaussianDensity ps{pd.conv.sigma0};
  // Coherent states are not symmetric; average the two half-lines.
  auto sym = [&](double x) { return 0.5 * (pd(x) + pd(-x)); };
  const auto r = correlation_integral(m, ps, sym, opt);
  if (!r.converged)
    throw NumericalError("theoretical w0 quadrature did not converge at M=" + std::to_string(m));
  return r.value;
}

}  // namespace

std::vector<double> theoretical_w0(const StateSpec& state, std::span<const double> m_points,
                                   const QuadratureConvention& conv) {
  validate(state);
  validate(conv);
  for (double m : m_points)
    if (m == 0.0) throw std::invalid_argument("theoretical_w0: grid contains M=0");
  const auto pd = make_pd(state, conv);
  CorrelationIntegralOptions opt;
  opt.s_support = 12.0 * conv.sigma0;
  opt.d_support = support_for(state, conv);
  std::vector<double> out(m_points.size());
  parallel_for(
      m_points.size(), [&](std::size_t i) { out[i] = w0_point(pd, m_points[i], opt); }, Exec::parallel);
  return out;
}

CorrelationDensity theoretical_w0(const StateSpec& state, const UniformAxis& m_axis, double eps0,
                                  const QuadratureConvention& conv) {
  CorrelationDensity w;
  w.axis = m_axis;
  w.eps0 = eps0;
  w.provenance = Provenance::analytic;
  w.values.assign(m_axis.n, 0.0);
  w.stderrs.assign(m_axis.n, 0.0);
  std::vector<double> points;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < m_axis.n; ++i) {
    if (w.excluded(i)) continue;
    points.push_back(m_axis.center(i));
    index.push_back(i);
  }
  const auto vals = theoretical_w0(state, points, conv);
  for (std::size_t k = 0; k < index.size(); ++k) w.values[index[k]] = vals[k];
  w.excluded_mass = estimate_excluded_mass(w);
  return w;
}

}  // namespace bhd
