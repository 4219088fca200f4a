#include "bhd/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bhd/diagnostics.hpp"
#include "bhd/errors.hpp"

namespace bhd {
namespace {

template <class T>
const T& as(const StatObject& obj) {
  return std::get<T>(obj);
}

void require_same_grid(const StatObject& a, const StatObject& b) {
  if (a.index() != b.index())
    throw std::invalid_argument("inversion operands differ in kind: " + std::string(kind_name(a)) +
                                " vs " + std::string(kind_name(b)));
  const bool same = std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Density2D>) {
          return x.x_axis == y.x_axis && x.y_axis == y.y_axis && x.values.size() == y.values.size();
        } else if constexpr (std::is_same_v<T, CorrelationDensity>) {
          return x.axis == y.axis && x.eps0 == y.eps0 && x.values.size() == y.values.size();
        } else {
          return x.axis == y.axis && x.values.size() == y.values.size();
        }
      },
      a);
  if (!same) throw std::invalid_argument("inversion operands have mismatched grids");
}

double combine_samples(std::span<const double> c, std::span<const StatObject* const> objs) {
  double inv = 0.0;
  for (std::size_t j = 0; j < objs.size(); ++j) {
    const double n = std::visit([](const auto& x) { return x.effective_samples; }, *objs[j]);
    if (std::isfinite(n) && n > 0.0) inv += c[j] * c[j] / n;
  }
  return inv > 0.0 ? 1.0 / inv : kInfiniteSamples;
}

std::vector<double> combine(std::span<const double> c, std::span<const std::vector<double>* const> v) {
  std::vector<double> out(v[0]->size(), 0.0);
  for (std::size_t j = 0; j < v.size(); ++j)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[j] * (*v[j])[i];
  return out;
}

std::vector<double> combine_errors(std::span<const double> c,
                                   std::span<const std::vector<double>* const> e, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 0; j < e.size(); ++j) {
    if (e[j]->size() != n) continue;
    for (std::size_t i = 0; i < n; ++i) out[i] += c[j] * c[j] * (*e[j])[i] * (*e[j])[i];
  }
  for (double& x : out) x = std::sqrt(x);
  return out;
}

}  // namespace

StatObject linear_combination(std::span<const double> coefficients,
                              std::span<const StatObject* const> objects) {
  if (objects.empty() || coefficients.size() != objects.size())
    throw std::invalid_argument("linear_combination: need one coefficient per object");
  for (std::size_t j = 1; j < objects.size(); ++j) require_same_grid(*objects[0], *objects[j]);
  const double n_eff = combine_samples(coefficients, objects);
  return std::visit(
      [&](const auto& first) -> StatObject {
        using T = std::decay_t<decltype(first)>;
        std::vector<const std::vector<double>*> vals, errs;
        for (const auto* o : objects) vals.push_back(&std::get<T>(*o).values);
        T out = first;
        out.values = combine(coefficients, vals);
        out.provenance = Provenance::inverted;
        out.effective_samples = n_eff;
        out.overflow = 0;
        if constexpr (std::is_same_v<T, Density2D>) {
          return out;
        } else {
          for (const auto* o : objects) errs.push_back(&std::get<T>(*o).stderrs);
          out.stderrs = combine_errors(coefficients, errs, out.values.size());
          if constexpr (std::is_same_v<T, Density1D>) {
            out.total_mass = out.mass();
          } else {
            out.excluded_mass = estimate_excluded_mass(out);
          }
          return out;
        }
      },
      *objects[0]);
}

double stat_mass(const StatObject& obj) {
  return std::visit(
      [](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, CorrelationDensity>) return x.total_mass();
        else return x.mass();
      },
      obj);
}

double fit_mu(const Density1D& d, const QuadratureConvention& conv) {
  validate(conv);
  const double dx = d.axis.width();
  auto objective = [&](double mu) {
    const auto masses = quadrature_bin_masses(Prcs{mu}, d.axis, conv);
    double s = 0.0;
    for (std::size_t i = 0; i < d.axis.n; ++i) {
      const double r = d.values[i] - masses[i] / dx;
      s += r * r;
    }
    return s * dx;
  };
  // Coarse scan to bracket the global minimum, then golden section.
  constexpr double kLo = 0.0, kHi = 10.0, kTol = 1e-4;
  constexpr int kScan = 50;
  int best = 0;
  double best_val = objective(kLo);
  for (int k = 1; k <= kScan; ++k) {
    const double v = objective(kLo + (kHi - kLo) * k / kScan);
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  const double step = (kHi - kLo) / kScan;
  double a = std::max(kLo, kLo + (best - 1) * step), b = std::min(kHi, kLo + (best + 1) * step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), e = a + g * (b - a);
  double fc = objective(c), fe = objective(e);
  while (b - a > kTol) {
    if (fc < fe) {
      b = e; e = c; fe = fc;
      c = b - g * (b - a);
      fc = objective(c);
    } else {
      a = c; c = e; fc = fe;
      e = a + g * (b - a);
      fe = objective(e);
    }
  }
  double mu = 0.5 * (a + b);
  double residual = objective(mu);
  if (objective(kLo) <= residual) {
    mu = kLo;
    residual = objective(kLo);
  }
  double noise_floor = 0.0;
  if (d.stderrs.size() == d.axis.n)
    for (double se : d.stderrs) noise_floor += se * se * dx;
  if (noise_floor > 0.0 && residual > 5.0 * noise_floor) {
    std::ostringstream os;
    os << "fit_mu: residual " << residual << " exceeds 5x the noise floor " << noise_floor
       << " (model mismatch?)";
    warn(os.str());
  }
  return mu;
}

InversionResult invert_single_mu(const StatObject& l0, const StatObject& l_mu, double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("invert_single_mu: mu must be > 0");
  require_same_grid(l0, l_mu);
  const double c[] = {std::exp(mu) / mu, -1.0 / mu};
  const StatObject* objs[] = {&l_mu, &l0};
  InversionResult r{linear_combination(c, objs), std::nullopt, {mu}, 0.0, 0.0};
  r.total_mass_l1 = stat_mass(r.l1);
  return r;
}

InversionResult invert_two_mu(const StatObject& l0, const StatObject& l_mu1, const StatObject& l_mu2,
                              double mu1, double mu2) {
  if (!(mu1 > 0.0) || !(mu2 > 0.0) || !std::isfinite(mu1) || !std::isfinite(mu2))
    throw std::invalid_argument("invert_two_mu: mu values must be > 0");
  if (mu1 == mu2) throw std::invalid_argument("invert_two_mu: mu1 and mu2 must differ");
  require_same_grid(l0, l_mu1);
  require_same_grid(l0, l_mu2);
  const double delta = 0.5 * (mu1 * mu2 * mu2 - mu2 * mu1 * mu1);
  const double scale = std::max(mu1, mu2);
  if (std::abs(delta) < 1e-6 * scale * scale * scale)
    throw NumericalError("invert_two_mu: ill-conditioned inversion (|Delta| too small)");
  const double e1 = std::exp(mu1), e2 = std::exp(mu2);
  // L1 = (A1 mu2^2 - A2 mu1^2) / (2 Delta) expanded over (L0, L_mu1, L_mu2).
  const double a1 = mu2 * mu2 / (2.0 * delta), a2 = -mu1 * mu1 / (2.0 * delta);
  const double c1[] = {-(a1 + a2), a1 * e1, a2 * e2};
  // L2 = (A2 mu1 - A1 mu2) / Delta.
  const double b1 = -mu2 / delta, b2 = mu1 / delta;
  const double c2[] = {-(b1 + b2), b1 * e1, b2 * e2};
  const StatObject* objs[] = {&l0, &l_mu1, &l_mu2};
  InversionResult r{linear_combination(c1, objs), linear_combination(c2, objs), {mu1, mu2}, 0.0, 0.0};
  r.total_mass_l1 = stat_mass(r.l1);
  r.total_mass_l2 = stat_mass(*r.l2);
  return r;
}

namespace {

double overlap(std::span<const double> p, std::span<const double> q, const std::vector<bool>* skip) {
  if (p.size() != q.size()) throw std::invalid_argument("overlap: grid size mismatch");
  double pq = 0.0, pp = 0.0, qq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (skip && (*skip)[i]) continue;
    pq += p[i] * q[i];
    pp += p[i] * p[i];
    qq += q[i] * q[i];
  }
  if (pp == 0.0 || qq == 0.0) throw std::invalid_argument("overlap: all-zero input");
  return pq / std::sqrt(pp * qq);
}

}  // namespace

double overlap_2d(const Density2D& p, const Density2D& p_th) {
  if (!(p.x_axis == p_th.x_axis) || !(p.y_axis == p_th.y_axis))
    throw std::invalid_argument("overlap_2d: grids differ");
  return overlap(p.values, p_th.values, nullptr);
}

double overlap_1d(const CorrelationDensity& w, const CorrelationDensity& w_th) {
  if (!(w.axis == w_th.axis) || w.eps0 != w_th.eps0)
    throw std::invalid_argument("overlap_1d: grids differ");
  const auto mask = exclusion_mask(w.axis, w.eps0);
  return overlap(w.values, w_th.values, &mask);
}

double overlap_1d(const Density1D& p, const Density1D& p_th) {
  if (!(p.axis == p_th.axis)) throw std::invalid_argument("overlap_1d: grids differ");
  return overlap(p.values, p_th.values, nullptr);
}

VogelResult vogel_criterion(const Density1D& p_d, double sigma0) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("vogel_criterion: sigma0 must be > 0");
  const double dx = p_d.axis.width();
  double mass = 0.0;
  for (double v : p_d.values) mass += v * dx;
  if (mass == 0.0) throw std::invalid_argument("vogel_criterion: zero-mass density");
  const double k_max = 6.0 / sigma0;
  VogelResult r;
  r.max_excess = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < kVogelPoints; ++j) {
    const double k = k_max * j / (kVogelPoints - 1);
    std::complex<double> phi{0.0, 0.0};
    for (std::size_t i = 0; i < p_d.axis.n; ++i) {
      const double kx = k * p_d.axis.center(i);
      phi += p_d.values[i] * dx * std::complex<double>(std::cos(kx), std::sin(kx));
    }
    phi /= mass;
    const double abs_phi = std::abs(phi);
    const double vacuum = std::exp(-0.5 * sigma0 * sigma0 * k * k);
    const double excess = abs_phi - vacuum;
    double sigma = 0.0;
    if (std::isfinite(p_d.effective_samples))
      sigma = std::sqrt(std::max(0.0, 1.0 - abs_phi * abs_phi) / p_d.effective_samples) /
              std::abs(mass);
    const double threshold = std::max(kVogelSigmas * sigma, kVogelFloor);
    if (excess > threshold) r.nonclassical = true;
    if (excess > r.max_excess) {
      r.max_excess = excess;
      r.k_at_max = k;
      r.threshold_at_max = threshold;
    }
  }
  return r;
}

}  // namespace bhd
