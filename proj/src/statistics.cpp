#include "bhd/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "bhd/correlation_integral.hpp"
#include "bhd/diagnostics.hpp"
#include "bhd/errors.hpp"
#include "bhd/interpolation.hpp"
#include "bhd/parallel.hpp"

namespace bhd {
namespace {

constexpr std::size_t kChunk = std::size_t{1} << 16;

struct Counts {
  std::vector<std::size_t> bins;
  std::size_t outside = 0;
};

// Bin counting over an index range; `locate` maps sample k to a flat bin
// index or nullopt.
template <class Locate>
Counts count_bins(std::size_t n_samples, std::size_t n_bins, Locate&& locate, Exec exec) {
  Counts total{std::vector<std::size_t>(n_bins, 0), 0};
  if (exec == Exec::serial) {
    for (std::size_t k = 0; k < n_samples; ++k) {
      if (auto b = locate(k)) ++total.bins[*b];
      else ++total.outside;
    }
    return total;
  }
#pragma omp parallel
  {
    Counts local{std::vector<std::size_t>(n_bins, 0), 0};
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n_samples); ++k) {
      if (auto b = locate(static_cast<std::size_t>(k))) ++local.bins[*b];
      else ++local.outside;
    }
#pragma omp critical(bhd_histogram_merge)
    {
      for (std::size_t i = 0; i < n_bins; ++i) total.bins[i] += local.bins[i];
      total.outside += local.outside;
    }
  }
  return total;
}

void check_overflow(std::size_t outside, std::size_t n, const HistogramOptions& opt,
                    const char* what) {
  const double frac = static_cast<double>(outside) / static_cast<double>(n);
  if (frac > opt.max_overflow_fraction) {
    std::ostringstream os;
    os << what << ": " << outside << " of " << n << " samples (" << frac * 100.0
       << "%) fall outside the axis; widen the grid";
    throw NumericalError(os.str());
  }
}

// Chunked sum with a fixed combination order, so serial and parallel
// execution agree bitwise.
template <class Term>
double chunked_sum(std::size_t n, Term&& term, Exec exec) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
  auto run = [&](std::size_t c) {
    double s = 0.0;
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t k = c * kChunk; k < end; ++k) s += term(k);
    partial[c] = s;
  };
  parallel_for(chunks, run, exec, false);
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

}  // namespace

Density1D estimate_density_1d(std::span<const double> samples, const UniformAxis& axis, Exec exec,
                              const HistogramOptions& opt) {
  if (samples.size() < opt.min_samples)
    throw std::invalid_argument("estimate_density_1d: need at least " +
                                std::to_string(opt.min_samples) + " samples");
  const Counts c = count_bins(
      samples.size(), axis.n, [&](std::size_t k) { return axis.index_of(samples[k]); }, exec);
  check_overflow(c.outside, samples.size(), opt, "estimate_density_1d");
  const std::size_t inside = samples.size() - c.outside;
  const double n = static_cast<double>(inside);
  const double dx = axis.width();
  Density1D d;
  d.axis = axis;
  d.values.resize(axis.n);
  d.stderrs.resize(axis.n);
  for (std::size_t i = 0; i < axis.n; ++i) {
    const double ci = static_cast<double>(c.bins[i]);
    d.values[i] = ci / (n * dx);
    d.stderrs[i] = std::sqrt(ci * (1.0 - ci / n)) / (n * dx);
  }
  d.provenance = Provenance::empirical;
  d.effective_samples = n;
  d.overflow = c.outside;
  d.total_mass = d.mass();
  return d;
}

double estimate_sigma0(std::span<const DetectorRecord> records, Exec exec) {
  if (records.size() < 2) throw std::invalid_argument("estimate_sigma0: need at least 2 records");
  const double n = static_cast<double>(records.size());
  const double mean = chunked_sum(records.size(), [&](std::size_t k) { return records[k].d(); }, exec) / n;
  const double ss = chunked_sum(
      records.size(),
      [&](std::size_t k) {
        const double e = records[k].d() - mean;
        return e * e;
      },
      exec);
  return std::sqrt(ss / (n - 1.0));
}

Density2D joint_histogram(std::span<const DetectorRecord> records, const UniformAxis& x_axis,
                          const UniformAxis& y_axis, Exec exec, const HistogramOptions& opt) {
  if (records.size() < opt.min_samples)
    throw std::invalid_argument("joint_histogram: need at least " +
                                std::to_string(opt.min_samples) + " records");
  const Counts c = count_bins(
      records.size(), x_axis.n * y_axis.n,
      [&](std::size_t k) -> std::optional<std::size_t> {
        const auto ix = x_axis.index_of(records[k].i1);
        const auto iy = y_axis.index_of(records[k].i2);
        if (!ix || !iy) return std::nullopt;
        return *iy * x_axis.n + *ix;
      },
      exec);
  check_overflow(c.outside, records.size(), opt, "joint_histogram");
  const double n = static_cast<double>(records.size() - c.outside);
  const double cell = x_axis.width() * y_axis.width();
  Density2D p;
  p.x_axis = x_axis;
  p.y_axis = y_axis;
  p.values.resize(c.bins.size());
  for (std::size_t i = 0; i < c.bins.size(); ++i) p.values[i] = static_cast<double>(c.bins[i]) / (n * cell);
  p.provenance = Provenance::empirical;
  p.effective_samples = n;
  p.overflow = c.outside;
  return p;
}

DiagonalVariances diagonal_variances(const Density2D& p) {
  double w = 0, su = 0, sv = 0, suu = 0, svv = 0;
  for (std::size_t iy = 0; iy < p.y_axis.n; ++iy) {
    for (std::size_t ix = 0; ix < p.x_axis.n; ++ix) {
      const double x = p.x_axis.center(ix), y = p.y_axis.center(iy), v = p.at(ix, iy);
      const double u = (x + y) / std::numbers::sqrt2, a = (x - y) / std::numbers::sqrt2;
      w += v; su += v * u; sv += v * a; suu += v * u * u; svv += v * a * a;
    }
  }
  DiagonalVariances out;
  out.diagonal = suu / w - (su / w) * (su / w);
  out.anti_diagonal = svv / w - (sv / w) * (sv / w);
  return out;
}

Density1D anti_diagonal_marginal(const Density2D& p, const UniformAxis& axis) {
  Density1D d;
  d.axis = axis;
  d.values.assign(axis.n, 0.0);
  d.stderrs.assign(axis.n, 0.0);
  d.provenance = p.provenance;
  d.effective_samples = p.effective_samples;
  const double cell = p.x_axis.width() * p.y_axis.width();
  for (std::size_t iy = 0; iy < p.y_axis.n; ++iy) {
    for (std::size_t ix = 0; ix < p.x_axis.n; ++ix) {
      const double u = (p.x_axis.center(ix) - p.y_axis.center(iy)) / std::numbers::sqrt2;
      if (auto b = axis.index_of(u)) d.values[*b] += p.at(ix, iy) * cell;
    }
  }
  for (double& v : d.values) v /= axis.width();
  d.total_mass = d.mass();
  return d;
}

SymmetryReport symmetrize(const Density1D& p, double n_sigma) {
  if (!p.axis.symmetric()) throw std::invalid_argument("symmetrize: axis must be symmetric about 0");
  SymmetryReport r;
  r.symmetrized = p;
  const std::size_t n = p.axis.n;
  const bool have_err = p.stderrs.size() == n;
  double asym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = n - 1 - i;
    const double a = p.values[i], b = p.values[j];
    r.symmetrized.values[i] = 0.5 * (a + b);
    asym += std::abs(a - b);
    if (have_err) {
      const double ea = p.stderrs[i], eb = p.stderrs[j];
      const double pooled = std::sqrt(ea * ea + eb * eb);
      r.symmetrized.stderrs[i] = i == j ? ea : 0.5 * pooled;
      const double allowed = pooled > 0.0 ? n_sigma * pooled : 1e-12 * std::max(std::abs(a), std::abs(b));
      if (std::abs(a - b) > allowed) r.within_noise = false;
    }
  }
  r.asymmetry_norm = 0.5 * asym * p.axis.width();
  r.symmetrized.total_mass = r.symmetrized.mass();
  return r;
}

Density1D q_square_transform(const Density1D& p, const UniformAxis& v_axis) {
  if (v_axis.lo < 0.0) throw std::invalid_argument("q_square_transform: v axis must start at >= 0");
  const bool symmetric = p.axis.symmetric() ? symmetrize(p).within_noise : false;
  if (!symmetric)
    warn("q_square_transform: input density is not symmetric within noise; using the two-sided form");
  const bool have_err = p.stderrs.size() == p.axis.n;
  Density1D q;
  q.axis = v_axis;
  q.values.assign(v_axis.n, 0.0);
  q.stderrs.assign(v_axis.n, 0.0);
  q.provenance = p.provenance;
  q.effective_samples = p.effective_samples;
  const double dx = p.axis.width();
  // Mass of the piecewise-constant p over [x1, x2], with its variance.
  auto interval = [&](double x1, double x2, double& mass, double& var) {
    if (x2 <= x1) return;
    const double lo = std::max(x1, p.axis.lo), hi = std::min(x2, p.axis.hi);
    if (hi <= lo) return;
    auto first = static_cast<std::size_t>(std::floor((lo - p.axis.lo) / dx));
    for (std::size_t i = std::min(first, p.axis.n - 1); i < p.axis.n; ++i) {
      const double a = std::max(lo, p.axis.edge(i)), b = std::min(hi, p.axis.edge(i + 1));
      if (a >= hi) break;
      if (b <= a) continue;
      mass += (b - a) * p.values[i];
      if (have_err) var += (b - a) * (b - a) * p.stderrs[i] * p.stderrs[i];
    }
  };
  for (std::size_t k = 0; k < v_axis.n; ++k) {
    const double r1 = std::sqrt(v_axis.edge(k)), r2 = std::sqrt(v_axis.edge(k + 1));
    double mass = 0.0, var = 0.0;
    interval(r1, r2, mass, var);
    interval(-r2, -r1, mass, var);
    q.values[k] = mass / v_axis.width();
    q.stderrs[k] = std::sqrt(var) / v_axis.width();
  }
  q.total_mass = q.mass();
  return q;
}

CorrelationDensity correlation_density_empirical(std::span<const DetectorRecord> records,
                                                 const UniformAxis& m_axis, double eps0, Exec exec,
                                                 const HistogramOptions& opt) {
  if (records.size() < kMinCorrelationRecords)
    throw std::invalid_argument("correlation_density_empirical: need at least 1e5 records");
  const Counts c = count_bins(
      records.size(), m_axis.n, [&](std::size_t k) { return m_axis.index_of(records[k].m()); }, exec);
  check_overflow(c.outside, records.size(), opt, "correlation_density_empirical");
  CorrelationDensity w;
  w.axis = m_axis;
  w.eps0 = eps0;
  w.values.assign(m_axis.n, 0.0);
  w.stderrs.assign(m_axis.n, 0.0);
  w.provenance = Provenance::empirical;
  w.effective_samples = static_cast<double>(records.size());
  w.overflow = c.outside;
  const double n = static_cast<double>(records.size());
  const double dm = m_axis.width();
  for (std::size_t i = 0; i < m_axis.n; ++i) {
    if (w.excluded(i)) continue;
    const double ci = static_cast<double>(c.bins[i]);
    w.values[i] = ci / (n * dm);
    w.stderrs[i] = std::sqrt(ci * (1.0 - ci / n)) / (n * dm);
  }
  w.excluded_mass = estimate_excluded_mass(w);
  return w;
}

double negative_product_fraction(std::span<const DetectorRecord> records) {
  if (records.empty()) return 0.0;
  std::size_t neg = 0;
  for (const auto& r : records) neg += r.m() < 0.0 ? 1 : 0;
  return static_cast<double>(neg) / static_cast<double>(records.size());
}

namespace {

// Symmetrized monotone-cubic view of a quadrature density.
struct SymmetricInterpolant {
  MonotoneCubic f;
  double operator()(double x) const { return 0.5 * (f(x) + f(-x)); }
};

CorrelationDensity make_correlation(const UniformAxis& m_axis, double eps0, Provenance prov,
                                    double effective_samples) {
  CorrelationDensity w;
  w.axis = m_axis;
  w.eps0 = eps0;
  w.values.assign(m_axis.n, 0.0);
  w.stderrs.assign(m_axis.n, 0.0);
  w.provenance = prov;
  w.effective_samples = effective_samples;
  return w;
}

}  // namespace

CorrelationDensity correlation_density_convolution(const Density1D& p_s, const Density1D& p_d,
                                                   const UniformAxis& m_axis, double eps0, Exec exec) {
  const SymmetricInterpolant ps{MonotoneCubic(p_s.axis, p_s.values)};
  const SymmetricInterpolant pd{MonotoneCubic(p_d.axis, p_d.values)};
  const auto s_knots = ps.f.abs_knots();
  const auto d_knots = pd.f.abs_knots();
  CorrelationIntegralOptions opt;
  opt.s_support = ps.f.support_radius();
  opt.d_support = pd.f.support_radius();
  opt.s_breaks = s_knots;
  opt.d_breaks = d_knots;
  opt.quadrature.rel_tol = 1e-6;
  auto w = make_correlation(m_axis, eps0, Provenance::reconstructed,
                            std::min(p_s.effective_samples, p_d.effective_samples));
  parallel_for(
      m_axis.n,
      [&](std::size_t i) {
        if (w.excluded(i) || m_axis.center(i) == 0.0) return;
        w.values[i] = correlation_integral(m_axis.center(i), ps, pd, opt).value;
      },
      exec);
  w.excluded_mass = estimate_excluded_mass(w);
  return w;
}

Density2D reconstruct_joint_ideal(const Density1D& p_d, double sigma0, const UniformAxis& x_axis,
                                  const UniformAxis& y_axis) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("reconstruct_joint_ideal: sigma0 must be > 0");
  const MonotoneCubic pd(p_d.axis, p_d.values);
  const double s2 = sigma0 * sigma0;
  const double pref = 2.0 / std::sqrt(2.0 * std::numbers::pi * s2);
  Density2D p;
  p.x_axis = x_axis;
  p.y_axis = y_axis;
  p.values.resize(x_axis.n * y_axis.n);
  p.provenance = Provenance::reconstructed;
  p.effective_samples = p_d.effective_samples;
  for (std::size_t iy = 0; iy < y_axis.n; ++iy) {
    const double y = y_axis.center(iy);
    for (std::size_t ix = 0; ix < x_axis.n; ++ix) {
      const double x = x_axis.center(ix);
      p.at(ix, iy) = pref * std::exp(-(x + y) * (x + y) / (2.0 * s2)) * pd(x - y);
    }
  }
  return p;
}

namespace {

struct W0Evaluator {
  SymmetricInterpolant pd;
  GaussianDensity ps;
  std::vector<double> d_knots;
  CorrelationIntegralOptions opt;
  double max_tail_fraction;

  W0Evaluator(const Density1D& p_d, double sigma0, const ReconstructOptions& o)
      : pd{MonotoneCubic(p_d.axis, p_d.values)}, ps{sigma0}, max_tail_fraction(o.max_tail_fraction) {
    if (!(sigma0 > 0.0)) throw std::invalid_argument("reconstruct_w0: sigma0 must be > 0");
    d_knots = pd.f.abs_knots();
    opt.s_support = o.u_max * sigma0;
    opt.d_support = pd.f.support_radius();
    opt.d_breaks = d_knots;
    opt.quadrature.rel_tol = o.rel_tol;
    opt.quadrature.abs_tol = 1e-15;
  }

  // Returns the value and flags a truncated tail.
  double operator()(double m, bool& truncated) const {
    const auto r = correlation_integral(m, ps, pd, opt);
    if (!r.converged)
      throw NumericalError("reconstruct_w0: quadrature did not converge at M=" + std::to_string(m));
    // Integrand left beyond the Gaussian cutoff, bounded by its value there
    // times one Gaussian width.
    const double u = opt.s_support;
    double edge = 0.0;
    if (m < 0.0) {
      const double x = std::sqrt(u * u - 4.0 * m);
      edge = ps(u) * pd(x) / x;
    } else if (u * u > 4.0 * m) {
      const double x = std::sqrt(u * u - 4.0 * m);
      edge = ps(u) / u * pd(x);
    }
    if (8.0 * edge * ps.sigma > max_tail_fraction * std::abs(r.value)) truncated = true;
    return r.value;
  }
};

}  // namespace

double reconstruct_w0_at(const Density1D& p_d, double sigma0, double m, const ReconstructOptions& opt) {
  if (m == 0.0) throw std::invalid_argument("reconstruct_w0: M = 0 is log-singular");
  const W0Evaluator eval(p_d, sigma0, opt);
  bool truncated = false;
  const double v = eval(m, truncated);
  if (truncated) warn("reconstruct_w0: u-range tail truncation above tolerance");
  return v;
}

CorrelationDensity reconstruct_w0(const Density1D& p_d, double sigma0, const UniformAxis& m_axis,
                                  const ReconstructOptions& opt, Exec exec) {
  const W0Evaluator eval(p_d, sigma0, opt);
  auto w = make_correlation(m_axis, opt.eps0, Provenance::reconstructed, p_d.effective_samples);
  std::vector<char> truncated(m_axis.n, 0);
  parallel_for(
      m_axis.n,
      [&](std::size_t i) {
        if (w.excluded(i)) return;
        const double m = m_axis.center(i);
        if (m == 0.0) throw std::invalid_argument("reconstruct_w0: grid contains M=0");
        bool t = false;
        w.values[i] = eval(m, t);
        truncated[i] = t;
      },
      exec);
  if (std::any_of(truncated.begin(), truncated.end(), [](char t) { return t != 0; }))
    warn("reconstruct_w0: p_d support too narrow, u-range tail truncation above 1e-6");
  w.excluded_mass = estimate_excluded_mass(w);
  return w;
}

}  // namespace bhd
