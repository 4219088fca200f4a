#include "bhd/density.hpp"

#include <cmath>
#include <stdexcept>

namespace bhd {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::empirical: return "empirical";
    case Provenance::analytic: return "analytic";
    case Provenance::reconstructed: return "reconstructed";
    case Provenance::inverted: return "inverted";
  }
  return "unknown";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "empirical") return Provenance::empirical;
  if (s == "analytic") return Provenance::analytic;
  if (s == "reconstructed") return Provenance::reconstructed;
  if (s == "inverted") return Provenance::inverted;
  throw std::invalid_argument("unknown provenance: " + std::string(s));
}

double Density1D::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * axis.width();
}

double Density2D::mass() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * x_axis.width() * y_axis.width();
}

std::vector<bool> exclusion_mask(const UniformAxis& axis, double eps0) {
  std::vector<bool> mask(axis.n, false);
  if (eps0 <= 0.0) return mask;
  const double tol = 1e-9 * axis.width();
  for (std::size_t i = 0; i < axis.n; ++i)
    mask[i] = axis.edge(i) < eps0 - tol && axis.edge(i + 1) > -eps0 + tol;
  return mask;
}

bool CorrelationDensity::excluded(std::size_t i) const {
  if (eps0 <= 0.0) return false;
  const double tol = 1e-9 * axis.width();
  return axis.edge(i) < eps0 - tol && axis.edge(i + 1) > -eps0 + tol;
}

double CorrelationDensity::covered_mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!excluded(i)) s += values[i];
  return s * axis.width();
}

double CorrelationDensity::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!excluded(i)) s += axis.center(i) * values[i];
  return s * axis.width();
}

namespace {

struct LogFit {
  double a = 0.0, b = 0.0;
  bool ok = false;
};

LogFit fit_log(const CorrelationDensity& w, std::size_t begin, std::size_t end) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = begin; i < end; ++i) {
    const double x = std::log(std::abs(w.axis.center(i)));
    const double y = w.values[i];
    n += 1; sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  LogFit f;
  const double det = n * sxx - sx * sx;
  if (n < 2 || std::abs(det) < 1e-300) return f;
  f.a = (n * sxy - sx * sy) / det;
  f.b = (sy - f.a * sx) / n;
  f.ok = true;
  return f;
}

// Integral of ln t over [0, t].
double log_primitive(double t) { return t > 0.0 ? t * std::log(t) - t : 0.0; }

}  // namespace

double estimate_excluded_mass(const CorrelationDensity& w, std::size_t fit_bins) {
  std::size_t first = w.axis.n, last = 0;
  for (std::size_t i = 0; i < w.axis.n; ++i) {
    if (w.excluded(i)) {
      if (first == w.axis.n) first = i;
      last = i;
    }
  }
  if (first == w.axis.n) return 0.0;
  const double left_edge = w.axis.edge(first);
  const double right_edge = w.axis.edge(last + 1);
  double mass = 0.0;

  if (left_edge < 0.0 && first > 0) {
    const std::size_t begin = first >= fit_bins ? first - fit_bins : 0;
    const LogFit f = fit_log(w, begin, first);
    if (f.ok) {
      const double p = -left_edge, q = std::max(0.0, -std::min(0.0, right_edge));
      mass += f.a * (log_primitive(p) - log_primitive(q)) + f.b * (p - q);
    }
  }
  if (right_edge > 0.0 && last + 1 < w.axis.n) {
    const std::size_t end = std::min(w.axis.n, last + 1 + fit_bins);
    const LogFit f = fit_log(w, last + 1, end);
    if (f.ok) {
      const double q = right_edge, p = std::max(0.0, left_edge);
      mass += f.a * (log_primitive(q) - log_primitive(p)) + f.b * (q - p);
    }
  }
  return mass;
}

std::string_view kind_name(const StatObject& obj) {
  switch (obj.index()) {
    case 0: return "density1d";
    case 1: return "density2d";
    default: return "correlation";
  }
}

}  // namespace bhd
