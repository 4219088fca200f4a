#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bhd/axis.hpp"

namespace bhd {

enum class Provenance { empirical, analytic, reconstructed, inverted };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

inline constexpr double kInfiniteSamples = std::numeric_limits<double>::infinity();

// Density on a uniform 1D grid, values per unit x at bin centers.
struct Density1D {
  UniformAxis axis;
  std::vector<double> values;
  std::vector<double> stderrs;  // per-bin standard error; zero for analytic
  double total_mass = 0.0;
  Provenance provenance = Provenance::empirical;
  // Sample count behind the estimate. Inversions carry an effective count
  // reflecting noise amplification; analytic densities are infinite.
  double effective_samples = kInfiniteSamples;
  std::size_t overflow = 0;

  double mass() const;  // recomputes sum(values) * dx
};

// Density on a uniform 2D grid; values stored row-major with y as the row
// index: values[iy * x_axis.n + ix].
struct Density2D {
  UniformAxis x_axis;
  UniformAxis y_axis;
  std::vector<double> values;
  Provenance provenance = Provenance::empirical;
  double effective_samples = kInfiniteSamples;
  std::size_t overflow = 0;

  double at(std::size_t ix, std::size_t iy) const { return values[iy * x_axis.n + ix]; }
  double& at(std::size_t ix, std::size_t iy) { return values[iy * x_axis.n + ix]; }
  double mass() const;
};

// Density of the detector-output product M on a uniform grid. Bins whose
// interval meets the open window (-eps0, eps0) are excluded: their values
// are zero and they take no part in integrals or overlaps.
struct CorrelationDensity {
  UniformAxis axis;
  double eps0 = 0.02;
  std::vector<double> values;
  std::vector<double> stderrs;
  Provenance provenance = Provenance::empirical;
  double effective_samples = kInfiniteSamples;
  std::size_t overflow = 0;
  double excluded_mass = 0.0;  // estimated mass inside the window

  bool excluded(std::size_t i) const;
  double covered_mass() const;
  double total_mass() const { return covered_mass() + excluded_mass; }
  double mean() const;  // integral of M w(M) over covered bins
};

// Mask of bins intersecting the open window (-eps0, eps0).
std::vector<bool> exclusion_mask(const UniformAxis& axis, double eps0);

// Fits a ln|M| + b on the `fit_bins` included bins adjacent to the window on
// each side and integrates the fits across the window.
double estimate_excluded_mass(const CorrelationDensity& w, std::size_t fit_bins = 10);

using StatObject = std::variant<Density1D, Density2D, CorrelationDensity>;

std::string_view kind_name(const StatObject& obj);

}  // namespace bhd
