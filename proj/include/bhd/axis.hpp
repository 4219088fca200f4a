#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

namespace bhd {

// Uniform binning of [lo, hi) into n equal bins. Values live at bin centers.
struct UniformAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 1;

  UniformAxis() = default;
  UniformAxis(double lo_, double hi_, std::size_t n_) : lo(lo_), hi(hi_), n(n_) {
    if (!(hi > lo) || n == 0 || !std::isfinite(lo) || !std::isfinite(hi))
      throw std::invalid_argument("UniformAxis: need finite lo < hi and n > 0");
  }

  double width() const { return (hi - lo) / static_cast<double>(n); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
  double edge(std::size_t i) const { return lo + static_cast<double>(i) * width(); }

  // Bin index containing x, or nullopt when x is outside [lo, hi).
  std::optional<std::size_t> index_of(double x) const {
    if (!(x >= lo) || !(x < hi)) return std::nullopt;
    auto i = static_cast<std::size_t>((x - lo) / width());
    return i < n ? i : n - 1;
  }

  bool symmetric() const { return std::abs(lo + hi) <= 1e-12 * (hi - lo); }

  friend bool operator==(const UniformAxis&, const UniformAxis&) = default;
};

}  // namespace bhd
