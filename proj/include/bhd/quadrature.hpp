#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

namespace bhd {

struct QuadratureOptions {
  double rel_tol = 1e-7;
  double abs_tol = 1e-14;
  int max_intervals = 20000;
  int initial_panels = 8;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kKronrodNodes[j];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod integration over the panels delimited by
// sorted `breaks`: the panel with the largest error estimate is bisected
// until the summed error meets the tolerance. Breakpoints should sit on any
// kinks of the integrand.
template <class F>
QuadratureResult integrate_adaptive(F&& f, std::span<const double> breaks,
                                    const QuadratureOptions& opt = {}) {
  QuadratureResult r;
  std::priority_queue<detail::Panel> heap;
  double value = 0.0, error = 0.0;
  int count = 0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto p = detail::gauss_kronrod_15(f, breaks[i], breaks[i + 1]);
    value += p.value;
    error += p.error;
    heap.push(p);
    ++count;
  }
  const int limit = std::max(opt.max_intervals, count);
  while (!heap.empty() && error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value)) &&
         count < limit) {
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // hit floating-point resolution
      heap.push(worst);
      break;
    }
    auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed accumulated cancellation from the running updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  r.value = value;
  r.error = error;
  r.intervals = count;
  r.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
  return r;
}

template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (!(b > a)) {
    QuadratureResult r;
    r.converged = true;
    return r;
  }
  const int panels = std::max(1, opt.initial_panels);
  std::vector<double> breaks(static_cast<std::size_t>(panels) + 1);
  for (int i = 0; i <= panels; ++i) breaks[i] = a + (b - a) * i / panels;
  breaks.back() = b;
  return integrate_adaptive(f, std::span<const double>(breaks), opt);
}

}  // namespace bhd
