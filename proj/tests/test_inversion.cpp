#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "bhd/diagnostics.hpp"
#include "bhd/errors.hpp"
#include "bhd/inversion.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/simulator.hpp"
#include "bhd/statistics.hpp"

using namespace bhd;

namespace {

const UniformAxis kAxis(-8.0, 8.0, 320);

Density1D fock(int n) { return analytic_density(Fock{n}, kAxis); }

// Poisson mixture of Fock densities truncated at n_max, unnormalized as the
// inversion formulas expect: sum_{n <= n_max} e^-mu mu^n / n! L_n.
Density1D truncated_prcs(double mu, int n_max) {
  Density1D p = fock(0);
  std::fill(p.values.begin(), p.values.end(), 0.0);
  for (int n = 0; n <= n_max; ++n) {
    const double w = std::exp(-mu) * std::pow(mu, n) / std::tgamma(n + 1.0);
    const auto f = fock(n);
    for (std::size_t i = 0; i < p.values.size(); ++i) p.values[i] += w * f.values[i];
  }
  return p;
}

double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::max(scale, std::abs(want[i]));
    err = std::max(err, std::abs(got[i] - want[i]));
  }
  return err / scale;
}

Density1D empirical(StateSpec s, std::size_t n, std::uint64_t seed) {
  SimulationConfig c;
  c.state = s;
  c.n_samples = n;
  c.seed = seed;
  return estimate_density_1d(difference_samples(simulate(c)), kAxis);
}

}  // namespace

TEST_CASE("single-mu inversion is exact on inputs truncated at n = 1") {
  for (double mu : {0.05, 0.25, 0.8}) {
    const auto r = invert_single_mu(fock(0), truncated_prcs(mu, 1), mu);
    CHECK(max_rel_err(std::get<Density1D>(r.l1).values, fock(1).values) < 1e-12);
    CHECK(std::get<Density1D>(r.l1).provenance == Provenance::inverted);
    CHECK_FALSE(r.l2.has_value());
  }
}

TEST_CASE("two-mu inversion is exact on inputs truncated at n = 2") {
  for (auto [m1, m2] : {std::pair{0.27, 0.62}, std::pair{0.1, 0.9}, std::pair{1.2, 0.3}}) {
    const auto r = invert_two_mu(fock(0), truncated_prcs(m1, 2), truncated_prcs(m2, 2), m1, m2);
    CHECK(max_rel_err(std::get<Density1D>(r.l1).values, fock(1).values) < 1e-12);
    CHECK(max_rel_err(std::get<Density1D>(*r.l2).values, fock(2).values) < 1e-12);
  }
}

TEST_CASE("two-mu inversion is symmetric under swapping the inputs") {
  const auto a = truncated_prcs(0.27, 6), b = truncated_prcs(0.62, 6);
  const auto r = invert_two_mu(fock(0), a, b, 0.27, 0.62);
  const auto s = invert_two_mu(fock(0), b, a, 0.62, 0.27);
  CHECK(max_rel_err(std::get<Density1D>(s.l1).values, std::get<Density1D>(r.l1).values) < 1e-12);
  CHECK(max_rel_err(std::get<Density1D>(*s.l2).values,
                    std::get<Density1D>(*r.l2).values) < 1e-12);
}

TEST_CASE("residual bias from higher Fock terms has the expected leading form") {
  // With n = 3 admitted, L1 picks up -mu1 mu2 / 6 L3.
  const double m1 = 0.27, m2 = 0.62;
  const auto r = invert_two_mu(fock(0), truncated_prcs(m1, 3), truncated_prcs(m2, 3), m1, m2);
  const auto l3 = fock(3), l1 = fock(1);
  std::vector<double> want(l1.values.size());
  for (std::size_t i = 0; i < want.size(); ++i) want[i] = l1.values[i] - m1 * m2 / 6.0 * l3.values[i];
  CHECK(max_rel_err(std::get<Density1D>(r.l1).values, want) < 1e-12);
}

TEST_CASE("inversion is linear in its inputs") {
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_density = [&] {
    Density1D p = fock(0);
    for (auto& v : p.values) v = u(eng);
    return p;
  };
  const auto a0 = random_density(), a1 = random_density(), b0 = random_density(), b1 = random_density();
  const double alpha = 0.3, beta = -1.7;
  auto mix = [&](const Density1D& x, const Density1D& y) {
    Density1D z = x;
    for (std::size_t i = 0; i < z.values.size(); ++i) z.values[i] = alpha * x.values[i] + beta * y.values[i];
    return z;
  };
  const auto lhs = std::get<Density1D>(invert_single_mu(mix(a0, b0), mix(a1, b1), 0.4).l1);
  const auto ra = std::get<Density1D>(invert_single_mu(a0, a1, 0.4).l1);
  const auto rb = std::get<Density1D>(invert_single_mu(b0, b1, 0.4).l1);
  for (std::size_t i = 0; i < lhs.values.size(); ++i)
    CHECK(lhs.values[i] == doctest::Approx(alpha * ra.values[i] + beta * rb.values[i]).epsilon(1e-12));
}

TEST_CASE("inversion argument checks") {
  const auto p = fock(0);
  CHECK_THROWS_AS(invert_single_mu(p, p, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(invert_two_mu(p, p, p, 0.3, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(invert_two_mu(p, p, p, 0.3, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(invert_two_mu(p, p, p, 0.3, 0.3 * (1 + 1e-9)), NumericalError);
  const auto other = analytic_density(Vacuum{}, UniformAxis(-8.0, 8.0, 100));
  CHECK_THROWS_AS(invert_single_mu(p, other, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(invert_single_mu(p, theoretical_joint(Vacuum{}, kAxis, kAxis), 0.3), std::invalid_argument);
}

TEST_CASE("standard errors and effective samples propagate") {
  auto a = fock(0), b = fock(0);
  a.effective_samples = b.effective_samples = 1e6;
  std::fill(a.stderrs.begin(), a.stderrs.end(), 1e-3);
  std::fill(b.stderrs.begin(), b.stderrs.end(), 2e-3);
  const double mu = 0.5;
  const auto r = std::get<Density1D>(invert_single_mu(a, b, mu).l1);
  const double ca = 1.0 / mu, cb = std::exp(mu) / mu;
  CHECK(r.stderrs[10] == doctest::Approx(std::hypot(ca * 1e-3, cb * 2e-3)));
  CHECK(r.effective_samples == doctest::Approx(1e6 / (ca * ca + cb * cb)));
}

TEST_CASE("overlap bounds") {
  const auto p = fock(1), q = fock(2);
  CHECK(overlap_1d(p, p) == doctest::Approx(1.0).epsilon(1e-14));
  const double o = overlap_1d(p, q);
  CHECK(o > 0.0);
  CHECK(o < 1.0);
  auto scaled = p;
  for (auto& v : scaled.values) v *= 3.5;
  CHECK(overlap_1d(scaled, p) == doctest::Approx(1.0).epsilon(1e-14));
  auto zero = p;
  std::fill(zero.values.begin(), zero.values.end(), 0.0);
  CHECK_THROWS_AS(overlap_1d(zero, p), std::invalid_argument);
  const UniformAxis j(-6, 6, 40);
  const auto t1 = theoretical_joint(Fock{1}, j, j);
  CHECK(overlap_2d(t1, t1) == doctest::Approx(1.0));
  CHECK(overlap_2d(t1, theoretical_joint(Vacuum{}, j, j)) < 0.9);
}

TEST_CASE("correlation overlap skips the exclusion window") {
  const UniformAxis m(-4.0, 4.0, 400);
  auto w = theoretical_w0(Fock{1}, m, 0.02);
  auto v = w;
  for (std::size_t i = 0; i < m.n; ++i)
    if (v.excluded(i)) v.values[i] = 1e6;
  CHECK(overlap_1d(w, v) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mu fit recovers the mean photon number") {
  for (double mu : {0.0, 0.25, 0.62, 2.0}) CHECK(fit_mu(analytic_density(Prcs{mu}, kAxis)) == doctest::Approx(mu).epsilon(1e-3).scale(1.0));
  const auto p = empirical(Prcs{0.27}, 1'000'000, 5);
  CHECK(std::abs(fit_mu(p) - 0.27) < 0.005);
  WarningCapture cap;
  auto f3 = analytic_density(Fock{3}, kAxis);
  std::fill(f3.stderrs.begin(), f3.stderrs.end(), 1e-4);
  fit_mu(f3);
  CHECK(cap.contains("residual"));
}

TEST_CASE("Vogel criterion on analytic densities") {
  CHECK_FALSE(vogel_criterion(analytic_density(Vacuum{}, kAxis), 1.0).nonclassical);
  CHECK_FALSE(vogel_criterion(analytic_density(Prcs{0.62}, kAxis), 1.0).nonclassical);
  CHECK_FALSE(vogel_criterion(analytic_density(Coherent{1.0, 0.4}, kAxis), 1.0).nonclassical);
  for (int n : {1, 2, 5}) {
    const auto v = vogel_criterion(analytic_density(Fock{n}, kAxis), 1.0);
    CHECK(v.nonclassical);
    CHECK(v.max_excess > 0.1);
  }
}

TEST_CASE("Vogel criterion is silent on finite vacuum samples") {
  for (std::uint64_t seed = 100; seed < 105; ++seed) {
    const auto v = vogel_criterion(symmetrize(empirical(Vacuum{}, 200'000, seed)).symmetrized, 1.0);
    CHECK_FALSE(v.nonclassical);
  }
}
