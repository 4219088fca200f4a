// Acceptance suite: one PASS/FAIL line per criterion, exit status = number
// of failed criteria not listed with --known.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#include "bhd/inversion.hpp"
#include "bhd/io.hpp"
#include "bhd/pipeline.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/simulator.hpp"
#include "bhd/statistics.hpp"

using namespace bhd;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSeeds = 5;
constexpr int kVacuumSeeds = 20;
constexpr std::uint64_t kBaseSeed = 20190801;

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

std::string list(const std::vector<double>& v, int prec = 4) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], prec);
  return s + "]";
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double l1_distance(const StatObject& a, const StatObject& b) {
  return std::visit(
      [&](const auto& x) -> double {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b);
        double s = 0.0;
        if constexpr (std::is_same_v<T, Density2D>) {
          for (std::size_t i = 0; i < x.values.size(); ++i) s += std::abs(x.values[i] - y.values[i]);
          return s * x.x_axis.width() * x.y_axis.width();
        } else {
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if constexpr (std::is_same_v<T, CorrelationDensity>)
              if (x.excluded(i)) continue;
            s += std::abs(x.values[i] - y.values[i]);
          }
          return s * x.axis.width();
        }
      },
      a);
}

fs::path work_dir() {
  const auto d = fs::temp_directory_path() / "bhd_acceptance";
  fs::create_directories(d);
  return d;
}

PipelineResult run(std::uint64_t seed, double db, const std::string& name) {
  PipelineConfig c;
  c.scenario = "acceptance";
  c.seed = seed;
  c.excess_noise_db = db;
  c.output_dir = work_dir() / name;
  fs::remove_all(c.output_dir);
  return run_pipeline(c);
}

double max_rel_err(const StatObject& got, const StatObject& want) {
  return std::visit(
      [&](const auto& w) {
        const auto& g = std::get<std::decay_t<decltype(w)>>(got);
        double scale = 0.0, err = 0.0;
        for (std::size_t i = 0; i < w.values.size(); ++i) {
          scale = std::max(scale, std::abs(w.values[i]));
          err = std::max(err, std::abs(g.values[i] - w.values[i]));
        }
        return err / scale;
      },
      want);
}

// sum_{n <= n_max} e^-mu mu^n / n! L_n for a family of Fock statistics.
StatObject truncated_mixture(const std::vector<StatObject>& fock, double mu, int n_max) {
  std::vector<double> c;
  std::vector<const StatObject*> objs;
  for (int n = 0; n <= n_max; ++n) {
    c.push_back(oracle::poisson(mu, static_cast<unsigned>(n)));
    objs.push_back(&fock[n]);
  }
  return linear_combination(c, objs);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a.rfind("--known=", 0) == 0) {
      std::istringstream is(a.substr(8));
      std::string tok;
      while (std::getline(is, tok, ',')) known.insert(std::stoi(tok));
    }
  }

  std::vector<Outcome> out;
  std::vector<PipelineResult> runs;
  for (int k = 0; k < kSeeds; ++k) runs.push_back(run(kBaseSeed + k, 26.0, "seed" + std::to_string(k)));

  auto metric = [&](const char* key) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(r.manifest["metrics"][key].get<double>());
    return v;
  };

  {
    const auto c = metric("C");
    const bool pass = *std::min_element(c.begin(), c.end()) >= 0.99 && median(c) >= 0.993;
    out.push_back({1, "joint-map overlap C (Fock 1, mu = 0.25, 26 dB)", pass,
                   "C = " + list(c) + ", median " + fmt(median(c)) + " (need all >= 0.99, median >= 0.993)"});
  }
  {
    const auto d1 = metric("D1"), d2 = metric("D2");
    const bool pass = *std::min_element(d1.begin(), d1.end()) >= 0.995 &&
                      *std::min_element(d2.begin(), d2.end()) >= 0.97;
    out.push_back({2, "correlation overlaps D (Fock 1, 2; mu = 0.27, 0.62)", pass,
                   "D1 = " + list(d1) + " (>= 0.995), D2 = " + list(d2) + " (>= 0.97)"});
  }
  {
    std::vector<double> dist;
    for (const auto& r : runs) {
      const auto w = std::get<CorrelationDensity>(load_stat(r.manifest_path.parent_path() / "w0_vacuum.csv"));
      double s = 0.0;
      for (std::size_t i = 0; i < w.axis.n; ++i) {
        const double m = w.axis.center(i);
        if (w.excluded(i) || std::abs(m) < 0.05 || std::abs(m) > 4.0) continue;
        s += std::abs(w.values[i] - oracle::vacuum_w0(m)) * w.axis.width();
      }
      dist.push_back(s);
    }
    const bool pass = *std::max_element(dist.begin(), dist.end()) < 0.01;
    out.push_back({3, "vacuum w0 against (2/pi) K0(2|M|)", pass, "L1 on |M| in [0.05, 4] = " + list(dist, 3) + " (< 0.01)"});
  }
  {
    bool pass = true;
    std::string detail;
    for (double mu : {0.27, 0.62}) {
      std::vector<double> v;
      for (const auto& r : runs) {
        v.push_back(r.manifest["metrics"]["mean_M"]["prcs_" + format_double(mu)].get<double>());
        pass = pass && std::abs(v.back() + mu / 2) <= 0.05 * mu / 2;
      }
      detail += "<M>(mu=" + fmt(mu) + ") = " + list(v) + " vs " + fmt(-mu / 2) + " +-5%; ";
    }
    std::vector<double> f1;
    for (const auto& r : runs) {
      f1.push_back(r.manifest["metrics"]["mean_M"]["fock1"].get<double>());
      pass = pass && std::abs(f1.back() + 0.5) <= 0.07 * 0.5;
    }
    // Value the two-mu inversion converges to with infinitely many samples:
    // each PRCS has <M> = -mu/2 exactly, so invert those scalars directly.
    auto scalar = [](double v) {
      Density1D d{UniformAxis(0.0, 1.0, 1), {v}, {0.0}};
      return StatObject{d};
    };
    const auto lim = invert_two_mu(scalar(0.0), scalar(-0.27 / 2), scalar(-0.62 / 2), 0.27, 0.62);
    const double limit = std::get<Density1D>(lim.l1).values[0];
    detail += "<M>(inverted Fock 1) = " + list(f1) + " vs -0.5 +-7% (infinite-sample limit of the inversion " +
              fmt(limit) + ")";
    out.push_back({4, "anti-correlation means", pass, detail});
  }
  {
    // Same seed, so the signal substreams match; only the LO noise differs.
    const auto quiet = run(kBaseSeed, 0.0, "lo_0db");
    const fs::path a = runs[0].manifest_path.parent_path(), b = quiet.manifest_path.parent_path();
    std::vector<double> d;
    for (const char* f : {"fock1_joint_ideal.csv", "w0_fock1.csv", "pd_fock1.csv"})
      d.push_back(l1_distance(load_stat(a / f), load_stat(b / f)));
    const bool pass = *std::max_element(d.begin(), d.end()) < 0.02;
    out.push_back({5, "LO-noise immunity (0 dB vs 26 dB)", pass,
                   "L1 of Fock-1 joint/w0/P_D = " + list(d, 3) + " (< 0.02)"});
  }
  {
    bool pass = true;
    int fired_fock = 0, silent_ref = 0, refs = 0;
    for (const auto& r : runs) {
      const auto& v = r.manifest["metrics"]["vogel"];
      for (const char* k : {"fock1", "fock2"}) fired_fock += v[k]["nonclassical"].get<bool>();
      for (const char* k : {"vacuum", "prcs_0.27", "prcs_0.62"}) {
        ++refs;
        silent_ref += !v[k]["nonclassical"].get<bool>();
      }
    }
    pass = fired_fock == 2 * kSeeds && silent_ref == refs;
    int false_pos = 0;
    for (int k = 0; k < kVacuumSeeds; ++k) {
      SimulationConfig sim;
      sim.state = Vacuum{};
      sim.lo.excess_noise_db = 26.0;
      sim.seed = dataset_seed(kBaseSeed + 1000 + k, 0);
      const auto rec = simulate(sim);
      const auto scaled = to_sigma0_units(rec, estimate_sigma0(rec));
      const auto p = symmetrize(estimate_density_1d(difference_samples(scaled), GridDefaults::quadrature())).symmetrized;
      false_pos += vogel_criterion(p, 1.0).nonclassical;
    }
    pass = pass && false_pos == 0;
    out.push_back({6, "Vogel criterion", pass,
                   "fired on " + std::to_string(fired_fock) + "/" + std::to_string(2 * kSeeds) +
                       " inverted Fock 1/2, silent on " + std::to_string(silent_ref) + "/" + std::to_string(refs) +
                       " vacuum/PRCS, false positives " + std::to_string(false_pos) + "/" +
                       std::to_string(kVacuumSeeds) + " vacuum seeds"});
  }
  {
    // (a) inversion on truncated mixtures, for every statistic kind
    const UniformAxis q(-8.0, 8.0, 320), j(-6.0, 6.0, 60), m(-4.0, 4.0, 400);
    double inv_err = 0.0;
    for (int kind = 0; kind < 3; ++kind) {
      std::vector<StatObject> fock;
      for (int n = 0; n <= 2; ++n) {
        if (kind == 0) fock.push_back(analytic_density(Fock{n}, q));
        if (kind == 1) fock.push_back(theoretical_joint(Fock{n}, j, j));
        if (kind == 2) fock.push_back(theoretical_w0(Fock{n}, m, 0.02));
      }
      const auto single = invert_single_mu(fock[0], truncated_mixture(fock, 0.25, 1), 0.25);
      inv_err = std::max(inv_err, max_rel_err(single.l1, fock[1]));
      const auto two = invert_two_mu(fock[0], truncated_mixture(fock, 0.27, 2), truncated_mixture(fock, 0.62, 2), 0.27, 0.62);
      inv_err = std::max({inv_err, max_rel_err(two.l1, fock[1]), max_rel_err(*two.l2, fock[2])});
    }
    // (b) u-substituted quadrature against tanh-sinh on the raw form
    double quad_err = 0.0;
    const std::vector<double> ms{-3.0, -1.2, -0.5, -0.1, -0.03};
    for (int n : {1, 2}) {
      const auto w = theoretical_w0(Fock{n}, ms);
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double ref = oracle::raw_w0(ms[i], [n](double x) { return oracle::fock_pdf(n, x); });
        quad_err = std::max(quad_err, std::abs(w[i] / ref - 1.0));
      }
    }
    for (double mu : {0.27, 0.62}) {
      const auto w = theoretical_w0(Prcs{mu}, ms);
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const double ref = oracle::raw_w0(ms[i], [mu](double x) { return oracle::prcs_pdf(mu, x); });
        quad_err = std::max(quad_err, std::abs(w[i] / ref - 1.0));
      }
    }
    // (c) marginal-convolution path against the product histogram
    std::vector<double> conv_l1;
    for (double db : {0.0, 26.0}) {
      SimulationConfig sim;
      sim.state = Prcs{0.62};
      sim.lo.excess_noise_db = db;
      sim.seed = kBaseSeed + 7;
      const auto rec = simulate(sim);
      const double s_half = std::ceil(7.0 * std::sqrt(sim.lo.sum_variance()));
      const double m_half = std::ceil(4.0 * std::max(sim.lo.sum_variance(), 2.24));
      const UniformAxis s_axis(-s_half, s_half, 2 * static_cast<std::size_t>(20 * s_half));
      const UniformAxis m_axis(-m_half, m_half, 800);
      const auto direct = correlation_density_empirical(rec, m_axis);
      const auto conv = correlation_density_convolution(estimate_density_1d(sum_samples(rec), s_axis),
                                                        estimate_density_1d(difference_samples(rec), GridDefaults::quadrature()),
                                                        m_axis);
      conv_l1.push_back(l1_distance(direct, conv));
    }
    const bool pass = inv_err < 1e-12 && quad_err < 1e-6 && *std::max_element(conv_l1.begin(), conv_l1.end()) < 0.02;
    out.push_back({7, "exactness oracles", pass,
                   "inversion rel err " + fmt(inv_err, 3) + " (< 1e-12), quadrature rel err " + fmt(quad_err, 3) +
                       " (< 1e-6), convolution vs product histogram L1 at 0/26 dB = " + list(conv_l1, 3) + " (< 0.02)"});
  }
  {
    bool pass = true;
    std::vector<double> worst_mu, s0 = metric("sigma0_hat");
    for (const auto& r : runs) {
      const auto& mt = r.manifest["metrics"];
      double w = 0.0;
      for (std::size_t i = 0; i < mt["mu_true"].size(); ++i)
        w = std::max(w, std::abs(mt["mu_hat"][i].get<double>() - mt["mu_true"][i].get<double>()));
      worst_mu.push_back(w);
      pass = pass && w <= 0.005;
    }
    for (double s : s0) pass = pass && std::abs(s - 1.0) <= 2e-3;
    out.push_back({8, "calibration (mu fit, sigma0)", pass,
                   "max |mu_hat - mu| per seed = " + list(worst_mu, 3) + " (<= 0.005), sigma0_hat = " + list(s0, 6) +
                       " (1 +- 0.2%)"});
  }

  int unexpected = 0;
  for (const auto& o : out) {
    std::cout << "criterion " << o.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.name << ": " << o.detail;
    if (!o.pass && known.count(o.id)) std::cout << " [known limitation]";
    std::cout << '\n';
    if (!o.pass && !known.count(o.id)) ++unexpected;
  }
  return unexpected;
}
