#include "bhd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "bhd/diagnostics.hpp"
#include "bhd/errors.hpp"
#include "bhd/io.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/rng.hpp"
#include "bhd/simulator.hpp"

#ifndef BHD_VERSION
#define BHD_VERSION "0.0.0"
#endif

namespace bhd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json axis_json(const UniformAxis& a) { return {{"lo", a.lo}, {"hi", a.hi}, {"bins", a.n}}; }

UniformAxis axis_from(const json& j, const UniformAxis& fallback) {
  try {
    return UniformAxis(j.value("lo", fallback.lo), j.value("hi", fallback.hi),
                       j.value("bins", fallback.n));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("bad grid: ") + e.what());
  }
}

std::string mu_tag(double mu) { return "prcs_" + format_double(mu); }

double variance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

struct Dataset {
  std::string tag;
  double mu = 0.0;  // 0 for vacuum
  std::vector<DetectorRecord> records;  // sigma0 units after calibration
  Density1D p_d;                        // symmetrized
};

class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {}

  void stat(const std::string& name, const StatObject& obj) {
    export_plot_data(obj, dir_ / name);
    add(name, std::string(kind_name(obj)));
  }

  void add(const std::string& name, const std::string& kind) {
    entries_.push_back({{"path", name}, {"sha256", sha256_file(dir_ / name)}, {"kind", kind}});
  }

  const json& entries() const { return entries_; }

 private:
  fs::path dir_;
  json entries_ = json::array();
};

UniformAxis symmetric_axis(double half_width, std::size_t bins) {
  return UniformAxis(-half_width, half_width, bins);
}

PipelineResult run_stages(const PipelineConfig& cfg) {
  PipelineResult result;
  PipelineMetrics& metrics = result.metrics;
  ArtifactWriter out(cfg.output_dir);
  const auto& g = cfg.grids;

  // Datasets: vacuum first, then one PRCS per distinct mu.
  std::set<double> all_mus(cfg.joint_mus.begin(), cfg.joint_mus.end());
  all_mus.insert(cfg.correlation_mus.begin(), cfg.correlation_mus.end());
  std::vector<Dataset> sets;
  sets.push_back({"vacuum", 0.0, {}, {}});
  for (double mu : all_mus) sets.push_back({mu_tag(mu), mu, {}, {}});

  LOModel lo;
  lo.conv.sigma0 = cfg.sigma0;
  lo.excess_noise_db = cfg.excess_noise_db;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    SimulationConfig sim;
    sim.state = sets[i].mu == 0.0 ? StateSpec{Vacuum{}} : StateSpec{Prcs{sets[i].mu}};
    sim.lo = lo;
    sim.n_samples = cfg.n_samples;
    sim.seed = dataset_seed(cfg.seed, i);
    sets[i].records = simulate(sim);
    if (cfg.write_records) {
      save_records(sets[i].records, cfg.output_dir / ("records_" + sets[i].tag + ".bin"));
      out.add("records_" + sets[i].tag + ".bin", "records");
    }
  }

  // Calibration: the vacuum set fixes sigma0; everything else is rescaled.
  metrics.sigma0_hat = estimate_sigma0(sets[0].records);
  for (auto& s : sets) s.records = to_sigma0_units(s.records, metrics.sigma0_hat);

  // Quadrature densities, symmetrized.
  for (auto& s : sets) {
    const auto d = difference_samples(s.records);
    const auto sym = symmetrize(estimate_density_1d(d, g.quadrature));
    s.p_d = sym.symmetrized;
    metrics.asymmetry[s.tag] = sym.asymmetry_norm;
    out.stat("pd_" + s.tag + ".csv", s.p_d);
    metrics.negative_fraction[s.tag] = negative_product_fraction(s.records);
  }

  // Single-detector and sum-current histograms of the vacuum set.
  {
    const auto sums = sum_samples(sets[0].records);
    const double half = std::ceil(7.0 * std::sqrt(variance(sums)));
    out.stat("ps_vacuum.csv", estimate_density_1d(sums, symmetric_axis(half, 400)));
    std::vector<double> i1(sets[0].records.size());
    for (std::size_t k = 0; k < i1.size(); ++k) i1[k] = sets[0].records[k].i1;
    out.stat("i1_vacuum.csv", estimate_density_1d(i1, symmetric_axis(std::ceil(0.5 * half + 1.0), 400)));
  }

  // Mean photon numbers by fitting the difference-current histograms.
  std::map<double, double> mu_fit;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    const double fitted = fit_mu(sets[i].p_d);
    mu_fit[sets[i].mu] = fitted;
    metrics.mu_true.push_back(sets[i].mu);
    metrics.mu_hat.push_back(fitted);
  }
  auto find_set = [&](double mu) -> const Dataset& {
    for (const auto& s : sets)
      if (s.mu == mu) return s;
    throw std::logic_error("no dataset for mu");
  };
  auto mus_used = [&](const std::vector<double>& mus) {
    std::vector<double> out_mus;
    for (double mu : mus) out_mus.push_back(effective_mu(mu_fit.at(mu), cfg.eta));
    return out_mus;
  };
  auto invert = [&](const StatObject& l0, const std::vector<StatObject>& ls, const std::vector<double>& mus) {
    if (ls.size() == 1) return invert_single_mu(l0, ls[0], mus[0]);
    return invert_two_mu(l0, ls[0], ls[1], mus[0], mus[1]);
  };

  // Joint maps: raw (noisy LO) and ideal-LO reconstructions, then Fock 1.
  {
    double var_i1 = 0.0;
    std::vector<const Dataset*> joint_sets{&sets[0]};
    for (double mu : cfg.joint_mus) joint_sets.push_back(&find_set(mu));
    for (const auto* s : joint_sets) {
      std::vector<double> i1(s->records.size());
      for (std::size_t k = 0; k < i1.size(); ++k) i1[k] = s->records[k].i1;
      var_i1 = std::max(var_i1, variance(i1));
    }
    const auto raw_axis = symmetric_axis(std::ceil(7.0 * std::sqrt(var_i1)), g.raw_joint_bins);
    StatObject raw0, ideal0;
    std::vector<StatObject> raw_mu, ideal_mu;
    for (const auto* s : joint_sets) {
      StatObject raw = joint_histogram(s->records, raw_axis, raw_axis);
      StatObject ideal = reconstruct_joint_ideal(s->p_d, 1.0, g.joint, g.joint);
      out.stat("joint_raw_" + s->tag + ".csv", raw);
      out.stat("joint_ideal_" + s->tag + ".csv", ideal);
      if (s->mu == 0.0) {
        raw0 = std::move(raw);
        ideal0 = std::move(ideal);
      } else {
        raw_mu.push_back(std::move(raw));
        ideal_mu.push_back(std::move(ideal));
      }
    }
    const auto mus = mus_used(cfg.joint_mus);
    const auto raw_inv = invert(raw0, raw_mu, mus);
    const auto ideal_inv = invert(ideal0, ideal_mu, mus);
    out.stat("fock1_joint_raw.csv", raw_inv.l1);
    out.stat("fock1_joint_ideal.csv", ideal_inv.l1);
    const auto theory = theoretical_joint(Fock{1}, g.joint, g.joint);
    out.stat("fock1_joint_theory.csv", theory);
    metrics.C = overlap_2d(std::get<Density2D>(ideal_inv.l1), theory);
    metrics.masses["fock1_joint_ideal"] = ideal_inv.total_mass_l1;
  }

  // Correlation densities w0(M) and their inversion.
  {
    std::vector<const Dataset*> corr_sets{&sets[0]};
    for (double mu : cfg.correlation_mus) corr_sets.push_back(&find_set(mu));
    ReconstructOptions ropt;
    ropt.eps0 = g.eps0;
    StatObject w_vac, m_vac, pd_vac = sets[0].p_d;
    std::vector<StatObject> w_mu, m_mu, pd_mu;
    for (const auto* s : corr_sets) {
      StatObject w = reconstruct_w0(s->p_d, 1.0, g.correlation, ropt);
      StatObject wm = reconstruct_w0(s->p_d, 1.0, g.moments, ropt);
      out.stat("w0_" + s->tag + ".csv", w);
      metrics.means[s->tag] = std::get<CorrelationDensity>(wm).mean();
      if (s->mu == 0.0) {
        w_vac = std::move(w);
        m_vac = std::move(wm);
      } else {
        w_mu.push_back(std::move(w));
        m_mu.push_back(std::move(wm));
        pd_mu.push_back(s->p_d);
      }
    }
    const auto mus = mus_used(cfg.correlation_mus);
    const auto w_inv = invert(w_vac, w_mu, mus);
    const auto m_inv = invert(m_vac, m_mu, mus);
    const auto pd_inv = invert(pd_vac, pd_mu, mus);
    out.stat("w0_fock1.csv", w_inv.l1);
    out.stat("pd_fock1.csv", pd_inv.l1);
    metrics.means["fock1"] = std::get<CorrelationDensity>(m_inv.l1).mean();
    metrics.masses["w0_fock1"] = w_inv.total_mass_l1;
    metrics.masses["pd_fock1"] = pd_inv.total_mass_l1;
    const auto th1 = theoretical_w0(Fock{1}, g.correlation, g.eps0);
    out.stat("w0_theory_fock0.csv", theoretical_w0(Vacuum{}, g.correlation, g.eps0));
    out.stat("w0_theory_fock1.csv", th1);
    metrics.D1 = overlap_1d(std::get<CorrelationDensity>(w_inv.l1), th1);
    metrics.vogel["fock1"] = to_json(vogel_criterion(std::get<Density1D>(pd_inv.l1), 1.0));
    if (w_inv.l2) {
      out.stat("w0_fock2.csv", *w_inv.l2);
      out.stat("pd_fock2.csv", *pd_inv.l2);
      metrics.means["fock2"] = std::get<CorrelationDensity>(*m_inv.l2).mean();
      metrics.masses["w0_fock2"] = w_inv.total_mass_l2;
      metrics.masses["pd_fock2"] = pd_inv.total_mass_l2;
      const auto th2 = theoretical_w0(Fock{2}, g.correlation, g.eps0);
      out.stat("w0_theory_fock2.csv", th2);
      metrics.D2 = overlap_1d(std::get<CorrelationDensity>(*w_inv.l2), th2);
      metrics.vogel["fock2"] = to_json(vogel_criterion(std::get<Density1D>(*pd_inv.l2), 1.0));
    }
  }

  for (const auto& s : sets) metrics.vogel[s.tag] = to_json(vogel_criterion(s.p_d, 1.0));

  // Product statistics with the noisy LO, before any reconstruction.
  if (cfg.n_samples < kMinCorrelationRecords)
    warn("run_pipeline: fewer than 1e5 records per state, raw product histograms skipped");
  for (const auto& s : sets) {
    if (cfg.n_samples < kMinCorrelationRecords) break;
    const double var_s = variance(sum_samples(s.records));
    const double var_d = variance(difference_samples(s.records));
    const double half = std::ceil(4.0 * std::max(var_s, var_d));
    out.stat("w_raw_" + s.tag + ".csv",
             correlation_density_empirical(s.records, symmetric_axis(half, 800), g.eps0));
  }

  json m;
  m["sigma0_hat"] = metrics.sigma0_hat;
  m["mu_true"] = metrics.mu_true;
  m["mu_hat"] = metrics.mu_hat;
  m["C"] = metrics.C;
  m["D1"] = metrics.D1 ? json(*metrics.D1) : json(nullptr);
  m["D2"] = metrics.D2 ? json(*metrics.D2) : json(nullptr);
  m["vogel"] = metrics.vogel;
  m["mean_M"] = metrics.means;
  m["negative_product_fraction"] = metrics.negative_fraction;
  m["inverted_mass"] = metrics.masses;
  m["asymmetry_norm"] = metrics.asymmetry;

  json manifest;
  manifest["scenario"] = cfg.scenario;
  manifest["seed"] = cfg.seed;
  manifest["config"] = to_json(cfg);
  manifest["artifacts"] = out.entries();
  manifest["metrics"] = m;
  manifest["versions"] = {{"bhd", BHD_VERSION}, {"compiler", __VERSION__}, {"cxx", __cplusplus}};
  result.manifest = manifest;
  result.manifest_path = cfg.output_dir / "manifest.json";
  std::ofstream os(result.manifest_path);
  if (!os) throw IoError(result.manifest_path.string(), "cannot write manifest");
  os << manifest.dump(2) << '\n';
  if (!os) throw IoError(result.manifest_path.string(), "write failed");
  return result;
}

}  // namespace

std::uint64_t dataset_seed(std::uint64_t run_seed, std::size_t index) {
  std::uint64_t state = run_seed ^ (0x6a09e667f3bcc909ULL * (index + 1));
  return splitmix64(state);
}

void validate(const PipelineConfig& c) {
  auto check_mus = [](const std::vector<double>& mus, const char* name) {
    if (mus.empty() || mus.size() > 2)
      throw ConfigError(std::string(name) + ": need one or two nonzero mu values");
    for (double mu : mus)
      if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError(std::string(name) + ": mu must be > 0");
    if (mus.size() == 2 && mus[0] == mus[1]) throw ConfigError(std::string(name) + ": mu values must differ");
  };
  check_mus(c.joint_mus, "joint_mus");
  check_mus(c.correlation_mus, "correlation_mus");
  if (c.n_samples < 1000) throw ConfigError("samples must be >= 1000");
  if (!(c.excess_noise_db >= 0.0)) throw ConfigError("excess_db must be >= 0");
  if (!(c.sigma0 > 0.0)) throw ConfigError("sigma0 must be > 0");
  if (!(c.eta > 0.0) || c.eta > 1.0) throw ConfigError("eta must be in (0, 1]");
  if (!(c.grids.eps0 > 0.0)) throw ConfigError("eps0 must be > 0");
  if (!c.grids.quadrature.symmetric()) throw ConfigError("quadrature grid must be symmetric about 0");
  if (c.output_dir.empty()) throw ConfigError("output directory is empty");
}

json to_json(const PipelineConfig& c) {
  return {{"scenario", c.scenario},
          {"seed", c.seed},
          {"samples", c.n_samples},
          {"excess_db", c.excess_noise_db},
          {"sigma0", c.sigma0},
          {"eta", c.eta},
          {"joint_mus", c.joint_mus},
          {"correlation_mus", c.correlation_mus},
          {"write_records", c.write_records},
          {"grids",
           {{"quadrature", axis_json(c.grids.quadrature)},
            {"joint", axis_json(c.grids.joint)},
            {"correlation", axis_json(c.grids.correlation)},
            {"moments", axis_json(c.grids.moments)},
            {"raw_joint_bins", c.grids.raw_joint_bins},
            {"eps0", c.grids.eps0}}}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
  PipelineConfig c;
  try {
    c.scenario = j.value("scenario", c.scenario);
    c.seed = j.value("seed", c.seed);
    c.n_samples = j.value("samples", c.n_samples);
    c.excess_noise_db = j.value("excess_db", c.excess_noise_db);
    c.sigma0 = j.value("sigma0", c.sigma0);
    c.eta = j.value("eta", c.eta);
    c.joint_mus = j.value("joint_mus", c.joint_mus);
    c.correlation_mus = j.value("correlation_mus", c.correlation_mus);
    c.write_records = j.value("write_records", c.write_records);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("grids")) {
      const auto& g = j.at("grids");
      if (g.contains("quadrature")) c.grids.quadrature = axis_from(g.at("quadrature"), c.grids.quadrature);
      if (g.contains("joint")) c.grids.joint = axis_from(g.at("joint"), c.grids.joint);
      if (g.contains("correlation")) c.grids.correlation = axis_from(g.at("correlation"), c.grids.correlation);
      if (g.contains("moments")) c.grids.moments = axis_from(g.at("moments"), c.grids.moments);
      c.grids.raw_joint_bins = g.value("raw_joint_bins", c.grids.raw_joint_bins);
      c.grids.eps0 = g.value("eps0", c.grids.eps0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open config");
  try {
    return pipeline_config_from_json(json::parse(is, nullptr, true, true));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  validate(config);
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec) throw IoError(config.output_dir.string(), "cannot create output directory: " + ec.message());
  const auto marker = config.output_dir / ".partial";
  {
    std::ofstream m(marker);
    if (!m) throw IoError(marker.string(), "cannot write marker");
    m << "running\n";
  }
  try {
    auto result = run_stages(config);
    fs::remove(marker, ec);
    return result;
  } catch (const std::exception& e) {
    std::ofstream m(marker);
    m << "failed: " << e.what() << '\n';
    throw;
  }
}

}  // namespace bhd
