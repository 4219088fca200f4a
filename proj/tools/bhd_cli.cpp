#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bhd/errors.hpp"
#include "bhd/inversion.hpp"
#include "bhd/io.hpp"
#include "bhd/pipeline.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/simulator.hpp"
#include "bhd/statistics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> samples;
  std::optional<double> excess_db;
  std::vector<double> mu;
  std::optional<double> eta;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON config file");
  app->add_option("--seed", c.seed, "Run seed");
  app->add_option("--out", c.out, "Output path");
  app->add_option("--samples", c.samples, "Measurement pairs per state");
  app->add_option("--excess-db", c.excess_db, "LO excess noise (variance ratio, dB)");
  app->add_option("--mu", c.mu, "PRCS mean photon number(s)");
  app->add_option("--eta", c.eta, "Detector efficiency");
}

bhd::PipelineConfig pipeline_config(const Common& c, bool correlation_mus) {
  bhd::PipelineConfig cfg = c.config.empty() ? bhd::PipelineConfig{} : bhd::load_pipeline_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.samples) cfg.n_samples = *c.samples;
  if (c.excess_db) cfg.excess_noise_db = *c.excess_db;
  if (c.eta) cfg.eta = *c.eta;
  if (!c.out.empty()) cfg.output_dir = c.out;
  if (!c.mu.empty()) {
    if (correlation_mus)
      cfg.correlation_mus = c.mu;
    else
      cfg.joint_mus = c.mu;
  }
  return cfg;
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

int cmd_simulate(const Common& c, const std::string& state) {
  bhd::SimulationConfig sim;
  sim.state = bhd::parse_state(state);
  if (c.seed) sim.seed = *c.seed;
  if (c.samples) sim.n_samples = *c.samples;
  if (c.excess_db) sim.lo.excess_noise_db = *c.excess_db;
  if (!c.config.empty()) {
    const auto cfg = bhd::load_pipeline_config(c.config);
    sim.lo.conv.sigma0 = cfg.sigma0;
    if (!c.excess_db) sim.lo.excess_noise_db = cfg.excess_noise_db;
  }
  if (c.out.empty()) throw bhd::ConfigError("simulate: --out is required");
  const auto records = bhd::simulate(sim);
  bhd::save_records(records, c.out);
  print_json({{"state", bhd::describe(sim.state)}, {"samples", records.size()}, {"seed", sim.seed},
              {"path", c.out}, {"sha256", bhd::sha256_file(c.out)}});
  return 0;
}

int cmd_reconstruct(const Common& c, const std::string& records_path, const std::string& vacuum_path,
                    const std::string& kind, std::optional<double> sigma0) {
  if (c.out.empty()) throw bhd::ConfigError("reconstruct: --out is required");
  const auto cfg = pipeline_config(c, true);
  double s0 = sigma0.value_or(0.0);
  if (!sigma0) {
    if (vacuum_path.empty()) throw bhd::ConfigError("reconstruct: need --sigma0 or --vacuum");
    s0 = bhd::estimate_sigma0(bhd::load_records(vacuum_path));
  }
  const auto records = bhd::to_sigma0_units(bhd::load_records(records_path), s0);
  const auto p_d = bhd::symmetrize(
      bhd::estimate_density_1d(bhd::difference_samples(records), cfg.grids.quadrature)).symmetrized;
  bhd::StatObject result;
  if (kind == "pd") {
    result = p_d;
  } else if (kind == "joint") {
    result = bhd::reconstruct_joint_ideal(p_d, 1.0, cfg.grids.joint, cfg.grids.joint);
  } else if (kind == "w0") {
    bhd::ReconstructOptions opt;
    opt.eps0 = cfg.grids.eps0;
    result = bhd::reconstruct_w0(p_d, 1.0, cfg.grids.correlation, opt);
  } else if (kind == "w") {
    result = bhd::correlation_density_empirical(records, cfg.grids.correlation, cfg.grids.eps0);
  } else {
    throw bhd::ConfigError("reconstruct: unknown --kind '" + kind + "'");
  }
  bhd::export_plot_data(result, c.out);
  print_json({{"sigma0_hat", s0}, {"kind", std::string(bhd::kind_name(result))}, {"path", c.out}});
  return 0;
}

int cmd_invert(const Common& c, const std::vector<std::string>& inputs) {
  if (c.out.empty()) throw bhd::ConfigError("invert: --out prefix is required");
  if (inputs.size() != c.mu.size() + 1 || c.mu.empty() || c.mu.size() > 2)
    throw bhd::ConfigError("invert: give L0 plus one input per --mu (one or two)");
  std::vector<double> mus;
  for (double mu : c.mu) mus.push_back(bhd::effective_mu(mu, c.eta.value_or(1.0)));
  std::vector<bhd::StatObject> objs;
  for (const auto& p : inputs) objs.push_back(bhd::load_stat(p));
  const auto r = mus.size() == 1 ? bhd::invert_single_mu(objs[0], objs[1], mus[0])
                                 : bhd::invert_two_mu(objs[0], objs[1], objs[2], mus[0], mus[1]);
  json report{{"mus_used", r.mus_used}, {"mass_fock1", r.total_mass_l1}};
  bhd::export_plot_data(r.l1, c.out + "_fock1.csv");
  if (r.l2) {
    bhd::export_plot_data(*r.l2, c.out + "_fock2.csv");
    report["mass_fock2"] = r.total_mass_l2;
  }
  print_json(report);
  return 0;
}

int cmd_metrics(const std::string& input, const std::string& theory, bool vogel, bool fit) {
  const auto obj = bhd::load_stat(input);
  json report{{"input", input}, {"kind", std::string(bhd::kind_name(obj))}, {"mass", bhd::stat_mass(obj)}};
  if (!theory.empty()) {
    const auto state = bhd::parse_state(theory);
    if (const auto* p = std::get_if<bhd::Density2D>(&obj)) {
      report["C"] = bhd::overlap_2d(*p, bhd::theoretical_joint(state, p->x_axis, p->y_axis));
    } else if (const auto* w = std::get_if<bhd::CorrelationDensity>(&obj)) {
      report["D"] = bhd::overlap_1d(*w, bhd::theoretical_w0(state, w->axis, w->eps0));
    } else {
      const auto& d = std::get<bhd::Density1D>(obj);
      report["overlap"] = bhd::overlap_1d(d, bhd::analytic_density(state, d.axis));
    }
  }
  if (const auto* d = std::get_if<bhd::Density1D>(&obj)) {
    if (vogel) report["vogel"] = bhd::to_json(bhd::vogel_criterion(*d, 1.0));
    if (fit) report["mu_hat"] = bhd::fit_mu(*d);
  } else if (vogel || fit) {
    throw bhd::ConfigError("metrics: --vogel and --fit-mu need a quadrature density");
  }
  if (const auto* w = std::get_if<bhd::CorrelationDensity>(&obj)) report["mean_M"] = w->mean();
  print_json(report);
  return 0;
}

int cmd_run(const Common& c) {
  const auto result = bhd::run_pipeline(pipeline_config(c, true));
  print_json({{"manifest", result.manifest_path.string()}, {"metrics", result.manifest["metrics"]}});
  return 0;
}

int cmd_export(const Common& c, const std::string& input, const std::string& format) {
  if (c.out.empty()) throw bhd::ConfigError("export: --out is required");
  bhd::export_plot_data(bhd::load_stat(input), c.out, bhd::plot_format_from_string(format));
  return 0;
}

int cmd_verify(const std::string& manifest) {
  const auto check = bhd::verify_manifest(manifest);
  for (const auto& p : check.problems) std::cerr << "verify: " << p << '\n';
  std::cout << (check.ok ? "ok" : "FAILED") << '\n';
  return check.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced homodyne detection with noisy-LO reconstruction"};
  app.require_subcommand(1);

  Common c;
  auto* sim = app.add_subcommand("simulate", "Simulate detector records for one state");
  add_common(sim, c);
  std::string state = "vacuum";
  sim->add_option("--state", state, "vacuum | fock:N | coherent:A[:PHASE] | prcs:MU");

  auto* rec = app.add_subcommand("reconstruct", "Quadrature density, ideal-LO joint map or w0 from records");
  add_common(rec, c);
  std::string records_path, vacuum_path, kind = "w0";
  std::optional<double> sigma0;
  rec->add_option("--records", records_path, "Record file")->required();
  rec->add_option("--vacuum", vacuum_path, "Vacuum record file used to calibrate sigma0");
  rec->add_option("--sigma0", sigma0, "Known sigma0 (skips calibration)");
  rec->add_option("--kind", kind, "pd | joint | w0 | w");

  auto* inv = app.add_subcommand("invert", "Invert PRCS statistics to Fock 1 (and 2)");
  add_common(inv, c);
  std::vector<std::string> inputs;
  inv->add_option("inputs", inputs, "L0 then L_mu1 [L_mu2] (csv or json)")->required();

  auto* met = app.add_subcommand("metrics", "Overlap, Vogel test and mu fit for a saved statistic");
  std::string input, theory;
  bool vogel = false, fit = false;
  met->add_option("input", input, "Statistic file")->required();
  met->add_option("--theory", theory, "State to compare against, e.g. fock:1");
  met->add_flag("--vogel", vogel, "Run the Vogel nonclassicality test");
  met->add_flag("--fit-mu", fit, "Fit the PRCS mean photon number");

  auto* run = app.add_subcommand("run", "Full pipeline with manifest");
  add_common(run, c);

  auto* exp = app.add_subcommand("export", "Convert a saved statistic between csv and json");
  add_common(exp, c);
  std::string format = "json";
  exp->add_option("input", input, "Statistic file")->required();
  exp->add_option("--format", format, "csv | json");

  auto* ver = app.add_subcommand("verify", "Check artifact hashes listed in a manifest");
  std::string manifest;
  ver->add_option("manifest", manifest, "manifest.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(bhd::ExitCode::config);
  }

  try {
    if (*sim) return cmd_simulate(c, state);
    if (*rec) return cmd_reconstruct(c, records_path, vacuum_path, kind, sigma0);
    if (*inv) return cmd_invert(c, inputs);
    if (*met) return cmd_metrics(input, theory, vogel, fit);
    if (*run) return cmd_run(c);
    if (*exp) return cmd_export(c, input, format);
    if (*ver) return cmd_verify(manifest);
  } catch (const bhd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::config);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::config);
  } catch (const bhd::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::numerical);
  } catch (const bhd::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::io);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(bhd::ExitCode::numerical);
  }
  return 0;
}
