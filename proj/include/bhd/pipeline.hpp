#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "bhd/axis.hpp"
#include "bhd/inversion.hpp"
#include "bhd/statistics.hpp"

namespace bhd {

struct GridConfig {
  UniformAxis quadrature = GridDefaults::quadrature();
  UniformAxis joint = GridDefaults::joint();
  UniformAxis correlation = GridDefaults::correlation();
  // Wide M grid used only for the first moment of w0.
  UniformAxis moments{-16.0, 16.0, 640};
  std::size_t raw_joint_bins = 160;
  double eps0 = GridDefaults::eps0;
};

// Full reconstruction run. Defaults mirror the reference experiment: 1e6
// pairs per state, 26 dB LO excess noise, PRCS mu = 0.25 for the joint maps
// and mu = 0.27, 0.62 for the correlation densities.
struct PipelineConfig {
  std::string scenario = "reference-defaults";
  std::uint64_t seed = 20190801;
  std::size_t n_samples = 1'000'000;
  double excess_noise_db = 26.0;
  double sigma0 = 1.0;  // shot-noise scale of the simulated raw records
  double eta = 1.0;     // common detector efficiency used in the inversion
  std::vector<double> joint_mus{0.25};
  std::vector<double> correlation_mus{0.27, 0.62};
  GridConfig grids{};
  std::filesystem::path output_dir = "bhd-out";
  bool write_records = false;
};

void validate(const PipelineConfig& config);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineMetrics {
  double sigma0_hat = 0.0;
  std::vector<double> mu_true;
  std::vector<double> mu_hat;
  double C = 0.0;
  std::optional<double> D1, D2;
  nlohmann::json vogel = nlohmann::json::object();
  nlohmann::json means = nlohmann::json::object();
  nlohmann::json negative_fraction = nlohmann::json::object();
  nlohmann::json masses = nlohmann::json::object();
  nlohmann::json asymmetry = nlohmann::json::object();
};

struct PipelineResult {
  PipelineMetrics metrics;
  nlohmann::json manifest;
  std::filesystem::path manifest_path;
};

// simulate -> sigma0 -> P_D per state -> fit mu -> P0 and w0 -> invert to
// Fock 1 (and 2) -> C, D, Vogel -> artifacts and manifest.json. On failure
// a ".partial" marker is left in the output directory and the error
// propagates.
PipelineResult run_pipeline(const PipelineConfig& config);

// Seed of the i-th dataset of a run, so each state draws from its own
// substreams while the signal streams do not depend on the LO settings.
std::uint64_t dataset_seed(std::uint64_t run_seed, std::size_t index);

}  // namespace bhd
