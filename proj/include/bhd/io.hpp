#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "bhd/density.hpp"
#include "bhd/inversion.hpp"
#include "bhd/simulator.hpp"

namespace bhd {

enum class PlotFormat { csv, json };

PlotFormat plot_format_from_string(const std::string& s);

// Writes a statistic with its grid. CSV layouts:
//   Density1D:          "# kind=density1d ..." then "x,density,stderr"
//   Density2D:          "# kind=density2d ..." then a matrix whose first row
//                       holds x centers and first column y centers
//   CorrelationDensity: "# kind=correlation ... eps0=..." then
//                       "M,density,stderr,excluded"
// Numbers use shortest round-trip formatting, so load_stat restores values
// bitwise.
void export_plot_data(const StatObject& artifact, const std::filesystem::path& path,
                      PlotFormat format = PlotFormat::csv);
StatObject load_stat(const std::filesystem::path& path);

nlohmann::json to_json(const StatObject& artifact);
StatObject stat_from_json(const nlohmann::json& j);
nlohmann::json to_json(const VogelResult& v);

// Binary record file: "BHDREC01", uint64 count, then (i1, i2) doubles in
// host (little-endian) byte order.
void save_records(std::span<const DetectorRecord> records, const std::filesystem::path& path);
std::vector<DetectorRecord> load_records(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

struct ManifestCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

// Recomputes the hash of every artifact listed in a manifest (paths are
// relative to the manifest's directory).
ManifestCheck verify_manifest(const std::filesystem::path& manifest_path);

std::string format_double(double v);

}  // namespace bhd
