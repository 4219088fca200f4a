#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "bhd/errors.hpp"
#include "bhd/io.hpp"
#include "bhd/pipeline.hpp"
#include "bhd/quantum_states.hpp"
#include "bhd/statistics.hpp"

using namespace bhd;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "bhd_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string first_lines(const fs::path& p, int n) {
  std::ifstream is(p);
  std::string out, line;
  for (int i = 0; i < n && std::getline(is, line); ++i) out += line + "\n";
  return out;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Density1D noisy_1d() {
  auto p = analytic_density(Prcs{0.27}, UniformAxis(-8.0, 8.0, 320));
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    p.values[i] *= 1.0 + 1e-3 * std::sin(1.7 * i);  // non-representable decimals
    p.stderrs[i] = 1.0 / 3.0 * 1e-4;
  }
  p.provenance = Provenance::empirical;
  p.effective_samples = 1e6;
  return p;
}

}  // namespace

TEST_CASE("Density1D round-trips bitwise through CSV and JSON") {
  const auto p = noisy_1d();
  for (auto fmt : {PlotFormat::csv, PlotFormat::json}) {
    const auto path = scratch(fmt == PlotFormat::csv ? "p1.csv" : "p1.json");
    export_plot_data(p, path, fmt);
    const auto q = std::get<Density1D>(load_stat(path));
    CHECK(bitwise_equal(p.values, q.values));
    CHECK(bitwise_equal(p.stderrs, q.stderrs));
    CHECK(q.axis == p.axis);
    CHECK(q.provenance == p.provenance);
    CHECK(q.effective_samples == p.effective_samples);
  }
  const auto head = first_lines(scratch("p1.csv"), 2);
  CHECK(head.rfind("# kind=density1d", 0) == 0);
  CHECK(head.find("\nx,density,stderr\n") != std::string::npos);
}

TEST_CASE("Density2D round-trips as a matrix with axes in the first row and column") {
  const UniformAxis x(-6.0, 6.0, 30), y(-5.0, 5.0, 20);
  auto p = theoretical_joint(Fock{1}, x, y);
  p.values[7] = -1.0 / 7.0;  // negative values survive
  const auto path = scratch("p2.csv");
  export_plot_data(p, path);
  const auto q = std::get<Density2D>(load_stat(path));
  CHECK(bitwise_equal(p.values, q.values));
  CHECK(q.x_axis == x);
  CHECK(q.y_axis == y);
  const auto head = first_lines(path, 3);
  std::istringstream is(head);
  std::string meta, axis_row, row;
  std::getline(is, meta);
  std::getline(is, axis_row);
  std::getline(is, row);
  CHECK(meta.rfind("# kind=density2d", 0) == 0);
  CHECK(std::count(axis_row.begin(), axis_row.end(), ',') == 30);
  CHECK(std::stod(axis_row.substr(axis_row.find(',') + 1)) == doctest::Approx(x.center(0)));
  CHECK(std::stod(row) == doctest::Approx(y.center(0)));
}

TEST_CASE("CorrelationDensity records the exclusion window") {
  auto w = theoretical_w0(Fock{2}, UniformAxis(-4.0, 4.0, 400), 0.02);
  w.provenance = Provenance::reconstructed;
  for (auto fmt : {PlotFormat::csv, PlotFormat::json}) {
    const auto path = scratch(fmt == PlotFormat::csv ? "w.csv" : "w.json");
    export_plot_data(w, path, fmt);
    const auto q = std::get<CorrelationDensity>(load_stat(path));
    CHECK(bitwise_equal(w.values, q.values));
    CHECK(q.eps0 == w.eps0);
    CHECK(q.excluded_mass == w.excluded_mass);
    CHECK(q.provenance == Provenance::reconstructed);
  }
  const auto head = first_lines(scratch("w.csv"), 2);
  CHECK(head.find("eps0=0.02") != std::string::npos);
  CHECK(head.find("excluded_window=[") != std::string::npos);
  CHECK(head.find("\nM,density,stderr,excluded\n") != std::string::npos);
}

TEST_CASE("record files round-trip") {
  std::vector<DetectorRecord> r{{1.0 / 3.0, -2.5}, {1e-300, 7e12}};
  const auto path = scratch("r.bin");
  save_records(r, path);
  const auto back = load_records(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].i1 == r[0].i1);
  CHECK(back[1].i2 == r[1].i2);
  std::ofstream(scratch("bad.bin")) << "nope";
  CHECK_THROWS_AS(load_records(scratch("bad.bin")), IoError);
}

TEST_CASE("IO errors carry the path") {
  try {
    load_stat("/nonexistent/dir/x.csv");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.path() == "/nonexistent/dir/x.csv");
  }
  std::ofstream(scratch("junk.csv")) << "hello\n";
  CHECK_THROWS_AS(load_stat(scratch("junk.csv")), IoError);
  CHECK_THROWS_AS(plot_format_from_string("xml"), ConfigError);
}

TEST_CASE("sha256 of a known string") {
  std::ofstream(scratch("abc.txt"), std::ios::binary) << "abc";
  CHECK(sha256_file(scratch("abc.txt")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("manifest verification detects tampering") {
  const auto dir = scratch("manifest_case");
  fs::create_directories(dir);
  export_plot_data(noisy_1d(), dir / "a.csv");
  nlohmann::json m;
  m["artifacts"] = {{{"path", "a.csv"}, {"sha256", sha256_file(dir / "a.csv")}, {"kind", "density1d"}}};
  std::ofstream(dir / "manifest.json") << m.dump();
  CHECK(verify_manifest(dir / "manifest.json").ok);
  {
    std::ofstream os(dir / "a.csv", std::ios::app);
    os << "0,0,0\n";
  }
  const auto check = verify_manifest(dir / "manifest.json");
  CHECK_FALSE(check.ok);
  REQUIRE(check.problems.size() == 1);
  CHECK(check.problems[0].find("a.csv") != std::string::npos);
  fs::remove(dir / "a.csv");
  CHECK_FALSE(verify_manifest(dir / "manifest.json").ok);
}

TEST_CASE("pipeline config parsing and validation") {
  const auto c = pipeline_config_from_json(nlohmann::json::parse(
      R"({"seed": 5, "samples": 200000, "excess_db": 0, "correlation_mus": [0.3],
          "grids": {"correlation": {"lo": -2, "hi": 2, "bins": 100}}})"));
  CHECK(c.seed == 5);
  CHECK(c.correlation_mus == std::vector<double>{0.3});
  CHECK(c.grids.correlation == UniformAxis(-2.0, 2.0, 100));
  CHECK(c.joint_mus == std::vector<double>{0.25});
  validate(c);
  const auto round = pipeline_config_from_json(to_json(c));
  CHECK(to_json(round) == to_json(c));

  auto bad = c;
  bad.correlation_mus = {0.3, 0.3};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.eta = 1.5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = c;
  bad.joint_mus = {};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::parse(R"({"seed": "x"})")), ConfigError);
  CHECK_THROWS_AS(load_pipeline_config("/nonexistent.json"), IoError);
}

TEST_CASE("pipeline runs are deterministic and leave a verifiable manifest") {
  PipelineConfig c;
  c.n_samples = 100'000;
  c.grids.moments = UniformAxis(-12.0, 12.0, 240);
  c.output_dir = scratch("run_a");
  fs::remove_all(c.output_dir);
  const auto a = run_pipeline(c);
  CHECK_FALSE(fs::exists(c.output_dir / ".partial"));
  CHECK(verify_manifest(a.manifest_path).ok);
  c.output_dir = scratch("run_b");
  fs::remove_all(c.output_dir);
  const auto b = run_pipeline(c);
  CHECK(a.manifest["artifacts"] == b.manifest["artifacts"]);
  CHECK(a.manifest["metrics"] == b.manifest["metrics"]);
  for (const auto& art : a.manifest["artifacts"]) {
    CHECK(art.contains("sha256"));
    CHECK(art.contains("kind"));
  }
  const auto& m = a.manifest["metrics"];
  for (const char* key : {"sigma0_hat", "mu_hat", "C", "D1", "D2", "vogel"}) CHECK(m.contains(key));
}

TEST_CASE("failed runs leave a partial marker") {
  PipelineConfig c;
  c.n_samples = 100'000;
  // A quadrature grid too narrow for a PRCS makes the histogram overflow.
  c.grids.quadrature = UniformAxis(-1.0, 1.0, 40);
  c.output_dir = scratch("run_fail");
  fs::remove_all(c.output_dir);
  CHECK_THROWS_AS(run_pipeline(c), NumericalError);
  CHECK(fs::exists(c.output_dir / ".partial"));
}
