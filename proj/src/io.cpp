#include "bhd/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "bhd/errors.hpp"

namespace bhd {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kRecordMagic[8] = {'B', 'H', 'D', 'R', 'E', 'C', '0', '1'};

double parse_number(std::string_view s, const fs::path& path) {
  // from_chars does not accept a leading '+'; to_chars never writes one.
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw IoError(path.string(), "malformed number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::map<std::string, std::string> parse_meta(const std::string& line, const fs::path& path) {
  if (line.rfind("# ", 0) != 0) throw IoError(path.string(), "missing metadata comment line");
  std::map<std::string, std::string> meta;
  std::istringstream is(line.substr(2));
  std::string tok;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return meta;
}

const std::string& need(const std::map<std::string, std::string>& m, const std::string& key,
                        const fs::path& path) {
  auto it = m.find(key);
  if (it == m.end()) throw IoError(path.string(), "metadata lacks '" + key + "'");
  return it->second;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError(path.parent_path().string(), "cannot create directory: " + ec.message());
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot open for writing");
  return os;
}

void finish(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw IoError(path.string(), "write failed");
}

std::string axis_meta(const std::string& prefix, const UniformAxis& a) {
  return prefix + "lo=" + format_double(a.lo) + " " + prefix + "hi=" + format_double(a.hi) + " " +
         prefix + "n=" + std::to_string(a.n);
}

UniformAxis axis_from_meta(const std::map<std::string, std::string>& m, const std::string& prefix,
                           const fs::path& path) {
  return UniformAxis(parse_number(need(m, prefix + "lo", path), path),
                     parse_number(need(m, prefix + "hi", path), path),
                     static_cast<std::size_t>(parse_number(need(m, prefix + "n", path), path)));
}

void write_csv(const Density1D& d, std::ostream& os) {
  os << "# kind=density1d " << axis_meta("", d.axis) << " provenance=" << to_string(d.provenance)
     << " total_mass=" << format_double(d.total_mass)
     << " effective_samples=" << format_double(d.effective_samples) << " overflow=" << d.overflow
     << '\n';
  os << "x,density,stderr\n";
  for (std::size_t i = 0; i < d.axis.n; ++i)
    os << format_double(d.axis.center(i)) << ',' << format_double(d.values[i]) << ','
       << format_double(i < d.stderrs.size() ? d.stderrs[i] : 0.0) << '\n';
}

void write_csv(const Density2D& p, std::ostream& os) {
  os << "# kind=density2d " << axis_meta("x_", p.x_axis) << ' ' << axis_meta("y_", p.y_axis)
     << " provenance=" << to_string(p.provenance)
     << " effective_samples=" << format_double(p.effective_samples) << " overflow=" << p.overflow
     << '\n';
  os << "y\\x";
  for (std::size_t ix = 0; ix < p.x_axis.n; ++ix) os << ',' << format_double(p.x_axis.center(ix));
  os << '\n';
  for (std::size_t iy = 0; iy < p.y_axis.n; ++iy) {
    os << format_double(p.y_axis.center(iy));
    for (std::size_t ix = 0; ix < p.x_axis.n; ++ix) os << ',' << format_double(p.at(ix, iy));
    os << '\n';
  }
}

void write_csv(const CorrelationDensity& w, std::ostream& os) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < w.axis.n; ++i) {
    if (!w.excluded(i)) continue;
    if (!any) lo = w.axis.edge(i);
    hi = w.axis.edge(i + 1);
    any = true;
  }
  os << "# kind=correlation " << axis_meta("", w.axis) << " eps0=" << format_double(w.eps0)
     << " excluded_window=" << (any ? "[" + format_double(lo) + "," + format_double(hi) + "]" : "none")
     << " excluded_mass=" << format_double(w.excluded_mass) << " provenance=" << to_string(w.provenance)
     << " effective_samples=" << format_double(w.effective_samples) << " overflow=" << w.overflow
     << '\n';
  os << "M,density,stderr,excluded\n";
  for (std::size_t i = 0; i < w.axis.n; ++i)
    os << format_double(w.axis.center(i)) << ',' << format_double(w.values[i]) << ','
       << format_double(i < w.stderrs.size() ? w.stderrs[i] : 0.0) << ',' << (w.excluded(i) ? 1 : 0)
       << '\n';
}

template <class T>
void read_columns(std::istream& is, const fs::path& path, std::size_t n, std::vector<double>& values,
                  std::vector<double>& errs) {
  std::string line;
  values.resize(n);
  errs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw IoError(path.string(), "truncated data");
    const auto cols = split(line, ',');
    if (cols.size() < 3) throw IoError(path.string(), "expected at least 3 columns");
    values[i] = parse_number(cols[1], path);
    errs[i] = parse_number(cols[2], path);
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

PlotFormat plot_format_from_string(const std::string& s) {
  if (s == "csv") return PlotFormat::csv;
  if (s == "json") return PlotFormat::json;
  throw ConfigError("unknown export format: " + s);
}

json to_json(const StatObject& artifact) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        json j;
        j["provenance"] = std::string(to_string(x.provenance));
        j["effective_samples"] = std::isfinite(x.effective_samples) ? json(x.effective_samples) : json(nullptr);
        j["overflow"] = x.overflow;
        j["values"] = x.values;
        if constexpr (std::is_same_v<T, Density2D>) {
          j["kind"] = "density2d";
          j["x_axis"] = {x.x_axis.lo, x.x_axis.hi, x.x_axis.n};
          j["y_axis"] = {x.y_axis.lo, x.y_axis.hi, x.y_axis.n};
        } else {
          j["axis"] = {x.axis.lo, x.axis.hi, x.axis.n};
          j["stderr"] = x.stderrs;
          if constexpr (std::is_same_v<T, Density1D>) {
            j["kind"] = "density1d";
            j["total_mass"] = x.total_mass;
          } else {
            j["kind"] = "correlation";
            j["eps0"] = x.eps0;
            j["excluded_mass"] = x.excluded_mass;
          }
        }
        return j;
      },
      artifact);
}

StatObject stat_from_json(const json& j) {
  auto axis = [](const json& a) { return UniformAxis(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<std::size_t>()); };
  auto common = [&](auto& x) {
    x.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    x.effective_samples = j.at("effective_samples").is_null() ? kInfiniteSamples : j.at("effective_samples").get<double>();
    x.overflow = j.at("overflow").get<std::size_t>();
    x.values = j.at("values").get<std::vector<double>>();
  };
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "density1d") {
    Density1D d;
    common(d);
    d.axis = axis(j.at("axis"));
    d.stderrs = j.at("stderr").get<std::vector<double>>();
    d.total_mass = j.at("total_mass").get<double>();
    return d;
  }
  if (kind == "density2d") {
    Density2D p;
    common(p);
    p.x_axis = axis(j.at("x_axis"));
    p.y_axis = axis(j.at("y_axis"));
    return p;
  }
  if (kind == "correlation") {
    CorrelationDensity w;
    common(w);
    w.axis = axis(j.at("axis"));
    w.stderrs = j.at("stderr").get<std::vector<double>>();
    w.eps0 = j.at("eps0").get<double>();
    w.excluded_mass = j.at("excluded_mass").get<double>();
    return w;
  }
  throw std::invalid_argument("unknown statistic kind: " + kind);
}

json to_json(const VogelResult& v) {
  return {{"nonclassical", v.nonclassical},
          {"max_excess", v.max_excess},
          {"k_at_max", v.k_at_max},
          {"threshold_at_max", v.threshold_at_max}};
}

void export_plot_data(const StatObject& artifact, const fs::path& path, PlotFormat format) {
  auto os = open_out(path);
  if (format == PlotFormat::json) {
    os << to_json(artifact).dump() << '\n';
  } else {
    std::visit([&](const auto& x) { write_csv(x, os); }, artifact);
  }
  finish(os, path);
}

StatObject load_stat(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  if (is.peek() == '{') {
    try {
      return stat_from_json(json::parse(is));
    } catch (const json::exception& e) {
      throw IoError(path.string(), e.what());
    }
  }
  std::string line;
  std::getline(is, line);
  const auto meta = parse_meta(line, path);
  const auto& kind = need(meta, "kind", path);
  const auto prov = provenance_from_string(need(meta, "provenance", path));
  const double n_eff = parse_number(need(meta, "effective_samples", path), path);
  const auto overflow = static_cast<std::size_t>(parse_number(need(meta, "overflow", path), path));
  std::getline(is, line);  // column header
  if (kind == "density1d") {
    Density1D d;
    d.axis = axis_from_meta(meta, "", path);
    read_columns<Density1D>(is, path, d.axis.n, d.values, d.stderrs);
    d.provenance = prov;
    d.effective_samples = n_eff;
    d.overflow = overflow;
    d.total_mass = parse_number(need(meta, "total_mass", path), path);
    return d;
  }
  if (kind == "correlation") {
    CorrelationDensity w;
    w.axis = axis_from_meta(meta, "", path);
    read_columns<CorrelationDensity>(is, path, w.axis.n, w.values, w.stderrs);
    w.eps0 = parse_number(need(meta, "eps0", path), path);
    w.excluded_mass = parse_number(need(meta, "excluded_mass", path), path);
    w.provenance = prov;
    w.effective_samples = n_eff;
    w.overflow = overflow;
    return w;
  }
  if (kind == "density2d") {
    Density2D p;
    p.x_axis = axis_from_meta(meta, "x_", path);
    p.y_axis = axis_from_meta(meta, "y_", path);
    p.values.resize(p.x_axis.n * p.y_axis.n);
    for (std::size_t iy = 0; iy < p.y_axis.n; ++iy) {
      if (!std::getline(is, line)) throw IoError(path.string(), "truncated matrix");
      const auto cols = split(line, ',');
      if (cols.size() != p.x_axis.n + 1) throw IoError(path.string(), "matrix row has wrong width");
      for (std::size_t ix = 0; ix < p.x_axis.n; ++ix) p.at(ix, iy) = parse_number(cols[ix + 1], path);
    }
    p.provenance = prov;
    p.effective_samples = n_eff;
    p.overflow = overflow;
    return p;
  }
  throw IoError(path.string(), "unknown kind '" + kind + "'");
}

void save_records(std::span<const DetectorRecord> records, const fs::path& path) {
  auto os = open_out(path);
  os.write(kRecordMagic, sizeof kRecordMagic);
  const std::uint64_t count = records.size();
  os.write(reinterpret_cast<const char*>(&count), sizeof count);
  static_assert(sizeof(DetectorRecord) == 2 * sizeof(double));
  os.write(reinterpret_cast<const char*>(records.data()),
           static_cast<std::streamsize>(records.size() * sizeof(DetectorRecord)));
  finish(os, path);
}

std::vector<DetectorRecord> load_records(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for reading");
  char magic[8];
  std::uint64_t count = 0;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&count), sizeof count);
  if (!is || std::memcmp(magic, kRecordMagic, sizeof magic) != 0)
    throw IoError(path.string(), "not a record file");
  std::vector<DetectorRecord> records(count);
  is.read(reinterpret_cast<char*>(records.data()),
          static_cast<std::streamsize>(count * sizeof(DetectorRecord)));
  if (!is) throw IoError(path.string(), "truncated record file");
  return records;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256: digest init failed");
  std::array<char, 1 << 16> buf{};
  while (is) {
    is.read(buf.data(), buf.size());
    if (is.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(is.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

ManifestCheck verify_manifest(const fs::path& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw IoError(manifest_path.string(), "cannot open manifest");
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError(manifest_path.string(), e.what());
  }
  ManifestCheck check;
  const auto dir = manifest_path.parent_path();
  for (const auto& a : m.at("artifacts")) {
    const auto rel = a.at("path").get<std::string>();
    const auto full = dir / rel;
    if (!fs::exists(full)) {
      check.ok = false;
      check.problems.push_back(rel + ": missing");
      continue;
    }
    if (sha256_file(full) != a.at("sha256").get<std::string>()) {
      check.ok = false;
      check.problems.push_back(rel + ": hash mismatch");
    }
  }
  return check;
}

}  // namespace bhd
