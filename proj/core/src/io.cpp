#include "nvphys/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nvphys/errors.hpp"

namespace nvphys {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw InputError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw InputError("missing column '" + name +
                   "' (headers must carry unit suffixes, e.g. rate_Hz)");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const std::string& h : header)
    if (h == name) return true;
  return false;
}

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string line =
        text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      fail(path, line_no, "expected " + std::to_string(table.header.size()) +
                              " fields, got " + std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw InputError(path.string() + ": no header row");
  return table;
}

double parse_double(const std::string& field, const fs::path& path, std::size_t line) {
  if (field.empty()) fail(path, line, "empty numeric field");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || errno == ERANGE)
    fail(path, line, "malformed number '" + field + "'");
  return v;
}

std::vector<CrystalRecord> read_observation_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_id = t.column("crystal_id");
  const std::size_t c_x = t.column("x_um");
  const std::size_t c_y = t.column("y_um");
  const std::size_t c_p = t.column("power_W");
  const std::size_t c_r = t.column("rate_Hz");
  const bool has_dwell = t.has_column("dwell_s");
  const std::size_t c_d = has_dwell ? t.column("dwell_s") : 0;

  std::vector<CrystalRecord> records;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = t.line_numbers[i];
    const std::string& id = row[c_id];
    if (id.empty()) fail(path, line, "empty crystal_id");
    const double x = parse_double(row[c_x], path, line);
    const double y = parse_double(row[c_y], path, line);

    auto [it, inserted] = index.try_emplace(id, records.size());
    if (inserted) {
      CrystalRecord rec;
      rec.id = id;
      rec.x_um = x;
      rec.y_um = y;
      records.push_back(std::move(rec));
    } else {
      const CrystalRecord& rec = records[it->second];
      if (std::fabs(rec.x_um - x) > 1e-6 || std::fabs(rec.y_um - y) > 1e-6)
        fail(path, line, "crystal '" + id + "' changes position mid-file");
    }
    RatePoint pt;
    pt.power_W = parse_double(row[c_p], path, line);
    pt.rate_Hz = parse_double(row[c_r], path, line);
    if (has_dwell) pt.dwell_s = parse_double(row[c_d], path, line);
    records[it->second].points.push_back(pt);
  }
  if (records.empty()) throw InputError(path.string() + ": no observation rows");
  return records;
}

std::string observation_csv(const std::vector<CrystalRecord>& records) {
  std::string out = "crystal_id,x_um,y_um,power_W,rate_Hz,dwell_s\n";
  for (const CrystalRecord& rec : records) {
    for (const RatePoint& pt : rec.points) {
      out += rec.id;
      out += ',' + format_double(rec.x_um) + ',' + format_double(rec.y_um);
      out += ',' + format_double(pt.power_W) + ',' + format_double(pt.rate_Hz);
      out += ',' + format_double(pt.dwell_s) + '\n';
    }
  }
  return out;
}

std::vector<std::pair<double, double>> read_weighted_diameters(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::size_t c_d = t.column("diameter_nm");
  const std::size_t c_w = t.column("weight");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::size_t line = t.line_numbers[i];
    const double d = parse_double(t.rows[i][c_d], path, line);
    const double w = parse_double(t.rows[i][c_w], path, line);
    if (!(d > 0.0)) fail(path, line, "diameter must be positive");
    if (!(w >= 0.0)) fail(path, line, "weight must be nonnegative");
    out.emplace_back(d, w);
  }
  if (out.empty()) throw InputError(path.string() + ": no data rows");
  return out;
}

Spectrum read_spectrum_csv(const fs::path& path, Spectrum::Kind kind) {
  const CsvTable t = read_csv(path);
  const std::size_t c_nu = t.column("wavenumber_cm1");
  const std::size_t c_v = t.column("value");
  Spectrum s;
  s.kind = kind;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const std::size_t line = t.line_numbers[i];
    SpectralSample sample;
    sample.wavenumber_cm1 = parse_double(t.rows[i][c_nu], path, line);
    sample.value = parse_double(t.rows[i][c_v], path, line);
    s.samples.push_back(sample);
  }
  if (s.samples.size() < 2) throw InputError(path.string() + ": need at least 2 samples");
  return s;
}

std::string spectrum_csv(const Spectrum& s) {
  std::string out = "wavenumber_cm1,value\n";
  for (const SpectralSample& sample : s.samples)
    out += format_double(sample.wavenumber_cm1) + ',' + format_double(sample.value) + '\n';
  return out;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_lo_nm,bin_hi_nm,weight\n";
  for (std::size_t i = 0; i < h.weights.size(); ++i) {
    const double lo = h.origin_nm + static_cast<double>(i) * h.bin_width_nm;
    out += format_double(lo) + ',' + format_double(lo + h.bin_width_nm) + ',' +
           format_double(h.weights[i]) + '\n';
  }
  return out;
}

std::string ensemble_truth_csv(const std::vector<SyntheticCrystal>& crystals) {
  std::string out =
      "crystal_id,axis_a_nm,axis_b_nm,axis_c_nm,quat_w,quat_x,quat_y,quat_z,"
      "x_um,y_um,nv_count,emission_factor,absorption_factor,sigma_eff_cm2,"
      "k_r_eff_MHz,R_det_Hz,I_s_kW_cm2,P_s_W,diameter_nm,volume_nm3\n";
  char id[32];
  for (const SyntheticCrystal& c : crystals) {
    std::snprintf(id, sizeof(id), "c%05zu", c.id);
    out += id;
    for (double v : c.axes_nm) out += ',' + format_double(v);
    for (double v : c.orientation) out += ',' + format_double(v);
    out += ',' + format_double(c.x_um) + ',' + format_double(c.y_um);
    out += ',' + std::to_string(c.nv_count);
    out += ',' + format_double(c.emission_factor);
    out += ',' + format_double(c.absorption_factor);
    out += ',' + format_double(c.sigma_eff_cm2);
    out += ',' + format_double(c.k_r_eff_MHz);
    out += ',' + format_double(c.R_det_Hz);
    out += ',' + format_double(c.I_s_kW_cm2);
    out += ',' + format_double(c.P_s_W);
    out += ',' + format_double(c.diameter_nm);
    out += ',' + format_double(c.volume_nm3);
    out += '\n';
  }
  return out;
}

KeyValueConfig parse_config_text(const std::string& text, const fs::path& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) fail(origin, line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail(origin, line_no, "empty key");
    if (value.empty()) fail(origin, line_no, "empty value for '" + key + "'");
    if (!cfg.emplace(key, value).second)
      fail(origin, line_no, "duplicate key '" + key + "'");
  }
  return cfg;
}

KeyValueConfig read_config(const fs::path& path) {
  return parse_config_text(read_file(path), path);
}

double config_double(const KeyValueConfig& cfg, const std::string& key, double fallback) {
  const auto it = cfg.find(key);
  if (it == cfg.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end != it->second.c_str() + it->second.size() || errno == ERANGE)
    throw InputError("config key '" + key + "': malformed number '" + it->second + "'");
  return v;
}

double config_double_required(const KeyValueConfig& cfg, const std::string& key) {
  if (cfg.find(key) == cfg.end()) throw InputError("config key '" + key + "' is required");
  return config_double(cfg, key, 0.0);
}

std::string config_string(const KeyValueConfig& cfg, const std::string& key,
                          const std::string& fallback) {
  const auto it = cfg.find(key);
  return it == cfg.end() ? fallback : it->second;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  const fs::path dir = path.parent_path();
  if (!dir.empty()) fs::create_directories(dir);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw InputError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

std::string content_hash_hex(const std::string& contents) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char byte : contents) {
    h ^= byte;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string file_hash_hex(const fs::path& path) { return content_hash_hex(read_file(path)); }

std::filesystem::path default_output_dir() {
  const char* env = std::getenv("NVPHYS_OUT_DIR");
  return env && *env ? fs::path(env) : fs::path(".");
}

}  // namespace nvphys
