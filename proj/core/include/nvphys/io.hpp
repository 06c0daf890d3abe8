#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nvphys/ensemble.hpp"
#include "nvphys/spectra.hpp"

namespace nvphys {

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Raw CSV with a mandatory header row.  Field errors reference 1-based
/// line numbers.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] matches header size
  std::vector<std::size_t> line_numbers;       // source line of each row

  /// Index of a header column; throws InputError naming the column when
  /// absent (headers carry unit suffixes on purpose, a bare name is a bug).
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line);

/// Observations, one row per measured point:
/// crystal_id,x_um,y_um,power_W,rate_Hz[,dwell_s].  Rows of one crystal are
/// grouped by id in first-appearance order.
std::vector<CrystalRecord> read_observation_csv(const std::filesystem::path& path);
std::string observation_csv(const std::vector<CrystalRecord>& records);

/// Reference size distribution: diameter_nm,weight.
std::vector<std::pair<double, double>> read_weighted_diameters(
    const std::filesystem::path& path);

/// Spectrum: wavenumber_cm1,value.
Spectrum read_spectrum_csv(const std::filesystem::path& path, Spectrum::Kind kind);
std::string spectrum_csv(const Spectrum& s);

std::string histogram_csv(const Histogram& h);

/// Ground-truth dump of a synthetic ensemble.
std::string ensemble_truth_csv(const std::vector<SyntheticCrystal>& crystals);

/// Plain-text key=value configuration with dotted keys; '#' starts a
/// comment; blank lines ignored; duplicate keys rejected.
using KeyValueConfig = std::map<std::string, std::string>;

KeyValueConfig read_config(const std::filesystem::path& path);
KeyValueConfig parse_config_text(const std::string& text,
                                 const std::filesystem::path& origin);

double config_double(const KeyValueConfig& cfg, const std::string& key, double fallback);
/// Required variant; throws InputError naming the key.
double config_double_required(const KeyValueConfig& cfg, const std::string& key);
std::string config_string(const KeyValueConfig& cfg, const std::string& key,
                          const std::string& fallback);

/// Write-temp-then-rename so readers never observe a half-written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

std::string read_file(const std::filesystem::path& path);

/// FNV-1a 64-bit content hash as 16 hex digits; used in run manifests.
std::string file_hash_hex(const std::filesystem::path& path);
std::string content_hash_hex(const std::string& contents);

/// $NVPHYS_OUT_DIR when set, otherwise the current directory.
std::filesystem::path default_output_dir();

}  // namespace nvphys
