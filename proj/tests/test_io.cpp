#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "nvphys/errors.hpp"
#include "nvphys/io.hpp"
#include "nvphys/rng.hpp"

using namespace nvphys;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test binary run.
fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "nvphys_io_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

fs::path write_scratch(const std::string& name, const std::string& contents) {
  const fs::path p = scratch_dir() / name;
  write_file_atomic(p, contents);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips exactly") {
  SplitMix64 rng(99u);
  std::vector<double> values = {0.0,   1.0,    -1.0,   0.1,  1.0 / 3.0,
                                1e300, 1e-300, 2.5e-7, 77.8, 6.02214076e23};
  for (int i = 0; i < 100; ++i) values.push_back(rng.normal(0.0, 1e6));
  for (double v : values) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("config parsing") {
  const KeyValueConfig cfg = parse_config_text(
      "# comment line\n"
      "suspension.density_g_cm3 = 3.5\n"
      "\n"
      "beam.waist_um=120  # trailing comment\n"
      "fit.poisson_weights = 1\n",
      "inline");
  CHECK(cfg.size() == 3);
  CHECK(config_double(cfg, "suspension.density_g_cm3", 0.0) == 3.5);
  CHECK(config_double(cfg, "beam.waist_um", 0.0) == 120.0);
  CHECK(config_double(cfg, "missing.key", 42.0) == 42.0);
  CHECK(config_string(cfg, "fit.poisson_weights", "0") == "1");
  CHECK(config_double_required(cfg, "beam.waist_um") == 120.0);
  CHECK_THROWS_AS(config_double_required(cfg, "missing.key"), InputError);

  CHECK_THROWS_AS(parse_config_text("a.b = 1\na.b = 2\n", "dup"), InputError);
  CHECK_THROWS_AS(parse_config_text("just a line\n", "noeq"), InputError);
  CHECK_THROWS_AS(parse_config_text("= 3\n", "nokey"), InputError);
  CHECK_THROWS_AS(parse_config_text("a.b =\n", "novalue"), InputError);
  CHECK_THROWS_AS(config_double(parse_config_text("a.b = soon\n", "bad"), "a.b", 0.0),
                  InputError);
}

TEST_CASE("csv reading and error locations") {
  const fs::path p = write_scratch("table.csv",
                                   "x_um, y_um\n"
                                   "1, 2\n"
                                   "\n"
                                   "3, 4\n");
  const CsvTable t = read_csv(p);
  REQUIRE(t.header.size() == 2);
  CHECK(t.header[0] == "x_um");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.line_numbers[1] == 4);  // blank line skipped, numbering preserved
  CHECK(t.has_column("y_um"));
  CHECK_FALSE(t.has_column("z_um"));
  CHECK_THROWS_WITH_AS(t.column("rate"),
                       doctest::Contains("unit suffixes"), InputError);

  const fs::path ragged = write_scratch("ragged.csv", "a,b\n1,2,3\n");
  CHECK_THROWS_WITH_AS(read_csv(ragged), doctest::Contains(":2:"), InputError);

  CHECK_THROWS_AS(read_csv(write_scratch("empty.csv", "\n\n")), InputError);
  CHECK_THROWS_AS(read_csv(scratch_dir() / "no_such.csv"), InputError);

  CHECK_THROWS_WITH_AS(parse_double("12x", p, 7), doctest::Contains(":7:"), InputError);
  CHECK_THROWS_AS(parse_double("", p, 1), InputError);
  CHECK(parse_double(" 8.5e-1", p, 1) == doctest::Approx(0.85));
}

TEST_CASE("observation csv round trip") {
  std::vector<CrystalRecord> records(2);
  records[0].id = "c00000";
  records[0].x_um = 10.5;
  records[0].y_um = -3.25;
  records[0].points = {{0.001, 1500.0, 0.1}, {0.01, 9000.0, 0.1}};
  records[1].id = "bead7";
  records[1].x_um = 0.0;
  records[1].y_um = 4.0;
  records[1].points = {{0.02, 100.25, 0.5}};

  const fs::path p = write_scratch("obs.csv", observation_csv(records));
  const std::vector<CrystalRecord> back = read_observation_csv(p);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "c00000");
  CHECK(back[0].points.size() == 2);
  CHECK(back[0].points[1].rate_Hz == 9000.0);
  CHECK(back[0].points[1].dwell_s == 0.1);
  CHECK(back[1].x_um == 0.0);
  CHECK(back[1].points[0].rate_Hz == 100.25);
}

TEST_CASE("observation csv groups interleaved rows by id") {
  const fs::path p = write_scratch("interleaved.csv",
                                   "crystal_id,x_um,y_um,power_W,rate_Hz\n"
                                   "a,1,1,0.001,10\n"
                                   "b,2,2,0.001,20\n"
                                   "a,1,1,0.01,100\n");
  const std::vector<CrystalRecord> records = read_observation_csv(p);
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "a");
  CHECK(records[0].points.size() == 2);
  CHECK(records[0].points[1].dwell_s == 0.0);  // column absent, unknown dwell
  CHECK(records[1].points.size() == 1);
}

TEST_CASE("observation csv input errors") {
  CHECK_THROWS_AS(read_observation_csv(write_scratch(
                      "moved.csv",
                      "crystal_id,x_um,y_um,power_W,rate_Hz\n"
                      "a,1,1,0.001,10\n"
                      "a,5,1,0.01,100\n")),
                  InputError);  // crystal changes position mid-file
  CHECK_THROWS_AS(read_observation_csv(write_scratch(
                      "anon.csv",
                      "crystal_id,x_um,y_um,power_W,rate_Hz\n"
                      ",1,1,0.001,10\n")),
                  InputError);
  CHECK_THROWS_AS(read_observation_csv(write_scratch(
                      "bare.csv", "crystal_id,x_um,y_um,power_W,rate_Hz\n")),
                  InputError);
  CHECK_THROWS_AS(read_observation_csv(write_scratch(
                      "units.csv", "crystal_id,x_um,y_um,power,rate_Hz\na,1,1,2,3\n")),
                  InputError);
}

TEST_CASE("weighted diameter table") {
  const fs::path p = write_scratch("dls.csv",
                                   "diameter_nm,weight\n"
                                   "40,0.25\n"
                                   "80,1.5\n");
  const auto rows = read_weighted_diameters(p);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].first == 80.0);
  CHECK(rows[1].second == 1.5);

  CHECK_THROWS_AS(read_weighted_diameters(write_scratch(
                      "dls_bad.csv", "diameter_nm,weight\n-5,1\n")),
                  InputError);
  CHECK_THROWS_AS(read_weighted_diameters(write_scratch(
                      "dls_neg.csv", "diameter_nm,weight\n5,-1\n")),
                  InputError);
}

TEST_CASE("spectrum csv round trip") {
  Spectrum s;
  s.kind = Spectrum::Kind::kLuminescenceDensity;
  s.samples = {{11000.0, 0.125}, {11010.0, 0.5}};
  const fs::path p = write_scratch("spectrum.csv", spectrum_csv(s));
  const Spectrum back = read_spectrum_csv(p, Spectrum::Kind::kLuminescenceDensity);
  REQUIRE(back.samples.size() == 2);
  CHECK(back.samples[1].wavenumber_cm1 == 11010.0);
  CHECK(back.samples[1].value == 0.5);
  CHECK_THROWS_AS(read_spectrum_csv(write_scratch("short.csv",
                                                  "wavenumber_cm1,value\n1,1\n"),
                                    Spectrum::Kind::kLuminescenceDensity),
                  InputError);
}

TEST_CASE("histogram csv layout") {
  Histogram h;
  h.origin_nm = 0.0;
  h.bin_width_nm = 20.0;
  h.weights = {0.0, 2.0, 1.0};
  CHECK(histogram_csv(h) ==
        "bin_lo_nm,bin_hi_nm,weight\n"
        "0,20,0\n"
        "20,40,2\n"
        "40,60,1\n");
}

TEST_CASE("ensemble truth csv header and ids") {
  std::vector<SyntheticCrystal> crystals(1);
  crystals[0].id = 7;
  crystals[0].axes_nm = {100.0, 80.0, 60.0};
  crystals[0].orientation = {1.0, 0.0, 0.0, 0.0};
  const std::string csv = ensemble_truth_csv(crystals);
  CHECK(csv.rfind("crystal_id,axis_a_nm,axis_b_nm,axis_c_nm,quat_w", 0) == 0);
  CHECK(csv.find("\nc00007,100,80,60,1,0,0,0,") != std::string::npos);
}

TEST_CASE("atomic writes and hashing") {
  const fs::path nested = scratch_dir() / "deep" / "dir" / "file.txt";
  write_file_atomic(nested, "payload");
  CHECK(read_file(nested) == "payload");
  CHECK_FALSE(fs::exists(nested.string() + ".tmp"));

  // FNV-1a 64 reference vectors.
  CHECK(content_hash_hex("") == "cbf29ce484222325");
  CHECK(content_hash_hex("a") == "af63dc4c8601ec8c");
  CHECK(file_hash_hex(nested) == content_hash_hex("payload"));

  CHECK_THROWS_AS(read_file(scratch_dir() / "missing.txt"), InputError);
}

TEST_CASE("default output dir honors the environment") {
  unsetenv("NVPHYS_OUT_DIR");
  CHECK(default_output_dir() == fs::path("."));
  setenv("NVPHYS_OUT_DIR", "/tmp/some/where", 1);
  CHECK(default_output_dir() == fs::path("/tmp/some/where"));
  unsetenv("NVPHYS_OUT_DIR");
}
