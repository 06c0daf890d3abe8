#include "cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nvphys/ensemble.hpp"
#include "nvphys/errors.hpp"
#include "nvphys/io.hpp"
#include "nvphys/optics.hpp"
#include "nvphys/rate_model.hpp"
#include "nvphys/sizing.hpp"
#include "nvphys/spectra.hpp"

#ifndef NVPHYS_VERSION
#define NVPHYS_VERSION "dev"
#endif

namespace nvphys::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Run bookkeeping: outputs are written atomically and every run leaves a
// manifest with content hashes of its inputs and outputs.

class RunContext {
 public:
  RunContext(std::string command, std::vector<std::string> argv, fs::path outdir)
      : command_(std::move(command)), argv_(std::move(argv)), outdir_(std::move(outdir)) {}

  void note_input(const fs::path& path) {
    inputs_.push_back({path.string(), file_hash_hex(path)});
  }

  fs::path write_output(const std::string& name, const std::string& contents) {
    const fs::path path = outdir_ / name;
    write_file_atomic(path, contents);
    outputs_.push_back({path.string(), content_hash_hex(contents)});
    return path;
  }

  void set_config(json config) { config_ = std::move(config); }

  void write_manifest() {
    json m;
    m["command"] = command_;
    m["argv"] = argv_;
    m["version"] = NVPHYS_VERSION;
    m["config"] = config_;
    m["inputs"] = json::array();
    for (const auto& [path, hash] : inputs_)
      m["inputs"].push_back({{"path", path}, {"fnv1a64", hash}});
    m["outputs"] = json::array();
    for (const auto& [path, hash] : outputs_)
      m["outputs"].push_back({{"path", path}, {"fnv1a64", hash}});
    std::string name = command_ + "_manifest.json";
    std::replace(name.begin(), name.end(), '-', '_');
    write_file_atomic(outdir_ / name, m.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> argv_;
  fs::path outdir_;
  json config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

// ---------------------------------------------------------------------------
// Dotted-key config files.  Every key a command can consume is registered
// here; leftovers are an error so a typo (or a missing unit suffix) cannot
// silently fall back to a default.

class ConfigReader {
 public:
  ConfigReader() = default;
  explicit ConfigReader(KeyValueConfig cfg) : cfg_(std::move(cfg)) {}

  double number(const std::string& key, double fallback) {
    used_.insert(key);
    return config_double(cfg_, key, fallback);
  }

  double required(const std::string& key) {
    used_.insert(key);
    return config_double_required(cfg_, key);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    return config_string(cfg_, key, fallback);
  }

  bool flag(const std::string& key, bool fallback) {
    used_.insert(key);
    const std::string v = config_string(cfg_, key, fallback ? "1" : "0");
    if (v == "1" || v == "true") return true;
    if (v == "0" || v == "false") return false;
    throw InputError("config key '" + key + "': expected 0/1/true/false");
  }

  /// Marks a key as recognized without reading it, so a config file shared
  /// across several subcommands does not trip the unknown-key check.
  void note(const std::string& key) { used_.insert(key); }

  /// Rejects keys nobody asked for.
  void finish() const {
    std::string unknown;
    for (const auto& [key, value] : cfg_)
      if (!used_.count(key)) unknown += (unknown.empty() ? "" : ", ") + key;
    if (!unknown.empty()) throw InputError("unknown config keys: " + unknown);
  }

 private:
  KeyValueConfig cfg_;
  std::set<std::string> used_;
};

PhotophysicsParams photophysics_from(ConfigReader& cfg, PhotophysicsParams base) {
  base.sigma = cfg.number("photophysics.sigma_cm2", base.sigma);
  base.sigma_prime = cfg.number("photophysics.sigma_prime_cm2", base.sigma_prime);
  base.k_r = cfg.number("photophysics.k_r_MHz", base.k_r);
  base.k_nr = cfg.number("photophysics.k_nr_MHz", base.k_nr);
  base.k_TS = cfg.number("photophysics.k_TS_MHz", base.k_TS);
  base.k_ST = cfg.number("photophysics.k_ST_MHz", base.k_ST);
  base.alpha = cfg.number("photophysics.alpha", base.alpha);
  return base;
}

DetectionChain detection_from(ConfigReader& cfg, DetectionChain base) {
  base.phi_pd = cfg.number("detection.phi_pd", base.phi_pd);
  base.phi_opt = cfg.number("detection.phi_opt", base.phi_opt);
  return base;
}

SubstrateEmissionMode emission_mode_from(const std::string& name) {
  if (name == "average") return SubstrateEmissionMode::kAverage;
  if (name == "parallel") return SubstrateEmissionMode::kParallel;
  if (name == "perpendicular") return SubstrateEmissionMode::kPerpendicular;
  throw InputError("emission mode must be average, parallel or perpendicular");
}

double index_from(const std::string& text, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !(v >= 1.0))
    throw InputError(std::string(what) + ": expected a refractive index >= 1, got '" +
                     text + "'");
  return v;
}

// CLI-side environment flags shared by several subcommands.
struct EnvOptions {
  std::string medium = "air";
  double crystal_index = kDiamondIndex;
  std::string substrate = "none";
  std::string emission_mode = "average";
  bool field_reduction = false;
};

void add_env_options(CLI::App* sub, EnvOptions& opts) {
  sub->add_option("--medium", opts.medium,
                  "Surrounding medium: air, water, or a refractive index");
  sub->add_option("--crystal-index", opts.crystal_index, "Crystal refractive index");
  sub->add_option("--substrate", opts.substrate,
                  "Substrate: none, glass, or a refractive index");
  sub->add_option("--emission-mode", opts.emission_mode,
                  "Substrate emission enhancement: average, parallel, perpendicular");
  sub->add_flag("--substrate-field-reduction", opts.field_reduction,
                "Apply the flat-interface field reduction of the substrate to absorption");
}

OpticalEnvironment make_environment(const EnvOptions& opts) {
  OpticalEnvironment env;
  if (opts.medium == "air")
    env.n_medium = 1.0;
  else if (opts.medium == "water")
    env.n_medium = kWaterIndex;
  else
    env.n_medium = index_from(opts.medium, "--medium");
  env.n_crystal = opts.crystal_index;
  if (opts.substrate == "glass")
    env.n_substrate = kSilicaIndex;
  else if (opts.substrate != "none")
    env.n_substrate = index_from(opts.substrate, "--substrate");
  env.emission_mode = emission_mode_from(opts.emission_mode);
  env.substrate_field_reduction = opts.field_reduction;
  env.validate();
  return env;
}

json environment_json(const OpticalEnvironment& env) {
  json j;
  j["n_crystal"] = env.n_crystal;
  j["n_medium"] = env.n_medium;
  j["n_rel"] = env.relative_index();
  if (env.n_substrate) {
    j["n_substrate"] = *env.n_substrate;
    j["substrate_emission_factor"] = env.substrate_emission_factor();
    j["substrate_field_reduction"] = env.substrate_field_reduction;
  }
  return j;
}

json photophysics_json(const PhotophysicsParams& p) {
  return {{"sigma_cm2", p.sigma},   {"sigma_prime_cm2", p.sigma_prime},
          {"k_r_MHz", p.k_r},       {"k_nr_MHz", p.k_nr},
          {"k_MHz", p.k()},         {"k_TS_MHz", p.k_TS},
          {"k_ST_MHz", p.k_ST},     {"alpha", p.alpha}};
}

json detection_json(const DetectionChain& det) {
  return {{"phi_pd", det.phi_pd}, {"phi_opt", det.phi_opt}, {"phi_det", det.phi_det()}};
}

json coupling_json(const FieldCoupling& fc) {
  json j;
  j["eta"] = fc.eta;
  j["absorption_factor"] = fc.absorption_factor;
  j["absorption_factor_avg"] = fc.absorption_factor_avg;
  j["emission_factor"] = fc.emission_factor;
  j["emission_factor_avg"] = fc.emission_factor_avg;
  return j;
}

std::array<double, 3> parse_axes(const std::string& text) {
  std::array<double, 3> axes{};
  std::size_t start = 0;
  for (int i = 0; i < 3; ++i) {
    const std::size_t comma = text.find(',', start);
    const bool last = i == 2;
    if (last != (comma == std::string::npos))
      throw InputError("--axes expects three comma-separated numbers, e.g. 1,0.5,0.5");
    const std::string field =
        text.substr(start, last ? std::string::npos : comma - start);
    char* end = nullptr;
    axes[i] = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
      throw InputError("--axes: malformed number '" + field + "'");
    start = comma + 1;
  }
  return axes;
}

std::vector<double> parse_number_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string field = text.substr(start, comma - start);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
      throw InputError(std::string(what) + ": malformed number '" + field + "'");
    out.push_back(v);
    start = comma + 1;
  }
  return out;
}

// Minimal standalone SVG: axis box, bars for the primary histogram, and an
// optional overlay drawn as a step line scaled to the primary's peak.
std::string svg_histogram(const Histogram& hist, const Histogram* overlay,
                          const std::string& title) {
  constexpr double kW = 640.0, kH = 400.0, kMargin = 50.0;
  const double plot_w = kW - 2.0 * kMargin;
  const double plot_h = kH - 2.0 * kMargin;

  const std::size_t nbins =
      std::max(hist.weights.size(), overlay ? overlay->weights.size() : std::size_t{0});
  double max_w = 0.0;
  for (double v : hist.weights) max_w = std::max(max_w, v);
  double overlay_max = 0.0;
  if (overlay)
    for (double v : overlay->weights) overlay_max = std::max(overlay_max, v);
  const double overlay_scale =
      overlay && overlay_max > 0.0 && max_w > 0.0 ? max_w / overlay_max : 1.0;
  if (max_w <= 0.0) max_w = 1.0;

  const double x_max = hist.origin_nm +
                       static_cast<double>(std::max<std::size_t>(nbins, 1)) *
                           hist.bin_width_nm;
  auto x_of = [&](double d) {
    return kMargin + (d - hist.origin_nm) / (x_max - hist.origin_nm) * plot_w;
  };
  auto y_of = [&](double v) { return kH - kMargin - v / max_w * plot_h * 0.95; };

  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns='http://www.w3.org/2000/svg' width='%g' height='%g' "
                "viewBox='0 0 %g %g'>\n",
                kW, kH, kW, kH);
  out += buf;
  out += "<rect width='100%' height='100%' fill='white'/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x='%g' y='24' font-family='sans-serif' font-size='14'>%s</text>\n",
                kMargin, title.c_str());
  out += buf;
  for (std::size_t i = 0; i < hist.weights.size(); ++i) {
    if (hist.weights[i] <= 0.0) continue;
    const double lo = hist.origin_nm + static_cast<double>(i) * hist.bin_width_nm;
    const double x = x_of(lo);
    const double y = y_of(hist.weights[i]);
    std::snprintf(buf, sizeof(buf),
                  "<rect x='%.2f' y='%.2f' width='%.2f' height='%.2f' fill='#4878b0' "
                  "stroke='#2a4a70'/>\n",
                  x, y, x_of(lo + hist.bin_width_nm) - x, kH - kMargin - y);
    out += buf;
  }
  if (overlay) {
    out += "<polyline fill='none' stroke='#c04040' stroke-width='2' points='";
    for (std::size_t i = 0; i < overlay->weights.size(); ++i) {
      const double lo =
          overlay->origin_nm + static_cast<double>(i) * overlay->bin_width_nm;
      const double y = y_of(overlay->weights[i] * overlay_scale);
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f %.2f,%.2f ", x_of(lo), y,
                    x_of(lo + overlay->bin_width_nm), y);
      out += buf;
    }
    out += "'/>\n";
  }
  std::snprintf(buf, sizeof(buf),
                "<line x1='%g' y1='%g' x2='%g' y2='%g' stroke='black'/>\n"
                "<line x1='%g' y1='%g' x2='%g' y2='%g' stroke='black'/>\n",
                kMargin, kH - kMargin, kW - kMargin, kH - kMargin, kMargin, kMargin,
                kMargin, kH - kMargin);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x='%g' y='%g' font-family='sans-serif' font-size='12'>%g</text>\n"
                "<text x='%g' y='%g' font-family='sans-serif' font-size='12' "
                "text-anchor='end'>%g nm</text>\n",
                kMargin, kH - kMargin + 16.0, hist.origin_nm, kW - kMargin,
                kH - kMargin + 16.0, x_max);
  out += buf;
  out += "</svg>\n";
  return out;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// Shared sizing pipeline used by fit-sat, sizing and compare-dls.

struct PipelineOptions {
  std::string obs_path;
  std::string beam_map_path;
  double beam_waist_um = 0.0;  // 0 = config value or no parametric beam
  bool poisson_weights = false;
  double bin_width_nm = 0.0;  // 0 = config value or default
};

struct PipelineData {
  std::vector<CrystalRecord> records;
  SuspensionSpec suspension{};
  DetectionChain detection;
  double bin_width_nm = 20.0;
  bool corrected = false;
};

PipelineData load_and_fit(const PipelineOptions& opts, ConfigReader& cfg,
                          RunContext& run, bool need_suspension) {
  PipelineData data;
  const fs::path obs(opts.obs_path);
  data.records = read_observation_csv(obs);
  run.note_input(obs);

  if (need_suspension) {
    data.suspension.mass_concentration_mg_ml =
        cfg.required("suspension.mass_concentration_mg_ml");
    data.suspension.drop_volume_ml = cfg.required("suspension.drop_volume_ml");
    data.suspension.density_g_cm3 =
        cfg.number("suspension.density_g_cm3", data.suspension.density_g_cm3);
  }
  data.detection = detection_from(cfg, DetectionChain::nano_on_glass());
  data.bin_width_nm = opts.bin_width_nm > 0.0
                          ? opts.bin_width_nm
                          : cfg.number("histogram.bin_width_nm", 20.0);

  const bool poisson = opts.poisson_weights || cfg.flag("fit.poisson_weights", false);

  double waist = opts.beam_waist_um;
  if (waist <= 0.0) waist = cfg.number("beam.waist_um", 0.0);
  if (!opts.beam_map_path.empty()) {
    const fs::path map_path(opts.beam_map_path);
    const CsvTable t = read_csv(map_path);
    run.note_input(map_path);
    const std::size_t c_r = t.column("radius_um");
    const std::size_t c_f = t.column("factor");
    std::vector<std::pair<double, double>> table;
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      table.emplace_back(parse_double(t.rows[i][c_r], map_path, t.line_numbers[i]),
                         parse_double(t.rows[i][c_f], map_path, t.line_numbers[i]));
    apply_irradiance_correction(data.records, IrradianceProfile::tabulated(table));
    data.corrected = true;
  } else if (waist > 0.0) {
    apply_irradiance_correction(data.records, IrradianceProfile::gaussian(waist));
    data.corrected = true;
  }

  fit_all_records(data.records, poisson);
  return data;
}

std::string fits_csv(const std::vector<CrystalRecord>& records) {
  std::string out =
      "crystal_id,x_um,y_um,irradiance_factor,R_det_Hz,R_det_err_Hz,P_s_W,P_s_err_W,"
      "rss,iterations,low_confidence,status\n";
  for (const CrystalRecord& rec : records) {
    out += rec.id + ',' + format_double(rec.x_um) + ',' + format_double(rec.y_um) +
           ',' + format_double(rec.irradiance_factor);
    if (rec.fit) {
      out += ',' + format_double(rec.fit->R_det_Hz) + ',' +
             format_double(rec.fit->R_det_err_Hz) + ',' + format_double(rec.fit->P_s_W) +
             ',' + format_double(rec.fit->P_s_err_W) + ',' + format_double(rec.fit->rss) +
             ',' + std::to_string(rec.fit->iterations) + ',' +
             (rec.fit->low_confidence ? "1" : "0") + ",ok\n";
    } else {
      out += ",,,,,,,failed\n";
    }
  }
  return out;
}

json fit_summary_json(const PipelineData& data) {
  json j;
  std::size_t fitted = 0, low_conf = 0;
  std::vector<double> ps;
  json failures = json::array();
  for (const CrystalRecord& rec : data.records) {
    if (rec.fit) {
      ++fitted;
      if (rec.fit->low_confidence) ++low_conf;
      ps.push_back(rec.fit->P_s_W);
    } else {
      failures.push_back(
          {{"crystal_id", rec.id}, {"reason", rec.fit_failure.value_or("unknown")}});
    }
  }
  j["crystal_count"] = data.records.size();
  j["fitted_count"] = fitted;
  j["low_confidence_count"] = low_conf;
  j["failures"] = failures;
  j["irradiance_corrected"] = data.corrected;
  if (!ps.empty()) {
    double mean = 0.0;
    for (double v : ps) mean += v;
    mean /= static_cast<double>(ps.size());
    double var = 0.0;
    for (double v : ps) var += (v - mean) * (v - mean);
    std::sort(ps.begin(), ps.end());
    j["P_s_mean_W"] = mean;
    j["P_s_std_W"] = std::sqrt(var / static_cast<double>(ps.size()));
    j["P_s_median_W"] = ps[ps.size() / 2];
  }
  return j;
}

// ---------------------------------------------------------------------------

std::optional<std::string> prescan(int argc, const char* const* argv,
                                   const std::string& flag) {
  const std::string prefix = flag + "=";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == flag && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind(prefix, 0) == 0) return arg.substr(prefix.size());
  }
  return std::nullopt;
}

int run_impl(int argc, const char* const* argv) {
  CLI::App app{"NV-center nanocrystal photophysics toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", NVPHYS_VERSION);

  std::vector<std::string> argv_echo(argv, argv + argc);
  std::string outdir_flag = default_output_dir().string();

  // Config file (dotted key=value) supplying parameter defaults.  It is
  // loaded before CLI11 binds so explicit command-line flags override it.
  ConfigReader cfg;
  if (auto path = prescan(argc, argv, "--config")) {
    cfg = ConfigReader(read_config(*path));
  }
  std::string config_flag;
  // Pipeline keys are consumed inside the subcommand that runs; register
  // them up front so a shared config file never looks like a typo.
  for (const char* key :
       {"suspension.mass_concentration_mg_ml", "suspension.drop_volume_ml",
        "suspension.density_g_cm3", "beam.waist_um", "fit.poisson_weights",
        "histogram.bin_width_nm"})
    cfg.note(key);

  PhotophysicsParams base_params = PhotophysicsParams::bulk();
  if (auto preset = prescan(argc, argv, "--params")) {
    if (*preset == "bulk")
      base_params = PhotophysicsParams::bulk();
    else if (*preset == "nano")
      base_params = PhotophysicsParams::nanocrystal();
    else
      throw InputError("--params must be 'bulk' or 'nano'");
  }
  std::string params_flag;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--outdir", outdir_flag, "Output directory");
    sub->add_option("--config", config_flag, "key=value config file with dotted keys");
  };
  auto make_run = [&](const CLI::App* sub) {
    return RunContext(sub->get_name(), argv_echo, fs::path(outdir_flag));
  };

  // ---- shape-factors -----------------------------------------------------
  auto* sc_shape = app.add_subcommand(
      "shape-factors", "Depolarization and field factors of one ellipsoid");
  std::string shape_axes;
  EnvOptions shape_env;
  sc_shape->add_option("--axes", shape_axes, "Relative axis lengths a,b,c")->required();
  add_env_options(sc_shape, shape_env);
  add_common(sc_shape);
  sc_shape->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_shape);
    const std::array<double, 3> axes = parse_axes(shape_axes);
    const Ellipsoid shape(axes[0], axes[1], axes[2]);
    const OpticalEnvironment env = make_environment(shape_env);
    const DepolarizationFactors d = depolarization_factors(shape);
    const FieldCoupling fc = coupling_factors(shape, env);

    json j;
    j["axes"] = axes;
    j["canonical_axes"] = shape.canonical_axes();
    j["delta"] = d.delta;
    j["delta_sum"] = d.sum();
    j["environment"] = environment_json(env);
    j["coupling"] = coupling_json(fc);
    run_ctx.set_config(j);
    run_ctx.write_output("shape_factors.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- table1 ------------------------------------------------------------
  auto* sc_table = app.add_subcommand(
      "table1", "Reference table of shape factors for the standard shape set");
  add_common(sc_table);
  sc_table->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_table);
    const auto rows = standard_shape_rows();
    const std::string csv = standard_shape_csv(rows);
    const std::string text = standard_shape_text(rows);
    run_ctx.set_config({{"shapes", rows.size()}});
    run_ctx.write_output("standard_shapes.csv", csv);
    run_ctx.write_output("standard_shapes.txt", text);
    run_ctx.write_manifest();
    std::cout << text;
  });

  // ---- rates -------------------------------------------------------------
  auto* sc_rates = app.add_subcommand(
      "rates", "Steady-state populations, detected rate and saturation intensity");
  PhotophysicsParams rates_params = photophysics_from(cfg, base_params);
  DetectionChain rates_det = detection_from(cfg, DetectionChain::bulk());
  ExcitationConditions rates_exc;
  sc_rates->add_option("--params", params_flag, "Parameter preset: bulk or nano");
  sc_rates->add_option("--sigma-cm2", rates_params.sigma, "Absorption cross-section");
  sc_rates->add_option("--sigma-prime-cm2", rates_params.sigma_prime,
                       "Excited-state absorption cross-section");
  sc_rates->add_option("--k-r-mhz", rates_params.k_r, "Radiative rate");
  sc_rates->add_option("--k-nr-mhz", rates_params.k_nr, "Nonradiative rate");
  sc_rates->add_option("--k-ts-mhz", rates_params.k_TS, "Triplet-to-singlet rate");
  sc_rates->add_option("--k-st-mhz", rates_params.k_ST, "Singlet-to-triplet rate");
  sc_rates->add_option("--alpha", rates_params.alpha, "m=+-1 relative population");
  sc_rates->add_option("--intensity-kw-cm2", rates_exc.intensity_kW_cm2,
                       "Excitation intensity");
  sc_rates->add_option("--wavelength-nm", rates_exc.wavelength_nm, "Wavelength");
  sc_rates->add_option("--phi-pd", rates_det.phi_pd, "Photodetector efficiency");
  sc_rates->add_option("--phi-opt", rates_det.phi_opt, "Collection efficiency");
  add_common(sc_rates);
  sc_rates->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_rates);
    const PopulationState pop = steady_state(rates_params, rates_exc);
    json j;
    j["photophysics"] = photophysics_json(rates_params);
    j["excitation"] = {{"wavelength_nm", rates_exc.wavelength_nm},
                       {"intensity_kW_cm2", rates_exc.intensity_kW_cm2},
                       {"photon_flux_cm2_s", rates_exc.photon_flux_cm2_s()}};
    j["detection"] = detection_json(rates_det);
    j["populations"] = {{"rho_T", pop.rho_T},
                        {"rho_T_star", pop.rho_T_star},
                        {"rho_S", pop.rho_S}};
    j["detected_rate_MHz"] = detected_rate(rates_params, rates_exc, rates_det);
    j["max_detected_rate_MHz"] = max_detected_rate(rates_params, rates_det);
    j["saturation_intensity_kW_cm2"] = saturation_intensity(rates_params, rates_exc);
    j["emission_probability"] = emission_probability(rates_params, rates_params.alpha);
    if (rates_params.k_TS > 0.0)
      j["odmr_contrast"] = odmr_contrast(rates_params, rates_params.alpha);
    run_ctx.set_config(j);
    run_ctx.write_output("rates.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- qy ----------------------------------------------------------------
  auto* sc_qy =
      app.add_subcommand("qy", "Quantum yield from fitted saturation parameters");
  double qy_rdet = 0.0, qy_is = 0.0, qy_sigma = 3.1e-17;
  double qy_wavelength = kDefaultWavelength_nm;
  double qy_alpha = -1.0, qy_kts_over_k = -1.0, qy_phi_det = -1.0;
  DetectionChain qy_det = detection_from(cfg, DetectionChain::bulk());
  sc_qy->add_option("--r-det-mhz", qy_rdet, "Fitted detected-rate asymptote")->required();
  sc_qy->add_option("--i-s-kw-cm2", qy_is, "Fitted saturation intensity")->required();
  sc_qy->add_option("--sigma-cm2", qy_sigma, "Absorption cross-section");
  sc_qy->add_option("--wavelength-nm", qy_wavelength, "Wavelength");
  sc_qy->add_option("--phi-pd", qy_det.phi_pd, "Photodetector efficiency");
  sc_qy->add_option("--phi-opt", qy_det.phi_opt, "Collection efficiency");
  sc_qy->add_option("--phi-det", qy_phi_det,
                    "Total detection efficiency (overrides --phi-pd/--phi-opt)");
  sc_qy->add_option("--alpha", qy_alpha, "Shelving correction: spin polarization");
  sc_qy->add_option("--kts-over-k", qy_kts_over_k, "Shelving correction: k_TS/k");
  add_common(sc_qy);
  sc_qy->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_qy);
    DetectionChain det = qy_det;
    if (qy_phi_det >= 0.0) {
      det.phi_pd = qy_phi_det;
      det.phi_opt = 1.0;
    }
    std::optional<ShelvingCorrection> correction;
    if (qy_alpha >= 0.0 || qy_kts_over_k >= 0.0) {
      if (qy_alpha < 0.0 || qy_kts_over_k < 0.0)
        throw InputError("shelving correction needs both --alpha and --kts-over-k");
      correction = ShelvingCorrection{qy_alpha, qy_kts_over_k};
    }
    const QuantumYieldResult qy = quantum_yield_from_saturation(
        qy_is, qy_rdet, det, qy_sigma, qy_wavelength, correction);
    json j;
    j["R_det_MHz"] = qy_rdet;
    j["I_s_kW_cm2"] = qy_is;
    j["sigma_cm2"] = qy_sigma;
    j["wavelength_nm"] = qy_wavelength;
    j["detection"] = detection_json(det);
    j["quantum_yield"] = qy.value;
    j["physical"] = qy.physical;
    j["correction_applied"] = qy.correction;
    const double kappa = qy_kts_over_k >= 0.0 ? qy_kts_over_k : 0.5;
    j["bracket_bounds"] = {{"kTS_over_k", kappa},
                           {"min", shelving_bracket(0.0, kappa)},
                           {"max", shelving_bracket(2.0 / 3.0, kappa)}};
    run_ctx.set_config(j);
    run_ctx.write_output("qy.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- odmr --------------------------------------------------------------
  auto* sc_odmr = app.add_subcommand(
      "odmr", "ODMR contrast and its inversion to spin polarization");
  double odmr_contrast_in = -1.0, odmr_alpha_in = -1.0, odmr_ratio = 1.0;
  sc_odmr->add_option("--contrast", odmr_contrast_in,
                      "Measured contrast (inverts to alpha)");
  sc_odmr->add_option("--alpha", odmr_alpha_in, "Spin polarization (computes contrast)");
  sc_odmr->add_option("--k-over-kts", odmr_ratio, "Rate ratio k/k_TS");
  add_common(sc_odmr);
  sc_odmr->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_odmr);
    json j;
    j["k_over_kTS"] = odmr_ratio;
    if ((odmr_contrast_in >= 0.0) == (odmr_alpha_in >= 0.0))
      throw InputError("give exactly one of --contrast or --alpha");
    if (odmr_contrast_in >= 0.0) {
      const AlphaEstimate est = alpha_from_contrast({odmr_contrast_in, odmr_ratio});
      j["contrast"] = odmr_contrast_in;
      j["alpha"] = est.alpha;
      j["physical"] = est.physical;
    } else {
      // Forward direction only needs the ratio k/k_TS; encode it directly.
      PhotophysicsParams p;
      p.k_r = odmr_ratio;
      p.k_nr = 0.0;
      p.k_TS = 1.0;
      j["alpha"] = odmr_alpha_in;
      j["contrast"] = odmr_contrast(p, odmr_alpha_in);
    }
    run_ctx.set_config(j);
    run_ctx.write_output("odmr.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- pulse -------------------------------------------------------------
  auto* sc_pulse =
      app.add_subcommand("pulse", "Excited-state population after a short pulse");
  double pulse_fluence = 0.0, pulse_sigma = 3.1e-17, pulse_sigma_prime = 0.0;
  std::string pulse_scan;
  sc_pulse->add_option("--fluence", pulse_fluence, "Pulse fluence, photons/cm^2")
      ->required();
  sc_pulse->add_option("--sigma-cm2", pulse_sigma, "Ground-state cross-section");
  sc_pulse->add_option("--sigma-prime-cm2", pulse_sigma_prime,
                       "Excited-state cross-section");
  sc_pulse->add_option("--scan", pulse_scan,
                       "Also write a fluence scan: start,stop,points (geometric)");
  add_common(sc_pulse);
  sc_pulse->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_pulse);
    const ShortPulseResponse r =
        short_pulse_population(pulse_fluence, pulse_sigma, pulse_sigma_prime);
    const double total = pulse_sigma + pulse_sigma_prime;
    json j;
    j["fluence_photons_cm2"] = pulse_fluence;
    j["sigma_cm2"] = pulse_sigma;
    j["sigma_prime_cm2"] = pulse_sigma_prime;
    j["exponential"] = r.exponential;
    j["rate_equation"] = r.rate_equation;
    j["asymptote_exponential"] = 1.0;
    j["asymptote_rate_equation"] = total > 0.0 ? pulse_sigma / total : 0.0;
    if (!pulse_scan.empty()) {
      const std::vector<double> scan = parse_number_list(pulse_scan, "--scan");
      if (scan.size() != 3 || !(scan[0] > 0.0) || !(scan[1] > scan[0]) ||
          !(scan[2] >= 2))
        throw InputError("--scan expects start,stop,points with 0 < start < stop");
      const int npts = static_cast<int>(scan[2]);
      const double step =
          std::pow(scan[1] / scan[0], 1.0 / static_cast<double>(npts - 1));
      std::string csv = "fluence_photons_cm2,exponential,rate_equation\n";
      double f = scan[0];
      for (int i = 0; i < npts; ++i, f *= step) {
        const ShortPulseResponse s =
            short_pulse_population(f, pulse_sigma, pulse_sigma_prime);
        csv += format_double(f) + ',' + format_double(s.exponential) + ',' +
               format_double(s.rate_equation) + '\n';
      }
      run_ctx.write_output("pulse_scan.csv", csv);
    }
    run_ctx.set_config(j);
    run_ctx.write_output("pulse.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- spectra-kr --------------------------------------------------------
  auto* sc_spectra = app.add_subcommand(
      "spectra-kr", "Radiative rate from absorption and luminescence spectra");
  std::string spectra_abs_path, spectra_lum_path;
  bool spectra_synthetic = false;
  double spectra_sigma_max = 3.1e-17, spectra_n = kDiamondIndex;
  double spectra_g_ratio = 1.0, spectra_mirror = 15700.0, spectra_step = 10.0;
  sc_spectra->add_option("--absorption", spectra_abs_path,
                         "Absorption CSV (wavenumber_cm1,value)");
  sc_spectra->add_option("--luminescence", spectra_lum_path,
                         "Luminescence CSV (wavenumber_cm1,value)");
  sc_spectra->add_flag("--synthetic", spectra_synthetic,
                       "Use the bundled synthetic NV-like band pair");
  sc_spectra->add_option("--sigma-max-cm2", spectra_sigma_max,
                         "Peak absorption cross-section");
  sc_spectra->add_option("--n", spectra_n, "Refractive index");
  sc_spectra->add_option("--degeneracy-ratio", spectra_g_ratio,
                         "Lower/upper level degeneracy ratio");
  sc_spectra->add_option("--mirror-cm1", spectra_mirror,
                         "Mirror wavenumber for the symmetry diagnostic");
  sc_spectra->add_option("--grid-step-cm1", spectra_step, "Synthetic grid step");
  add_common(sc_spectra);
  sc_spectra->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_spectra);
    Spectrum absorption, luminescence;
    if (spectra_synthetic) {
      if (!spectra_abs_path.empty() || !spectra_lum_path.empty())
        throw InputError("--synthetic excludes --absorption/--luminescence");
      SpectrumPair pair = synthetic_nv_spectra(spectra_step);
      absorption = std::move(pair.absorption);
      luminescence = std::move(pair.luminescence);
      run_ctx.write_output("synthetic_absorption.csv", spectrum_csv(absorption));
      run_ctx.write_output("synthetic_luminescence.csv", spectrum_csv(luminescence));
    } else {
      if (spectra_abs_path.empty() || spectra_lum_path.empty())
        throw InputError("need --absorption and --luminescence (or --synthetic)");
      absorption = read_spectrum_csv(spectra_abs_path, Spectrum::Kind::kAbsorptionShape)
                       .peak_normalized();
      luminescence =
          read_spectrum_csv(spectra_lum_path, Spectrum::Kind::kLuminescenceDensity);
      run_ctx.note_input(spectra_abs_path);
      run_ctx.note_input(spectra_lum_path);
    }
    const SpectralQuantities q = spectral_quantities(absorption, luminescence,
                                                     spectra_sigma_max, spectra_g_ratio);
    json j;
    j["sigma_max_cm2"] = q.sigma_max_cm2;
    j["degeneracy_ratio"] = q.degeneracy_ratio;
    j["n"] = spectra_n;
    j["mean_inv_cubed_cm3"] = q.mean_inv_cubed_cm3;
    j["absorption_integral"] = q.absorption_integral;
    j["radiative_rate_MHz"] = radiative_rate_from_spectra(q, spectra_n);
    j["mirror_wavenumber_cm1"] = spectra_mirror;
    j["mirror_rms_residual"] =
        mirror_symmetry_residual(absorption, luminescence, spectra_mirror);
    j["synthetic"] = spectra_synthetic;
    run_ctx.set_config(j);
    run_ctx.write_output("spectra_kr.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- fit-sat -----------------------------------------------------------
  auto* sc_fit = app.add_subcommand("fit-sat", "Fit saturation curves per crystal");
  PipelineOptions fit_opts;
  sc_fit->add_option("--obs", fit_opts.obs_path, "Observation CSV")->required();
  sc_fit->add_flag("--poisson-weights", fit_opts.poisson_weights,
                   "Weight points by count noise (needs dwell_s)");
  sc_fit->add_option("--beam-waist-um", fit_opts.beam_waist_um,
                     "Correct powers for a Gaussian beam of this waist");
  sc_fit->add_option("--beam-map", fit_opts.beam_map_path,
                     "Correct powers using a tabulated profile (radius_um,factor)");
  add_common(sc_fit);
  sc_fit->callback([&] {
    RunContext run_ctx = make_run(sc_fit);
    PipelineData data = load_and_fit(fit_opts, cfg, run_ctx, false);
    cfg.finish();
    const json j = fit_summary_json(data);
    run_ctx.set_config(j);
    run_ctx.write_output("saturation_fits.csv", fits_csv(data.records));
    run_ctx.write_output("fit_summary.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  // ---- sizing / compare-dls ----------------------------------------------
  auto* sc_sizing = app.add_subcommand(
      "sizing", "Crystal size distribution from luminescence brightness");
  PipelineOptions sizing_opts;
  std::string sizing_dls_path;
  bool sizing_svg = false;
  sc_sizing->add_option("--obs", sizing_opts.obs_path, "Observation CSV")->required();
  sc_sizing->add_option("--dls", sizing_dls_path,
                        "Reference distribution CSV (diameter_nm,weight)");
  sc_sizing->add_option("--bin-width-nm", sizing_opts.bin_width_nm,
                        "Histogram bin width");
  sc_sizing->add_flag("--poisson-weights", sizing_opts.poisson_weights,
                      "Weight fit points by count noise");
  sc_sizing->add_option("--beam-waist-um", sizing_opts.beam_waist_um,
                        "Correct powers for a Gaussian beam of this waist");
  sc_sizing->add_option("--beam-map", sizing_opts.beam_map_path,
                        "Correct powers using a tabulated profile");
  sc_sizing->add_flag("--svg", sizing_svg, "Write an SVG of the histogram");
  add_common(sc_sizing);

  auto run_sizing = [&](const PipelineOptions& opts, const std::string& dls_path,
                        bool want_svg, RunContext& run_ctx) {
    PipelineData data = load_and_fit(opts, cfg, run_ctx, true);
    cfg.finish();
    SizeDistributionResult result = size_distribution(
        data.records, data.suspension, data.detection, data.bin_width_nm);
    json j;
    j["suspension"] = {
        {"mass_concentration_mg_ml", data.suspension.mass_concentration_mg_ml},
        {"drop_volume_ml", data.suspension.drop_volume_ml},
        {"density_g_cm3", data.suspension.density_g_cm3},
        {"total_volume_nm3", data.suspension.total_volume_nm3()}};
    j["detection"] = detection_json(data.detection);
    j["fit"] = fit_summary_json(data);
    j["beta_Hz_nm3"] = result.beta_Hz_nm3;
    j["beta_absolute_photons_s_nm3"] = result.beta_absolute_photons_s_nm3;
    j["fitted_count"] = result.fitted_count;
    j["failed_count"] = result.failed_count;
    j["modal_diameter_nm"] = result.histogram.mode_nm();
    j["diameters_nm"] = result.diameters_nm;
    run_ctx.write_output("size_histogram.csv", histogram_csv(result.histogram));

    const Histogram* overlay = nullptr;
    Histogram dls_hist;
    if (!dls_path.empty()) {
      const fs::path dls(dls_path);
      dls_hist = make_weighted_histogram(read_weighted_diameters(dls),
                                         result.histogram.bin_width_nm);
      run_ctx.note_input(dls);
      run_ctx.write_output("dls_histogram.csv", histogram_csv(dls_hist));
      const DistributionComparison cmp =
          compare_distributions(result.histogram, dls_hist);
      j["comparison"] = {{"mode_lum_nm", cmp.mode_a_nm},
                         {"mode_dls_nm", cmp.mode_b_nm},
                         {"mode_shift_nm", cmp.mode_shift_nm},
                         {"overlap", cmp.overlap}};
      overlay = &dls_hist;
    }
    if (want_svg)
      run_ctx.write_output(
          "size_histogram.svg",
          svg_histogram(result.histogram, overlay, "Crystal size distribution (nm)"));
    run_ctx.set_config(j);
    run_ctx.write_output("sizing_result.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  };
  sc_sizing->callback([&] {
    RunContext run_ctx = make_run(sc_sizing);
    run_sizing(sizing_opts, sizing_dls_path, sizing_svg, run_ctx);
  });

  auto* sc_cmp = app.add_subcommand(
      "compare-dls", "Size the batch and compare against a reference distribution");
  PipelineOptions cmp_opts;
  std::string cmp_dls_path;
  bool cmp_svg = false;
  sc_cmp->add_option("--obs", cmp_opts.obs_path, "Observation CSV")->required();
  sc_cmp->add_option("--dls", cmp_dls_path, "Reference CSV (diameter_nm,weight)")
      ->required();
  sc_cmp->add_option("--bin-width-nm", cmp_opts.bin_width_nm, "Histogram bin width");
  sc_cmp->add_flag("--poisson-weights", cmp_opts.poisson_weights,
                   "Weight fit points by count noise");
  sc_cmp->add_option("--beam-waist-um", cmp_opts.beam_waist_um,
                     "Correct powers for a Gaussian beam of this waist");
  sc_cmp->add_option("--beam-map", cmp_opts.beam_map_path,
                     "Correct powers using a tabulated profile");
  sc_cmp->add_flag("--svg", cmp_svg, "Write an SVG overlaying both distributions");
  add_common(sc_cmp);
  sc_cmp->callback([&] {
    RunContext run_ctx = make_run(sc_cmp);
    run_sizing(cmp_opts, cmp_dls_path, cmp_svg, run_ctx);
  });

  // ---- simulate ----------------------------------------------------------
  auto* sc_sim = app.add_subcommand(
      "simulate", "Generate a synthetic crystal batch with ground truth");
  EnsembleConfig sim_cfg;
  sim_cfg.seed = 42;
  sim_cfg.photophysics = photophysics_from(cfg, base_params);
  sim_cfg.detection = detection_from(cfg, DetectionChain::nano_on_glass());
  sim_cfg.crystal_count = static_cast<std::size_t>(cfg.number(
      "ensemble.crystal_count", static_cast<double>(sim_cfg.crystal_count)));
  sim_cfg.size.median_nm = cfg.number("ensemble.median_nm", sim_cfg.size.median_nm);
  sim_cfg.size.sigma_log = cfg.number("ensemble.sigma_log", sim_cfg.size.sigma_log);
  sim_cfg.shape.min_ratio = cfg.number("ensemble.ratio_min", sim_cfg.shape.min_ratio);
  sim_cfg.shape.max_ratio = cfg.number("ensemble.ratio_max", sim_cfg.shape.max_ratio);
  sim_cfg.nv_density_per_nm3 =
      cfg.number("ensemble.nv_density_per_nm3", sim_cfg.nv_density_per_nm3);
  sim_cfg.nv_free_fraction =
      cfg.number("ensemble.nv_free_fraction", sim_cfg.nv_free_fraction);
  EnvOptions sim_env;
  double sim_dwell = 0.1, sim_beam_waist = 1000.0;
  bool sim_noise_off = false;
  std::string sim_powers;
  sc_sim->add_option("--crystals", sim_cfg.crystal_count, "Number of crystals");
  sc_sim->add_option("--seed", sim_cfg.seed, "RNG seed");
  sc_sim->add_option("--median-nm", sim_cfg.size.median_nm, "Median diameter");
  sc_sim->add_option("--sigma-log", sim_cfg.size.sigma_log, "Lognormal log-sd");
  sc_sim->add_option("--ratio-min", sim_cfg.shape.min_ratio, "Smallest axis ratio");
  sc_sim->add_option("--ratio-max", sim_cfg.shape.max_ratio, "Largest axis ratio");
  sc_sim->add_option("--nv-density", sim_cfg.nv_density_per_nm3, "Centers per nm^3");
  sc_sim->add_option("--nv-free-fraction", sim_cfg.nv_free_fraction,
                     "Fraction of crystals without centers");
  sc_sim->add_option("--field-radius-um", sim_cfg.field_radius_um,
                     "Field-of-view radius");
  sc_sim->add_option("--kappa", sim_cfg.power_calibration_kW_cm2_per_W,
                     "Center irradiance per watt, kW/cm^2/W");
  sc_sim->add_option("--wavelength-nm", sim_cfg.wavelength_nm, "Wavelength");
  sc_sim->add_option("--params", params_flag, "Photophysics preset: bulk or nano");
  sc_sim->add_option("--phi-pd", sim_cfg.detection.phi_pd, "Photodetector efficiency");
  sc_sim->add_option("--phi-opt", sim_cfg.detection.phi_opt, "Collection efficiency");
  add_env_options(sc_sim, sim_env);
  sc_sim->add_option("--dwell-s", sim_dwell, "Dwell time per point");
  sc_sim->add_flag("--noise-off", sim_noise_off, "Record exact expected rates");
  sc_sim->add_option("--beam-waist-um", sim_beam_waist, "Gaussian beam waist");
  sc_sim->add_option("--powers", sim_powers,
                     "Comma-separated powers in W (default: grid around median P_s)");
  add_common(sc_sim);
  sc_sim->callback([&] {
    cfg.finish();
    RunContext run_ctx = make_run(sc_sim);
    sim_cfg.environment = make_environment(sim_env);

    const std::vector<SyntheticCrystal> crystals = sample_ensemble(sim_cfg);
    std::vector<double> powers;
    if (!sim_powers.empty()) {
      powers = parse_number_list(sim_powers, "--powers");
    } else {
      powers = default_power_grid(crystals);
    }
    const IrradianceProfile beam = IrradianceProfile::gaussian(sim_beam_waist);
    const std::vector<CrystalRecord> records = synthesize_observations(
        crystals, beam, powers, sim_noise_off ? 0.0 : sim_dwell, sim_cfg.seed);

    const EnsembleTruth truth = ensemble_truth(crystals);
    // Suspension matched to the generated batch, so the sizing pipeline can
    // run on these files directly.
    SuspensionSpec suspension;
    suspension.drop_volume_ml = 8.4e-5;
    suspension.density_g_cm3 = 3.5;
    suspension.mass_concentration_mg_ml = truth.total_volume_nm3 *
                                          suspension.density_g_cm3 /
                                          suspension.drop_volume_ml * 1e-18;
    std::string drop_cfg;
    drop_cfg += "# suspension matched to the generated ensemble\n";
    drop_cfg += "suspension.mass_concentration_mg_ml = " +
                format_double(suspension.mass_concentration_mg_ml) + "\n";
    drop_cfg +=
        "suspension.drop_volume_ml = " + format_double(suspension.drop_volume_ml) + "\n";
    drop_cfg +=
        "suspension.density_g_cm3 = " + format_double(suspension.density_g_cm3) + "\n";
    drop_cfg += "detection.phi_pd = " + format_double(sim_cfg.detection.phi_pd) + "\n";
    drop_cfg += "detection.phi_opt = " + format_double(sim_cfg.detection.phi_opt) + "\n";
    drop_cfg += "beam.waist_um = " + format_double(sim_beam_waist) + "\n";

    long dark = 0;
    for (const SyntheticCrystal& c : crystals)
      if (c.R_det_Hz <= 0.0) ++dark;

    json j;
    j["crystal_count"] = sim_cfg.crystal_count;
    j["seed"] = sim_cfg.seed;
    j["environment"] = environment_json(sim_cfg.environment);
    j["photophysics"] = photophysics_json(sim_cfg.photophysics);
    j["detection"] = detection_json(sim_cfg.detection);
    j["size"] = {{"median_nm", sim_cfg.size.median_nm},
                 {"sigma_log", sim_cfg.size.sigma_log}};
    j["shape_bounds"] = {{"min_ratio", sim_cfg.shape.min_ratio},
                         {"max_ratio", sim_cfg.shape.max_ratio}};
    j["nv_density_per_nm3"] = sim_cfg.nv_density_per_nm3;
    j["nv_free_fraction"] = sim_cfg.nv_free_fraction;
    j["powers_W"] = powers;
    j["dwell_s"] = sim_noise_off ? 0.0 : sim_dwell;
    j["beam_waist_um"] = sim_beam_waist;
    j["kappa_kW_cm2_per_W"] = sim_cfg.power_calibration_kW_cm2_per_W;
    j["truth"] = {{"total_volume_nm3", truth.total_volume_nm3},
                  {"beta_Hz_nm3", truth.beta_Hz_nm3},
                  {"modal_diameter_nm", truth.modal_diameter_nm},
                  {"dark_count", dark}};
    run_ctx.set_config(j);
    run_ctx.write_output("sim_observations.csv", observation_csv(records));
    run_ctx.write_output("sim_truth.csv", ensemble_truth_csv(crystals));
    run_ctx.write_output("sim_drop.cfg", drop_cfg);
    run_ctx.write_output("sim_summary.json", j.dump(2) + "\n");
    run_ctx.write_manifest();
    emit(j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return run_impl(argc, argv);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace nvphys::cli
