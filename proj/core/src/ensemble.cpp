#include "nvphys/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nvphys/errors.hpp"
#include "nvphys/rng.hpp"

namespace nvphys {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Dipole-pair weights for a center whose symmetry axis is u (crystal
// frame): the two orthogonal dipoles span the plane normal to u, so their
// average projection onto crystal axis j is (1 - u_j^2)/2.
std::array<double, 3> pair_weights(const std::array<double, 3>& u) {
  return {0.5 * (1.0 - u[0] * u[0]), 0.5 * (1.0 - u[1] * u[1]),
          0.5 * (1.0 - u[2] * u[2])};
}

double project(const std::array<double, 3>& dir, const std::array<double, 3>& factors) {
  return dir[0] * dir[0] * factors[0] + dir[1] * dir[1] * factors[1] +
         dir[2] * dir[2] * factors[2];
}

}  // namespace

void EnsembleConfig::validate() const {
  if (crystal_count == 0) throw InputError("ensemble needs at least one crystal");
  if (!(size.median_nm > 0.0)) throw InputError("size median must be positive");
  if (!(size.sigma_log >= 0.0)) throw InputError("size spread must be nonnegative");
  if (!(shape.min_ratio > 0.0 && shape.min_ratio <= shape.max_ratio &&
        shape.max_ratio <= 1.0))
    throw InputError("shape ratio bounds must satisfy 0 < min <= max <= 1");
  if (!(nv_density_per_nm3 >= 0.0)) throw InputError("center density must be nonnegative");
  if (!(nv_free_fraction >= 0.0 && nv_free_fraction <= 1.0))
    throw InputError("dark fraction must lie in [0, 1]");
  if (!(field_radius_um >= 0.0)) throw InputError("field radius must be nonnegative");
  if (!(power_calibration_kW_cm2_per_W > 0.0))
    throw InputError("power calibration must be positive");
  if (!(wavelength_nm > 0.0)) throw InputError("wavelength must be positive");
  environment.validate();
  photophysics.validate();
  detection.validate();
}

std::vector<SyntheticCrystal> sample_ensemble(const EnsembleConfig& config) {
  config.validate();

  std::vector<SyntheticCrystal> crystals(config.crystal_count);
  const double log_median = std::log(config.size.median_nm);

  for (std::size_t idx = 0; idx < config.crystal_count; ++idx) {
    SplitMix64 rng(config.seed, idx);
    SyntheticCrystal& c = crystals[idx];
    c.id = idx;

    const double r = config.field_radius_um * std::sqrt(rng.uniform());
    const double phi = kTwoPi * rng.uniform();
    c.x_um = r * std::cos(phi);
    c.y_um = r * std::sin(phi);

    c.orientation = rng.rotation_quaternion();

    c.diameter_nm = rng.lognormal(log_median, config.size.sigma_log);
    c.volume_nm3 = kPi / 6.0 * c.diameter_nm * c.diameter_nm * c.diameter_nm;

    const double u1 = rng.uniform(config.shape.min_ratio, config.shape.max_ratio);
    const double u2 = rng.uniform(config.shape.min_ratio, config.shape.max_ratio);
    const double ratio_b = std::max(u1, u2);
    const double ratio_c = std::min(u1, u2);
    // Longest full axis from the equivalent-sphere volume pi/6 A^3 rb rc.
    const double axis_a = c.diameter_nm / std::cbrt(ratio_b * ratio_c);
    c.axes_nm = {axis_a, axis_a * ratio_b, axis_a * ratio_c};

    const bool dark = rng.uniform() < config.nv_free_fraction;
    c.nv_count = dark ? 0 : rng.poisson(config.nv_density_per_nm3 * c.volume_nm3);

    const Ellipsoid shape(1.0, ratio_b, ratio_c);
    const FieldCoupling fc = coupling_factors(shape, config.environment);

    // Axis of the first center doubles as the diagnostics probe; every
    // center's axis is drawn in the lab frame and carried into the crystal
    // frame through the orientation.
    const std::array<double, 3> probe_lab = rng.unit_vector();
    const std::array<double, 3> probe = rotate_inverse(c.orientation, probe_lab);
    const double psi = kTwoPi * rng.uniform();

    std::array<double, 3> mean_w = pair_weights(probe);
    for (long nv = 1; nv < c.nv_count; ++nv) {
      const std::array<double, 3> axis =
          rotate_inverse(c.orientation, rng.unit_vector());
      const std::array<double, 3> w = pair_weights(axis);
      for (int j = 0; j < 3; ++j) mean_w[j] += w[j];
    }
    const double norm = static_cast<double>(std::max<long>(c.nv_count, 1));
    for (int j = 0; j < 3; ++j) mean_w[j] /= norm;

    c.absorption_factor = mean_w[0] * fc.absorption_factor[0] +
                          mean_w[1] * fc.absorption_factor[1] +
                          mean_w[2] * fc.absorption_factor[2];
    c.emission_factor = mean_w[0] * fc.emission_factor[0] +
                        mean_w[1] * fc.emission_factor[1] +
                        mean_w[2] * fc.emission_factor[2];

    // The two dipole channels of the probe axis: an orthonormal basis of
    // its normal plane, rotated by psi within the plane.
    {
      // e1 = normalize(anchor x probe), anchor chosen away from probe.
      const std::array<double, 3> anchor =
          std::fabs(probe[2]) < 0.9 ? std::array<double, 3>{0.0, 0.0, 1.0}
                                    : std::array<double, 3>{1.0, 0.0, 0.0};
      std::array<double, 3> e1{anchor[1] * probe[2] - anchor[2] * probe[1],
                               anchor[2] * probe[0] - anchor[0] * probe[2],
                               anchor[0] * probe[1] - anchor[1] * probe[0]};
      const double len = std::sqrt(e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]);
      for (double& v : e1) v /= len;
      const std::array<double, 3> e2{probe[1] * e1[2] - probe[2] * e1[1],
                                     probe[2] * e1[0] - probe[0] * e1[2],
                                     probe[0] * e1[1] - probe[1] * e1[0]};
      const double cp = std::cos(psi), sp = std::sin(psi);
      const std::array<double, 3> d1{cp * e1[0] + sp * e2[0], cp * e1[1] + sp * e2[1],
                                     cp * e1[2] + sp * e2[2]};
      const std::array<double, 3> d2{probe[1] * d1[2] - probe[2] * d1[1],
                                     probe[2] * d1[0] - probe[0] * d1[2],
                                     probe[0] * d1[1] - probe[1] * d1[0]};
      c.dipole_emission_factors = {project(d1, fc.emission_factor),
                                   project(d2, fc.emission_factor)};
    }

    PhotophysicsParams eff = config.photophysics;
    eff.sigma *= c.absorption_factor;
    eff.sigma_prime *= c.absorption_factor;
    eff.k_r *= c.emission_factor;
    c.sigma_eff_cm2 = eff.sigma;
    c.k_r_eff_MHz = eff.k_r;

    ExcitationConditions exc;
    exc.wavelength_nm = config.wavelength_nm;
    c.I_s_kW_cm2 = saturation_intensity(eff, exc);
    c.P_s_W = c.I_s_kW_cm2 / config.power_calibration_kW_cm2_per_W;
    c.R_det_Hz = static_cast<double>(c.nv_count) *
                 max_detected_rate(eff, config.detection) * 1e6;
  }
  return crystals;
}

std::vector<CrystalRecord> synthesize_observations(
    const std::vector<SyntheticCrystal>& crystals, const IrradianceProfile& profile,
    const std::vector<double>& powers_W, double dwell_s, std::uint64_t seed) {
  if (powers_W.empty()) throw InputError("no excitation powers given");
  for (double p : powers_W)
    if (!(p > 0.0)) throw InputError("excitation powers must be positive");

  std::vector<CrystalRecord> records;
  records.reserve(crystals.size());
  for (const SyntheticCrystal& c : crystals) {
    SplitMix64 rng(seed ^ 0xC2B2AE3D27D4EB4Full, c.id);
    CrystalRecord rec;
    char id[32];
    std::snprintf(id, sizeof(id), "c%05zu", c.id);
    rec.id = id;
    rec.x_um = c.x_um;
    rec.y_um = c.y_um;
    const double f = profile.factor_at(c.x_um, c.y_um);
    if (!(f > 0.0)) throw InputError("irradiance factor must be positive");
    for (double P : powers_W) {
      const double expected =
          c.R_det_Hz * f * P / (f * P + c.P_s_W);
      RatePoint pt;
      pt.power_W = P;
      pt.dwell_s = dwell_s;
      if (dwell_s > 0.0) {
        pt.rate_Hz =
            static_cast<double>(rng.poisson(expected * dwell_s)) / dwell_s;
      } else {
        pt.rate_Hz = expected;  // noise off
        pt.dwell_s = 0.0;
      }
      rec.points.push_back(pt);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<double> default_power_grid(const std::vector<SyntheticCrystal>& crystals) {
  std::vector<double> ps;
  for (const SyntheticCrystal& c : crystals)
    if (c.R_det_Hz > 0.0) ps.push_back(c.P_s_W);
  if (ps.empty()) throw InputError("no bright crystals in the ensemble");
  std::sort(ps.begin(), ps.end());
  const double median = ps[ps.size() / 2];

  constexpr int kPoints = 12;
  const double lo = median / 20.0;
  const double hi = median * 20.0;
  const double step = std::pow(hi / lo, 1.0 / (kPoints - 1));
  std::vector<double> grid(kPoints);
  double p = lo;
  for (int i = 0; i < kPoints; ++i, p *= step) grid[i] = p;
  return grid;
}

EnsembleTruth ensemble_truth(const std::vector<SyntheticCrystal>& crystals,
                             double bin_width_nm) {
  if (crystals.empty()) throw InputError("empty ensemble");
  double v_tot = 0.0;
  double rate_sum = 0.0;
  std::vector<double> diameters;
  diameters.reserve(crystals.size());
  for (const SyntheticCrystal& c : crystals) {
    v_tot += c.volume_nm3;
    rate_sum += c.R_det_Hz;
    if (c.R_det_Hz > 0.0) diameters.push_back(c.diameter_nm);
  }
  EnsembleTruth t;
  t.total_volume_nm3 = v_tot;
  t.beta_Hz_nm3 = rate_sum / v_tot;
  t.modal_diameter_nm = make_histogram(diameters, bin_width_nm).mode_nm();
  return t;
}

SpreadStats radiative_spread_stats(const std::vector<SyntheticCrystal>& crystals) {
  std::vector<double> f;
  f.reserve(2 * crystals.size());
  for (const SyntheticCrystal& c : crystals) {
    f.push_back(c.dipole_emission_factors[0]);
    f.push_back(c.dipole_emission_factors[1]);
  }
  if (f.empty()) throw InputError("empty ensemble");
  std::sort(f.begin(), f.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(f.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= f.size()) return f.back();
    const double t = pos - static_cast<double>(i);
    return f[i] + t * (f[i + 1] - f[i]);
  };
  return {f.front(), f.back(), quantile(0.05), quantile(0.95)};
}

}  // namespace nvphys
