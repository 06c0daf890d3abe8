#pragma once

#include <cstdint>
#include <vector>

#include "nvphys/optics.hpp"
#include "nvphys/rate_model.hpp"
#include "nvphys/sizing.hpp"

namespace nvphys {

/// 300 centers per 100 nm equivalent sphere, in nm^-3.
inline constexpr double kDefaultNvDensity_per_nm3 = 300.0 / 523598.7755982988;

/// Lognormal distribution of equivalent-sphere diameters.
struct SizeLognormal {
  double median_nm = 70.0;
  double sigma_log = 0.3;
};

/// Axis-ratio bounds: both middle/longest and shortest/longest drawn
/// uniformly from [min_ratio, max_ratio].
struct ShapeBounds {
  double min_ratio = 0.5;
  double max_ratio = 1.0;
};

struct EnsembleConfig {
  std::size_t crystal_count = 500;
  SizeLognormal size;
  ShapeBounds shape;
  double nv_density_per_nm3 = kDefaultNvDensity_per_nm3;
  double nv_free_fraction = 0.0;  // crystals with no detectable centers
  double field_radius_um = 600.0;
  // Center irradiance produced by one watt of excitation power.
  double power_calibration_kW_cm2_per_W = 77.8;
  double wavelength_nm = kDefaultWavelength_nm;
  OpticalEnvironment environment;
  PhotophysicsParams photophysics;  // bulk reference values
  DetectionChain detection;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One generated crystal with its ground truth.
struct SyntheticCrystal {
  std::size_t id;
  std::array<double, 3> axes_nm;     // full axis lengths, longest first
  std::array<double, 4> orientation; // crystal-to-lab unit quaternion (w,x,y,z)
  double x_um;
  double y_um;
  long nv_count;

  // Center-averaged scale factors relative to bulk, and the two dipole
  // channels of the first center's axis for spread diagnostics.
  double emission_factor;
  double absorption_factor;
  std::array<double, 2> dipole_emission_factors;

  double sigma_eff_cm2;
  double k_r_eff_MHz;
  double R_det_Hz;      // detected-rate asymptote, 0 for dark crystals
  double I_s_kW_cm2;    // saturation intensity at the crystal
  double P_s_W;         // center-equivalent saturation power, I_s / calibration
  double diameter_nm;   // equivalent sphere
  double volume_nm3;
};

/// Deterministic for a fixed config: crystal k draws only from RNG
/// substream k, so the result is independent of evaluation order.
std::vector<SyntheticCrystal> sample_ensemble(const EnsembleConfig& config);

/// Noisy saturation measurements for each crystal at the given powers,
/// shaped like the sizing input: expected rate R f P/(f P + P_s) with f the
/// local irradiance factor, counts Poisson(rate * dwell).  dwell_s <= 0
/// switches noise off and records the exact expected rates.
std::vector<CrystalRecord> synthesize_observations(
    const std::vector<SyntheticCrystal>& crystals, const IrradianceProfile& profile,
    const std::vector<double>& powers_W, double dwell_s, std::uint64_t seed);

/// Geometric 12-point power grid spanning 1/20 to 20 times the median
/// center-equivalent saturation power of the bright crystals.
std::vector<double> default_power_grid(const std::vector<SyntheticCrystal>& crystals);

/// Ensemble-level ground truth for recovery tests.
struct EnsembleTruth {
  double total_volume_nm3;   // over all crystals, dark ones included
  double beta_Hz_nm3;        // sum of true R_det over total volume
  double modal_diameter_nm;  // histogram mode of true diameters
};
EnsembleTruth ensemble_truth(const std::vector<SyntheticCrystal>& crystals,
                             double bin_width_nm = 20.0);

/// Spread of the per-dipole radiative factors across the ensemble.
struct SpreadStats {
  double min_factor;
  double max_factor;
  double p05;
  double p95;
};
SpreadStats radiative_spread_stats(const std::vector<SyntheticCrystal>& crystals);

}  // namespace nvphys
