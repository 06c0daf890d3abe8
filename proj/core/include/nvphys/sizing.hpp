#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nvphys/rate_model.hpp"

namespace nvphys {

/// Diamond mass balance of a dried drop of suspension.
struct SuspensionSpec {
  double mass_concentration_mg_ml;
  double drop_volume_ml;
  double density_g_cm3 = 3.5;

  /// Total diamond volume in the drop, nm^3 (1 cm^3 = 1e21 nm^3).
  double total_volume_nm3() const;

  void validate() const;
};

/// One measured point of a saturation curve.  dwell_s = 0 means the dwell
/// time is unknown; Poisson weighting then falls back to unweighted.
struct RatePoint {
  double power_W;
  double rate_Hz;
  double dwell_s = 0.0;
};

/// Result of fitting rate = R P / (P + P_s).
struct SaturationFit {
  double R_det_Hz;
  double P_s_W;
  double R_det_err_Hz;     // standard errors from the fit covariance
  double P_s_err_W;
  double covariance_RP;    // off-diagonal covariance element
  double rss;              // weighted residual sum of squares
  int iterations;
  // True when the powers do not bracket the fitted P_s or fewer than
  // 3 distinct powers were supplied.
  bool low_confidence;
};

/// Least-squares saturation fit.  Deterministic start values: R0 twice the
/// largest rate, P_s0 the power where the rates cross half the largest
/// rate (linear interpolation).  poisson_weights uses variance
/// rate/dwell for points with a dwell time.
/// Throws InputError on degenerate data, NumericError on non-convergence.
SaturationFit fit_saturation(const std::vector<RatePoint>& points,
                             bool poisson_weights = false);

/// Relative illumination across the field of view, normalized to 1 at the
/// beam center.  Either a Gaussian profile or a tabulated radial map.
class IrradianceProfile {
 public:
  /// exp(-2 r^2 / waist^2) with waist the 1/e^2 radius.
  static IrradianceProfile gaussian(double waist_um);

  /// Piecewise-linear in radius; first sample must be (0, 1), factors in
  /// (0, 1], radii increasing.  Beyond the last radius the profile holds
  /// its final value.
  static IrradianceProfile tabulated(std::vector<std::pair<double, double>> radius_factor);

  /// Uniform illumination.
  static IrradianceProfile flat();

  double factor_at(double x_um, double y_um) const;

 private:
  IrradianceProfile() = default;
  double waist_um_ = 0.0;  // 0 means tabulated or flat
  std::vector<std::pair<double, double>> table_;
};

/// One detected crystal: measured points plus derived quantities.
struct CrystalRecord {
  std::string id;
  double x_um = 0.0;
  double y_um = 0.0;
  std::vector<RatePoint> points;

  double irradiance_factor = 1.0;
  std::optional<SaturationFit> fit;
  std::optional<std::string> fit_failure;

  double diameter_nm = 0.0;
  double volume_nm3 = 0.0;
};

/// Fit every record, storing failures instead of throwing.
void fit_all_records(std::vector<CrystalRecord>& records, bool poisson_weights = false);

/// Rescale each record to beam-center-equivalent powers: powers and any
/// fitted P_s are multiplied by the local irradiance factor.  R_det is an
/// asymptote and stays put.  Throws InputError on factors <= 0.
void apply_irradiance_correction(std::vector<CrystalRecord>& records,
                                 const IrradianceProfile& profile);

/// Saturation power on the raw power axis for a crystal that receives
/// `factor` of the center irradiance: P_s_center / factor.
double raw_axis_saturation_power(double center_P_s_W, double factor);

/// Uniform-bin histogram over [origin, origin + bins * width).
struct Histogram {
  double origin_nm = 0.0;
  double bin_width_nm = 20.0;
  std::vector<double> weights;

  double mode_nm() const;       // center of the heaviest bin
  double total() const;
  Histogram rebinned(double origin_nm, double bin_width_nm) const;
};

Histogram make_histogram(const std::vector<double>& diameters_nm,
                         double bin_width_nm = 20.0, double origin_nm = 0.0);

/// Weighted variant for externally binned data.
Histogram make_weighted_histogram(const std::vector<std::pair<double, double>>& diameter_weight,
                                  double bin_width_nm = 20.0, double origin_nm = 0.0);

struct SizeDistributionResult {
  double beta_Hz_nm3;                     // detected specific brightness
  double beta_absolute_photons_s_nm3;     // beta / phi_det
  std::vector<double> diameters_nm;       // one per fitted record, record order
  Histogram histogram;
  std::size_t fitted_count;
  std::size_t failed_count;
};

/// Volume bookkeeping: beta = sum of fitted R_det over the total drop
/// volume; each record's volume is R_det / beta and its diameter the
/// equivalent-sphere value (6V/pi)^(1/3).  Unfitted records are excluded
/// from beta and counted separately.
SizeDistributionResult size_distribution(std::vector<CrystalRecord>& records,
                                         const SuspensionSpec& spec,
                                         const DetectionChain& det,
                                         double bin_width_nm = 20.0);

/// Emitted photon rate per color center, MHz, for a spherical crystal:
/// beta_absolute (pi d^3/6) / nv_count / 1e6.
double brightness_per_center_MHz(double beta_absolute_photons_s_nm3, double diameter_nm,
                                 double nv_count);

struct DistributionComparison {
  double mode_a_nm;
  double mode_b_nm;
  double mode_shift_nm;  // a minus b
  double overlap;        // shared fraction of normalized mass, in [0, 1]
};

/// Compares two size histograms after rebinning b onto a's axis.
DistributionComparison compare_distributions(const Histogram& a, const Histogram& b);

}  // namespace nvphys
