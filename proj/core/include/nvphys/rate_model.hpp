#pragma once

#include <optional>

#include "nvphys/constants.hpp"

namespace nvphys {

/// Reduced NV level scheme: ground triplet, excited triplet, long-lived
/// singlet shelf.  Rates in MHz, cross-sections in cm^2.
struct PhotophysicsParams {
  double sigma = 3.1e-17;    // ground to excited triplet absorption
  double sigma_prime = 0.0;  // excited-state absorption, relaxes to ground
  double k_r = 44.0;         // radiative decay of the excited triplet
  double k_nr = 36.0;        // nonradiative decay to the ground triplet
  double k_TS = 40.0;        // excited triplet (m = +-1) to singlet crossing
  double k_ST = 10.0 / 3.0;  // singlet to ground triplet decay
  double alpha = 0.2;        // relative m = +-1 population, in [0, 2/3]

  /// Total excited-triplet decay rate excluding the singlet branch.
  double k() const { return k_r + k_nr; }

  /// Throws InputError on negative rates or alpha outside [0, 2/3].
  void validate() const;

  static PhotophysicsParams bulk();
  static PhotophysicsParams nanocrystal();
};

/// Probabilities of the three manifolds; always sums to 1.
struct PopulationState {
  double rho_T;       // ground triplet
  double rho_T_star;  // excited triplet
  double rho_S;       // singlet shelf
};

/// Continuous or pulsed excitation.  Intensity is a power density; the
/// photon-flux accessor divides by the photon energy hc/lambda.
struct ExcitationConditions {
  double wavelength_nm = kDefaultWavelength_nm;
  double intensity_kW_cm2 = 0.0;
  double pulse_fluence_photons_cm2 = 0.0;

  double photon_flux_cm2_s() const {
    return photon_flux_per_cm2_s(intensity_kW_cm2, wavelength_nm);
  }
};

/// Photodetector times collection efficiency.
struct DetectionChain {
  double phi_pd = 0.7;
  double phi_opt = kOpticalEfficiencyBulk;

  double phi_det() const { return phi_pd * phi_opt; }
  void validate() const;

  static DetectionChain bulk();
  static DetectionChain nano_on_glass();
};

/// Measured microwave-on/off luminescence contrast plus the rate ratio
/// needed to invert it.
struct ODMRData {
  double contrast;
  double k_over_kTS;
};

/// Spin polarization recovered from ODMR contrast.  `physical` is false
/// when the inversion lands outside [0, 2/3]; the value is still returned.
struct AlphaEstimate {
  double alpha;
  bool physical;
};

/// Luminescence quantum yield from a saturation measurement.  `physical`
/// is false for yields above 1 (inconsistent inputs); `correction` echoes
/// the shelving bracket that was divided out (1 when none was requested).
struct QuantumYieldResult {
  double value;
  bool physical;
  double correction;
};

/// Excited-triplet population at the end of a short pulse of given fluence.
/// `exponential` treats every absorbed photon as exciting and saturates at 1:
/// rho = 1 - exp(-E (sigma + sigma')).  `rate_equation` solves
/// d rho/dE = sigma (1 - rho) - sigma' rho exactly and saturates at
/// sigma/(sigma + sigma').  The two coincide when sigma' = 0.
struct ShortPulseResponse {
  double exponential;
  double rate_equation;
};

/// Optional shelving correction for quantum-yield estimates.
struct ShelvingCorrection {
  double alpha;
  double kTS_over_k;
};

/// Steady-state populations under continuous excitation.
/// Throws NumericError when k_ST = 0 with alpha k_TS > 0 (the singlet
/// would accumulate without bound).
PopulationState steady_state(const PhotophysicsParams& p, const ExcitationConditions& exc);

/// Detected photon rate k_r phi_det rho_T* at the given intensity, MHz.
double detected_rate(const PhotophysicsParams& p, const ExcitationConditions& exc,
                     const DetectionChain& det);

/// Detected-rate asymptote at infinite intensity, MHz.
/// Throws InputError when sigma = 0.
double max_detected_rate(const PhotophysicsParams& p, const DetectionChain& det);

/// Intensity at which the detected rate reaches half its asymptote, kW/cm^2.
double saturation_intensity(const PhotophysicsParams& p, const ExcitationConditions& exc);

/// Photon-emission probability per excitation event at spin polarization
/// alpha: p = (1 - alpha) k_r/k + alpha k_r/(k + k_TS).
double emission_probability(const PhotophysicsParams& p, double alpha);

/// ODMR contrast C = (2/3 - alpha) / (1 + k/k_TS - alpha).
double odmr_contrast(const PhotophysicsParams& p, double alpha);

/// Inverse of odmr_contrast: alpha = [2/3 - C (1 + k/k_TS)] / (1 - C).
AlphaEstimate alpha_from_contrast(const ODMRData& data);

/// Shelving bracket 1 + alpha k_TS/k dividing the naive yield estimate.
double shelving_bracket(double alpha, double kTS_over_k);

/// Quantum yield from fitted saturation parameters:
/// Phi = R_det (hc/lambda) / (I_s phi_det sigma), optionally divided by the
/// shelving bracket.
QuantumYieldResult quantum_yield_from_saturation(
    double I_s_kW_cm2, double R_det_MHz, const DetectionChain& det, double sigma_cm2,
    double wavelength_nm, const std::optional<ShelvingCorrection>& correction = {});

ShortPulseResponse short_pulse_population(double fluence_photons_cm2, double sigma_cm2,
                                          double sigma_prime_cm2);

}  // namespace nvphys
