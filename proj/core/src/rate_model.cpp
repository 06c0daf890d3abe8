#include "nvphys/rate_model.hpp"

#include <cmath>

#include "nvphys/errors.hpp"

namespace nvphys {

namespace {

constexpr double kEquilibriumAlpha = 2.0 / 3.0;

// Singlet shelving ratio alpha k_TS / k_ST, with the harmless 0/0 case
// (no shelving at all) resolved to 0.
double shelving_ratio(const PhotophysicsParams& p) {
  if (p.k_ST > 0.0) return p.alpha * p.k_TS / p.k_ST;
  if (p.alpha * p.k_TS > 0.0)
    throw NumericError("singlet decay rate is zero while shelving is active");
  return 0.0;
}

}  // namespace

void PhotophysicsParams::validate() const {
  if (sigma < 0.0 || sigma_prime < 0.0)
    throw InputError("cross-sections must be nonnegative");
  if (k_r < 0.0 || k_nr < 0.0 || k_TS < 0.0 || k_ST < 0.0)
    throw InputError("rates must be nonnegative");
  if (!(alpha >= 0.0 && alpha <= kEquilibriumAlpha))
    throw InputError("alpha must lie in [0, 2/3]");
}

PhotophysicsParams PhotophysicsParams::bulk() { return {}; }

PhotophysicsParams PhotophysicsParams::nanocrystal() {
  PhotophysicsParams p;
  p.sigma = 1.3e-17;
  p.k_r = 5.0;
  p.k_nr = 35.0;
  p.k_TS = 40.0;
  return p;
}

void DetectionChain::validate() const {
  if (!(phi_pd >= 0.0 && phi_pd <= 1.0 && phi_opt >= 0.0 && phi_opt <= 1.0))
    throw InputError("detection efficiencies must lie in [0, 1]");
}

DetectionChain DetectionChain::bulk() { return {}; }

DetectionChain DetectionChain::nano_on_glass() {
  return {0.7, kOpticalEfficiencyNanoOnGlass};
}

PopulationState steady_state(const PhotophysicsParams& p, const ExcitationConditions& exc) {
  p.validate();
  if (exc.intensity_kW_cm2 < 0.0) throw InputError("intensity must be nonnegative");
  if (exc.intensity_kW_cm2 == 0.0) return {1.0, 0.0, 0.0};

  const double flux = exc.photon_flux_cm2_s();
  const double g = p.sigma * flux / 1e6;        // ground pumping rate, MHz
  const double g_esa = p.sigma_prime * flux / 1e6;
  const double shelve = shelving_ratio(p);

  // Balance of pumping against decay, excited-state absorption, and the
  // singlet detour: rho* = g / (g (1 + sigma'/sigma + shelve) + k + alpha k_TS)
  // written without the sigma ratio so sigma = 0 stays finite.
  const double rho_star =
      g / (g + g_esa + g * shelve + p.k() + p.alpha * p.k_TS);
  const double rho_s = rho_star * shelve;
  return {1.0 - rho_star - rho_s, rho_star, rho_s};
}

double detected_rate(const PhotophysicsParams& p, const ExcitationConditions& exc,
                     const DetectionChain& det) {
  det.validate();
  return p.k_r * det.phi_det() * steady_state(p, exc).rho_T_star;
}

double max_detected_rate(const PhotophysicsParams& p, const DetectionChain& det) {
  p.validate();
  det.validate();
  if (p.sigma <= 0.0) throw InputError("absorption cross-section must be positive");
  const double ratio = (p.sigma + p.sigma_prime) / p.sigma;
  return p.k_r * det.phi_det() / (ratio + shelving_ratio(p));
}

double saturation_intensity(const PhotophysicsParams& p, const ExcitationConditions& exc) {
  p.validate();
  if (p.sigma <= 0.0) throw InputError("absorption cross-section must be positive");
  const double ratio = (p.sigma + p.sigma_prime) / p.sigma;
  // Pump rate at which the detected rate is half its asymptote, then back
  // to a power density.  Rates are MHz, hence the 1e6.
  const double g_half = (p.k() + p.alpha * p.k_TS) / (ratio + shelving_ratio(p));
  const double flux = g_half * 1e6 / p.sigma;
  return flux_to_intensity_kW_cm2(flux, exc.wavelength_nm);
}

double emission_probability(const PhotophysicsParams& p, double alpha) {
  p.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  if (p.k() <= 0.0) throw InputError("total decay rate is zero");
  return (1.0 - alpha) * p.k_r / p.k() + alpha * p.k_r / (p.k() + p.k_TS);
}

double odmr_contrast(const PhotophysicsParams& p, double alpha) {
  p.validate();
  if (!(alpha >= 0.0 && alpha <= kEquilibriumAlpha))
    throw InputError("alpha must lie in [0, 2/3]");
  if (p.k_TS <= 0.0) throw InputError("shelving rate must be positive for contrast");
  return (kEquilibriumAlpha - alpha) / (1.0 + p.k() / p.k_TS - alpha);
}

AlphaEstimate alpha_from_contrast(const ODMRData& data) {
  if (!(data.contrast < 1.0)) throw InputError("contrast must be below 1");
  if (data.k_over_kTS < 0.0) throw InputError("rate ratio must be nonnegative");
  const double alpha =
      (kEquilibriumAlpha - data.contrast * (1.0 + data.k_over_kTS)) /
      (1.0 - data.contrast);
  return {alpha, alpha >= 0.0 && alpha <= kEquilibriumAlpha};
}

double shelving_bracket(double alpha, double kTS_over_k) {
  return 1.0 + alpha * kTS_over_k;
}

QuantumYieldResult quantum_yield_from_saturation(
    double I_s_kW_cm2, double R_det_MHz, const DetectionChain& det, double sigma_cm2,
    double wavelength_nm, const std::optional<ShelvingCorrection>& correction) {
  det.validate();
  if (!(I_s_kW_cm2 > 0.0)) throw InputError("saturation intensity must be positive");
  if (!(R_det_MHz > 0.0)) throw InputError("detected rate must be positive");
  if (!(sigma_cm2 > 0.0)) throw InputError("cross-section must be positive");
  if (!(det.phi_det() > 0.0)) throw InputError("detection efficiency must be positive");

  // R_det e_photon / (I_s phi sigma): emitted power per saturated absorber
  // over absorbed power at saturation.
  const double emitted_W = R_det_MHz * 1e6 * photon_energy_J(wavelength_nm);
  const double absorbed_W = I_s_kW_cm2 * 1e3 * det.phi_det() * sigma_cm2;
  double yield = emitted_W / absorbed_W;

  double bracket = 1.0;
  if (correction) bracket = shelving_bracket(correction->alpha, correction->kTS_over_k);
  yield /= bracket;
  return {yield, yield >= 0.0 && yield <= 1.0, bracket};
}

ShortPulseResponse short_pulse_population(double fluence_photons_cm2, double sigma_cm2,
                                          double sigma_prime_cm2) {
  if (fluence_photons_cm2 < 0.0) throw InputError("fluence must be nonnegative");
  if (sigma_cm2 < 0.0 || sigma_prime_cm2 < 0.0)
    throw InputError("cross-sections must be nonnegative");
  const double total = sigma_cm2 + sigma_prime_cm2;
  const double grow = -std::expm1(-fluence_photons_cm2 * total);
  ShortPulseResponse out;
  out.exponential = grow;
  out.rate_equation = total > 0.0 ? sigma_cm2 / total * grow : 0.0;
  return out;
}

}  // namespace nvphys
