#pragma once

namespace nvphys {

// Unit conventions used throughout the library:
//   rates          MHz
//   cross-sections cm^2
//   intensities    kW/cm^2 (photon flux in photons s^-1 cm^-2 where named)
//   wavenumbers    cm^-1
//   lengths        nm (crystal scale), um (field of view), W (laser power)

inline constexpr double kPlanckTimesC_Jm = 1.98645e-25;    // h*c [J m]
inline constexpr double kSpeedOfLight_cm_s = 2.99792458e10;

inline constexpr double kDiamondIndex = 2.42;
inline constexpr double kWaterIndex = 1.33;
inline constexpr double kSilicaIndex = 1.46;

// Collection efficiency of an NA 0.9 objective, orientation averaged.
inline constexpr double kOpticalEfficiencyBulk = 0.023;
inline constexpr double kOpticalEfficiencyNanoOnGlass = 0.14;

inline constexpr double kDefaultWavelength_nm = 532.0;

// Photon energy at a given wavelength [J].
constexpr double photon_energy_J(double wavelength_nm) {
  return kPlanckTimesC_Jm / (wavelength_nm * 1e-9);
}

// kW/cm^2 -> photons s^-1 cm^-2.
constexpr double photon_flux_per_cm2_s(double intensity_kW_cm2,
                                       double wavelength_nm) {
  return intensity_kW_cm2 * 1e3 / photon_energy_J(wavelength_nm);
}

// photons s^-1 cm^-2 -> kW/cm^2.
constexpr double flux_to_intensity_kW_cm2(double photon_flux, double wavelength_nm) {
  return photon_flux * photon_energy_J(wavelength_nm) / 1e3;
}

}  // namespace nvphys
