#pragma once

#include <array>
#include <vector>

#include "nvphys/ellipsoid.hpp"
#include "nvphys/optics.hpp"

namespace nvphys {

struct SpectralSample {
  double wavenumber_cm1;
  double value;
};

/// Tabulated spectrum on a strictly increasing wavenumber grid.
/// Absorption shapes are peak-normalized to 1; luminescence densities carry
/// an arbitrary scale that cancels in every quantity derived here.
struct Spectrum {
  enum class Kind { kAbsorptionShape, kLuminescenceDensity };

  std::vector<SpectralSample> samples;
  Kind kind = Kind::kLuminescenceDensity;

  /// Throws InputError on fewer than 2 samples, non-increasing or
  /// non-positive wavenumbers, negative values, or an absorption shape
  /// whose peak deviates from 1 by more than 1e-9.
  void validate() const;

  /// Copy rescaled so the peak value is exactly 1.
  Spectrum peak_normalized() const;

  double peak_value() const;
};

/// Ingredients of the absorption-to-emission rate relation.
struct SpectralQuantities {
  double mean_inv_cubed_cm3;    // <wavenumber^-3>, luminescence weighted
  double absorption_integral;   // integral of shape/wavenumber, dimensionless
  double sigma_max_cm2;         // peak absorption cross-section
  double degeneracy_ratio;      // lower over upper level degeneracy
};

/// Trapezoidal quadrature of both spectral integrals on their native grids.
SpectralQuantities spectral_quantities(const Spectrum& absorption,
                                       const Spectrum& luminescence,
                                       double sigma_max_cm2,
                                       double degeneracy_ratio = 1.0);

/// Radiative rate in MHz from absorption-emission reciprocity:
/// k_r = n^2 (8 pi c / <nu^-3>) (g_l/g_u) sigma_max Int(shape/nu dnu).
double radiative_rate_from_spectra(const SpectralQuantities& q, double n);

/// Per-direction residual |emission_factor n_rel^2 / absorption_factor - 1|
/// of the bare internal-field factors.  Substrate multipliers are stripped
/// before the check; they act on emission only and would mask the identity.
std::array<double, 3> thermodynamic_consistency(const Ellipsoid& shape,
                                                const OpticalEnvironment& env);

/// RMS mismatch between the peak-normalized absorption shape and the
/// luminescence shape reflected about the given wavenumber, evaluated where
/// either exceeds 1% of its peak.  Diagnostic only.
double mirror_symmetry_residual(const Spectrum& absorption, const Spectrum& luminescence,
                                double mirror_wavenumber_cm1);

/// Synthetic NV-like band pair: a two-Gaussian luminescence band and its
/// mirror image reflected about 15,700 cm^-1, on a uniform grid.  Labeled
/// synthetic; used for tests and demos, not a measurement.
struct SpectrumPair {
  Spectrum absorption;
  Spectrum luminescence;
};
SpectrumPair synthetic_nv_spectra(double grid_step_cm1 = 10.0);

}  // namespace nvphys
