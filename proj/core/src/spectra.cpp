#include "nvphys/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "nvphys/errors.hpp"

namespace nvphys {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight_cm_s_local = 2.99792458e10;

double trapezoid(const std::vector<SpectralSample>& s, double (*f)(double, double)) {
  double acc = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double h = s[i].wavenumber_cm1 - s[i - 1].wavenumber_cm1;
    acc += 0.5 * h *
           (f(s[i - 1].wavenumber_cm1, s[i - 1].value) +
            f(s[i].wavenumber_cm1, s[i].value));
  }
  return acc;
}

// Linear interpolation with zero extension outside the grid.
double interp(const std::vector<SpectralSample>& s, double x) {
  if (x <= s.front().wavenumber_cm1 || x >= s.back().wavenumber_cm1) return 0.0;
  auto it = std::lower_bound(s.begin(), s.end(), x,
                             [](const SpectralSample& a, double v) {
                               return a.wavenumber_cm1 < v;
                             });
  const SpectralSample& hi = *it;
  const SpectralSample& lo = *(it - 1);
  const double t = (x - lo.wavenumber_cm1) / (hi.wavenumber_cm1 - lo.wavenumber_cm1);
  return lo.value + t * (hi.value - lo.value);
}

double gauss(double x, double center, double fwhm) {
  constexpr double kLn2 = 0.69314718055994530942;
  const double u = (x - center) / fwhm;
  return std::exp(-4.0 * kLn2 * u * u);
}

}  // namespace

void Spectrum::validate() const {
  if (samples.size() < 2) throw InputError("spectrum needs at least 2 samples");
  double prev = 0.0;
  for (const SpectralSample& s : samples) {
    if (!(s.wavenumber_cm1 > prev))
      throw InputError("spectrum wavenumbers must be positive and strictly increasing");
    if (!(s.value >= 0.0)) throw InputError("spectrum values must be nonnegative");
    prev = s.wavenumber_cm1;
  }
  if (kind == Kind::kAbsorptionShape && std::fabs(peak_value() - 1.0) > 1e-9)
    throw InputError("absorption shape must be peak-normalized to 1");
}

double Spectrum::peak_value() const {
  double peak = 0.0;
  for (const SpectralSample& s : samples) peak = std::max(peak, s.value);
  return peak;
}

Spectrum Spectrum::peak_normalized() const {
  const double peak = peak_value();
  if (!(peak > 0.0)) throw InputError("cannot normalize an all-zero spectrum");
  Spectrum out = *this;
  for (SpectralSample& s : out.samples) s.value /= peak;
  return out;
}

SpectralQuantities spectral_quantities(const Spectrum& absorption,
                                       const Spectrum& luminescence,
                                       double sigma_max_cm2, double degeneracy_ratio) {
  if (absorption.kind != Spectrum::Kind::kAbsorptionShape)
    throw InputError("first spectrum must be an absorption shape");
  if (luminescence.kind != Spectrum::Kind::kLuminescenceDensity)
    throw InputError("second spectrum must be a luminescence density");
  absorption.validate();
  luminescence.validate();
  if (!(sigma_max_cm2 > 0.0)) throw InputError("sigma_max must be positive");
  if (!(degeneracy_ratio > 0.0)) throw InputError("degeneracy ratio must be positive");

  const double lum_norm =
      trapezoid(luminescence.samples, [](double, double v) { return v; });
  if (!(lum_norm > 0.0)) throw InputError("luminescence spectrum integrates to zero");
  const double lum_inv3 = trapezoid(luminescence.samples, [](double nu, double v) {
    return v / (nu * nu * nu);
  });
  const double abs_int = trapezoid(absorption.samples, [](double nu, double v) {
    return v / nu;
  });
  return {lum_inv3 / lum_norm, abs_int, sigma_max_cm2, degeneracy_ratio};
}

double radiative_rate_from_spectra(const SpectralQuantities& q, double n) {
  if (!(n >= 1.0)) throw InputError("refractive index must be at least 1");
  if (!(q.mean_inv_cubed_cm3 > 0.0)) throw InputError("invalid spectral moment");
  // All lengths in cm: <nu^-3> in cm^3, sigma in cm^2, c in cm/s -> s^-1.
  const double rate_s =
      n * n * (8.0 * kPi * kSpeedOfLight_cm_s_local / q.mean_inv_cubed_cm3) *
      q.degeneracy_ratio * q.sigma_max_cm2 * q.absorption_integral;
  return rate_s / 1e6;
}

std::array<double, 3> thermodynamic_consistency(const Ellipsoid& shape,
                                                const OpticalEnvironment& env) {
  OpticalEnvironment bare = env;
  bare.n_substrate.reset();
  bare.substrate_field_reduction = false;
  const FieldCoupling fc = coupling_factors(shape, bare);
  const double n2 = bare.relative_index() * bare.relative_index();
  std::array<double, 3> residual{};
  for (int i = 0; i < 3; ++i)
    residual[i] =
        std::fabs(fc.emission_factor[i] * n2 / fc.absorption_factor[i] - 1.0);
  return residual;
}

double mirror_symmetry_residual(const Spectrum& absorption, const Spectrum& luminescence,
                                double mirror_wavenumber_cm1) {
  absorption.validate();
  luminescence.validate();
  const Spectrum abs_n = absorption.peak_normalized();
  const Spectrum lum_n = luminescence.peak_normalized();

  double sum2 = 0.0;
  std::size_t count = 0;
  for (const SpectralSample& s : abs_n.samples) {
    const double reflected = 2.0 * mirror_wavenumber_cm1 - s.wavenumber_cm1;
    if (reflected <= 0.0) continue;
    const double lum_val = interp(lum_n.samples, reflected);
    if (s.value < 0.01 && lum_val < 0.01) continue;
    const double d = s.value - lum_val;
    sum2 += d * d;
    ++count;
  }
  if (count == 0) throw InputError("spectra do not overlap through the mirror point");
  return std::sqrt(sum2 / static_cast<double>(count));
}

SpectrumPair synthetic_nv_spectra(double grid_step_cm1) {
  if (!(grid_step_cm1 > 0.0)) throw InputError("grid step must be positive");
  // Two-Gaussian luminescence band (narrow near-ZPL peak plus broad phonon
  // sideband) mirrored about 15,700 cm^-1 for the absorption shape.
  constexpr double kMirror = 15700.0;
  constexpr double kNarrowCenter = 15000.0, kNarrowFwhm = 800.0, kNarrowAmp = 0.30;
  constexpr double kBroadCenter = 13500.0, kBroadFwhm = 1850.0, kBroadAmp = 1.00;

  SpectrumPair out;
  out.absorption.kind = Spectrum::Kind::kAbsorptionShape;
  out.luminescence.kind = Spectrum::Kind::kLuminescenceDensity;
  for (double nu = 11000.0; nu <= 23000.0 + 0.5 * grid_step_cm1; nu += grid_step_cm1) {
    const double lum = kNarrowAmp * gauss(nu, kNarrowCenter, kNarrowFwhm) +
                       kBroadAmp * gauss(nu, kBroadCenter, kBroadFwhm);
    const double mirrored = 2.0 * kMirror - nu;
    const double abs = kNarrowAmp * gauss(mirrored, kNarrowCenter, kNarrowFwhm) +
                       kBroadAmp * gauss(mirrored, kBroadCenter, kBroadFwhm);
    out.luminescence.samples.push_back({nu, lum});
    out.absorption.samples.push_back({nu, abs});
  }
  out.absorption = out.absorption.peak_normalized();
  return out;
}

}  // namespace nvphys
