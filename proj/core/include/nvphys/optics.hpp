#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "nvphys/ellipsoid.hpp"

namespace nvphys {

/// Which substrate emission-enhancement constant to apply when a substrate
/// is present: dipole parallel to the surface, perpendicular, or the
/// orientation average.
enum class SubstrateEmissionMode { kParallel, kPerpendicular, kAverage };

/// Refractive indices of the crystal, the surrounding medium, and an
/// optional supporting substrate, plus the substrate emission-rate
/// multipliers.
struct OpticalEnvironment {
  double n_crystal = 2.42;
  double n_medium = 1.0;
  std::optional<double> n_substrate;

  // Emission-rate multipliers for a dipole near the substrate surface.
  double substrate_enhancement_parallel = 1.4;
  double substrate_enhancement_perpendicular = 2.3;
  double substrate_enhancement_average = 1.7;
  SubstrateEmissionMode emission_mode = SubstrateEmissionMode::kAverage;

  // A substrate barely perturbs the internal field of a compact crystal,
  // so by default it leaves the absorption factors alone.  This flag
  // instead applies the worst case, the flat-flake interface reduction
  // eta^2 of the substrate's plane boundary.
  bool substrate_field_reduction = false;

  double relative_index() const { return n_crystal / n_medium; }

  /// Selected emission multiplier, 1 when there is no substrate.
  double substrate_emission_factor() const;

  /// Throws InputError when indices or enhancement factors are out of range.
  void validate() const;

  static OpticalEnvironment air();
  static OpticalEnvironment water();
  /// Air surroundings on a silica substrate (n = 1.46).
  static OpticalEnvironment on_glass();
};

/// Internal/external field ratio for a field along an ellipsoid axis with
/// depolarization factor delta: eta = 1 / (1 + (n_rel^2 - 1) delta).
double shielding_factor(double delta, double n_rel);

/// Field ratio and energy-flux transmittance of a plane interface at normal
/// incidence: eta = 2/(n_rel + 1), T = 4 n_rel/(n_rel + 1)^2.
struct BulkInterface {
  double eta;
  double transmittance;
};
BulkInterface bulk_interface(double n_rel);

/// Per-axis field factors of a nanocrystal relative to bulk, in the
/// caller's axis order.  absorption_factor = eta^2 n_rel scales the
/// absorption cross-section; emission_factor = eta^2 / n_rel scales the
/// radiative rate.  Averages are arithmetic means over the three axes.
struct FieldCoupling {
  std::array<double, 3> eta;
  std::array<double, 3> absorption_factor;
  double absorption_factor_avg;
  std::array<double, 3> emission_factor;
  double emission_factor_avg;
};

FieldCoupling coupling_factors(const Ellipsoid& shape, const OpticalEnvironment& env);

/// One row of the reference table: a standard shape with its depolarization
/// factors and the absorption/emission factors in air and in water.
struct StandardShapeRow {
  std::string shape_id;
  std::array<double, 3> axes;
  DepolarizationFactors delta;
  FieldCoupling air;
  FieldCoupling water;
};

/// The eight standard shapes, needle through flake, recomputed from the
/// shielding model with n_rel = 2.42 (air) and 2.42/1.33 (water).
std::vector<StandardShapeRow> standard_shape_rows();

std::string standard_shape_csv(const std::vector<StandardShapeRow>& rows);
std::string standard_shape_text(const std::vector<StandardShapeRow>& rows);

/// Mean and population standard deviation of the directional emission and
/// absorption factors over a set of shapes (three values per shape).
struct FactorStats {
  double emission_mean;
  double emission_std;
  double absorption_mean;
  double absorption_std;
};

/// Throws InputError on an empty set.
FactorStats shape_class_stats(const std::vector<Ellipsoid>& shapes,
                              const OpticalEnvironment& env);

/// The compact near-spherical family used for nanocrystal estimates:
/// (1, 1/2, 1/2), (1, 1, 1), (1, 1, 1/2).
std::vector<Ellipsoid> compact_shape_family();

}  // namespace nvphys
