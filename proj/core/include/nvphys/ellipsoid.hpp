#pragma once

#include <array>
#include <cstddef>

namespace nvphys {

/// Triaxial ellipsoid given by the relative lengths of its three axes.
/// Only axis ratios matter; depolarization factors are scale invariant.
///
/// Inputs are canonicalized internally so that a >= b >= c, but every result
/// derived from an Ellipsoid is reported in the caller's original axis order.
/// The smallest axis may be zero (flake), or the two smallest (needle).
class Ellipsoid {
 public:
  /// Throws InputError for non-finite or negative axes, or if all are zero.
  Ellipsoid(double a, double b, double c);

  /// Axes in the order the caller supplied them.
  const std::array<double, 3>& axes() const { return original_; }

  /// Axes sorted so that a >= b >= c.
  const std::array<double, 3>& canonical_axes() const { return canonical_; }

  /// Position in the caller's order of canonical axis k.
  std::size_t original_index(std::size_t canonical_k) const {
    return to_original_[canonical_k];
  }

 private:
  std::array<double, 3> original_;
  std::array<double, 3> canonical_;
  std::array<std::size_t, 3> to_original_;
};

/// Depolarization factor per axis, in the caller's axis order.
/// Always sums to 1; each value lies in [0, 1]; a longer axis has the
/// smaller factor.
struct DepolarizationFactors {
  std::array<double, 3> delta;

  double sum() const { return delta[0] + delta[1] + delta[2]; }
};

/// Depolarization factors of an ellipsoid for a field along each axis.
///
/// General shapes evaluate the elliptic integral
///   delta_a = (abc/2) Int_0^inf ds / [(s+a^2)^{3/2} (s+b^2)^{1/2} (s+c^2)^{1/2}]
/// via Carlson's symmetric integral R_D. Spheres, spheroids, needles and
/// flakes dispatch to closed forms.
DepolarizationFactors depolarization_factors(const Ellipsoid& shape);

namespace detail {

/// Carlson symmetric elliptic integral of the second kind,
/// R_D(x,y,z) = (3/2) Int_0^inf dt [(t+x)(t+y)]^{-1/2} (t+z)^{-3/2}.
/// Requires x,y >= 0, z > 0, at most one of x,y zero.
double carlson_rd(double x, double y, double z);

/// General-route depolarization factors for canonical semi-axes a >= b >= c
/// (c > 0), bypassing the closed-form dispatch. Used to cross-check the
/// closed forms.
std::array<double, 3> depolarization_general(double a, double b, double c);

}  // namespace detail

}  // namespace nvphys
