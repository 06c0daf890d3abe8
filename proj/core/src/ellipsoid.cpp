#include "nvphys/ellipsoid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nvphys/errors.hpp"

namespace nvphys {

Ellipsoid::Ellipsoid(double a, double b, double c) : original_{a, b, c} {
  for (double v : original_) {
    if (!std::isfinite(v)) throw InputError("ellipsoid axis is not finite");
    if (v < 0.0) throw InputError("ellipsoid axis is negative");
  }
  to_original_ = {0, 1, 2};
  // Stable sort keeps the caller's order among equal axes.
  std::stable_sort(to_original_.begin(), to_original_.end(),
                   [&](std::size_t i, std::size_t j) {
                     return original_[i] > original_[j];
                   });
  for (std::size_t k = 0; k < 3; ++k) canonical_[k] = original_[to_original_[k]];
  if (canonical_[0] <= 0.0) throw InputError("ellipsoid has no positive axis");
}

namespace detail {

double carlson_rd(double x, double y, double z) {
  if (x < 0.0 || y < 0.0) throw InputError("carlson_rd: negative argument");
  if (z <= 0.0) throw InputError("carlson_rd: third argument must be positive");
  if (x + y == 0.0) throw InputError("carlson_rd: at most one of x, y may be zero");

  // Duplication: R_D(x,y,z) = 3/(z'(z'+lam))... accumulate the inner terms,
  // quarter the arguments until they agree, finish with a 5th order expansion
  // about the mean.  Tolerance^6 ~ eps keeps the tail below roundoff.
  const double tol = std::pow(std::numeric_limits<double>::epsilon() / 3.0, 1.0 / 6.0);
  double sum = 0.0;
  double fac = 1.0;
  double ave = 0.0;
  double dx = 0.0, dy = 0.0, dz = 0.0;
  bool converged = false;
  for (int iter = 0; iter < 200; ++iter) {
    const double sx = std::sqrt(x);
    const double sy = std::sqrt(y);
    const double sz = std::sqrt(z);
    const double lam = sx * (sy + sz) + sy * sz;
    sum += fac / (sz * (z + lam));
    fac *= 0.25;
    x = 0.25 * (x + lam);
    y = 0.25 * (y + lam);
    z = 0.25 * (z + lam);
    ave = 0.2 * (x + y + 3.0 * z);
    dx = (ave - x) / ave;
    dy = (ave - y) / ave;
    dz = (ave - z) / ave;
    if (std::max({std::fabs(dx), std::fabs(dy), std::fabs(dz)}) < tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw NumericError("carlson_rd: duplication did not converge");

  constexpr double c1 = 3.0 / 14.0;
  constexpr double c2 = 1.0 / 6.0;
  constexpr double c3 = 9.0 / 22.0;
  constexpr double c4 = 3.0 / 26.0;
  constexpr double c5 = 0.25 * c3;
  constexpr double c6 = 1.5 * c4;
  const double ea = dx * dy;
  const double eb = dz * dz;
  const double ec = ea - eb;
  const double ed = ea - 6.0 * eb;
  const double ee = ed + ec + ec;
  return 3.0 * sum +
         fac *
             (1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) +
              dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))) /
             (ave * std::sqrt(ave));
}

std::array<double, 3> depolarization_general(double a, double b, double c) {
  if (!(a >= b && b >= c && c > 0.0))
    throw InputError("depolarization_general: need a >= b >= c > 0");
  // Scale invariant; normalize by the long axis to keep R_D well conditioned.
  const double p = b / a;
  const double q = c / a;
  const double p2 = p * p;
  const double q2 = q * q;
  const double pref = p * q / 3.0;
  return {pref * carlson_rd(p2, q2, 1.0),
          pref * carlson_rd(q2, 1.0, p2),
          pref * carlson_rd(1.0, p2, q2)};
}

namespace {

// delta along the symmetry axis of a prolate spheroid with axes a > b = c,
// eccentricity e^2 = 1 - (c/a)^2.
double prolate_delta_long(double e2) {
  const double e = std::sqrt(e2);
  return (1.0 - e2) / e2 * (std::atanh(e) / e - 1.0);
}

// delta along the short axis of an oblate spheroid with axes a = b > c.
double oblate_delta_short(double e2) {
  const double e = std::sqrt(e2);
  return (1.0 - std::sqrt(1.0 - e2) * std::asin(e) / e) / e2;
}

}  // namespace

}  // namespace detail

DepolarizationFactors depolarization_factors(const Ellipsoid& shape) {
  const auto& ax = shape.canonical_axes();
  const double a = ax[0];
  const double b = ax[1];
  const double c = ax[2];

  std::array<double, 3> d{};  // canonical order, long axis first
  if (b == 0.0) {
    // Needle limit: no depolarization along the axis, 1/2 across.
    d = {0.0, 0.5, 0.5};
  } else if (c == 0.0) {
    // Flake limit: the normal direction carries the full factor.
    d = {0.0, 0.0, 1.0};
  } else if (a == c) {
    d = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  } else if (b == c) {
    const double e2 = 1.0 - (c * c) / (a * a);
    const double da = detail::prolate_delta_long(e2);
    d = {da, 0.5 * (1.0 - da), 0.5 * (1.0 - da)};
  } else if (a == b) {
    const double e2 = 1.0 - (c * c) / (a * a);
    const double dc = detail::oblate_delta_short(e2);
    d = {0.5 * (1.0 - dc), 0.5 * (1.0 - dc), dc};
  } else {
    d = detail::depolarization_general(a, b, c);
  }

  DepolarizationFactors out{};
  for (std::size_t k = 0; k < 3; ++k) out.delta[shape.original_index(k)] = d[k];
  return out;
}

}  // namespace nvphys
