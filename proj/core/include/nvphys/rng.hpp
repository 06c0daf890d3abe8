#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace nvphys {

/// Small splittable PRNG with hand-rolled samplers.  The standard library
/// distributions are implementation-defined, so ensembles generated through
/// them would differ across toolchains; everything here is fixed arithmetic
/// and produces byte-identical streams on any conforming platform.
///
/// Substreams: stream k of seed s starts from mix(s + (k+1)*golden), so
/// per-crystal generators are independent of each other and of ordering.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  SplitMix64(std::uint64_t seed, std::uint64_t stream)
      : state_(seed + 0x9E3779B97F4A7C15ull * (stream + 1)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; caches the second deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * kPi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double lognormal(double log_median, double sigma_log) {
    return std::exp(normal(log_median, sigma_log));
  }

  /// Poisson deviate: product inversion below mean 10, transformed
  /// rejection with squeeze (Hormann's PTRS) above.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      long k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::fabs(u);
      const long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + mean + 0.43));
      if (us >= 0.07 && v <= v_r) return k;
      if (k < 0 || (us < 0.013 && v > us)) continue;
      if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
          -mean + static_cast<double>(k) * loglam - std::lgamma(static_cast<double>(k) + 1.0))
        return k;
    }
  }

  /// Unit vector uniform on the sphere.
  std::array<double, 3> unit_vector() {
    // Marsaglia polar method on the disk.
    for (;;) {
      const double x = uniform(-1.0, 1.0);
      const double y = uniform(-1.0, 1.0);
      const double s = x * x + y * y;
      if (s > 0.0 && s < 1.0) {
        const double f = 2.0 * std::sqrt(1.0 - s);
        return {x * f, y * f, 1.0 - 2.0 * s};
      }
    }
  }

  /// Uniform random rotation as a unit quaternion (w, x, y, z).
  std::array<double, 4> rotation_quaternion() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double u3 = uniform();
    const double s1 = std::sqrt(1.0 - u1);
    const double s2 = std::sqrt(u1);
    return {s1 * std::sin(2.0 * kPi * u2), s1 * std::cos(2.0 * kPi * u2),
            s2 * std::sin(2.0 * kPi * u3), s2 * std::cos(2.0 * kPi * u3)};
  }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Rotate vector v by unit quaternion q = (w, x, y, z).
inline std::array<double, 3> rotate(const std::array<double, 4>& q,
                                    const std::array<double, 3>& v) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  // v' = v + w t + q_vec x t with t = 2 q_vec x v
  const std::array<double, 3> t{2.0 * (y * v[2] - z * v[1]),
                                2.0 * (z * v[0] - x * v[2]),
                                2.0 * (x * v[1] - y * v[0])};
  return {v[0] + w * t[0] + y * t[2] - z * t[1],
          v[1] + w * t[1] + z * t[0] - x * t[2],
          v[2] + w * t[2] + x * t[1] - y * t[0]};
}

/// Rotate by the inverse (conjugate) of q.
inline std::array<double, 3> rotate_inverse(const std::array<double, 4>& q,
                                            const std::array<double, 3>& v) {
  return rotate({q[0], -q[1], -q[2], -q[3]}, v);
}

}  // namespace nvphys
