#include "nvphys/sizing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "nvphys/errors.hpp"

namespace nvphys {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

double saturation_model(double P, double R, double Ps) { return R * P / (P + Ps); }

}  // namespace

double SuspensionSpec::total_volume_nm3() const {
  // mg/mL * mL / (g/cm^3) = 1e-3 cm^3, and 1 cm^3 = 1e21 nm^3.
  return mass_concentration_mg_ml * drop_volume_ml / density_g_cm3 * 1e18;
}

void SuspensionSpec::validate() const {
  if (!(mass_concentration_mg_ml > 0.0) || !(drop_volume_ml > 0.0) ||
      !(density_g_cm3 > 0.0))
    throw InputError("suspension parameters must be positive");
}

SaturationFit fit_saturation(const std::vector<RatePoint>& points, bool poisson_weights) {
  const std::size_t n = points.size();
  if (n < 3) throw InputError("saturation fit needs at least 3 points");

  double max_rate = 0.0;
  std::vector<double> powers;
  powers.reserve(n);
  for (const RatePoint& p : points) {
    if (!(p.power_W >= 0.0) || !std::isfinite(p.power_W) || !std::isfinite(p.rate_Hz))
      throw InputError("saturation fit: powers must be finite and nonnegative");
    if (p.rate_Hz < 0.0) throw InputError("saturation fit: negative rate");
    powers.push_back(p.power_W);
    max_rate = std::max(max_rate, p.rate_Hz);
  }
  if (max_rate <= 0.0) throw InputError("saturation fit: no positive rates");

  std::sort(powers.begin(), powers.end());
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < n; ++i)
    if (powers[i] > powers[i - 1]) ++distinct;
  if (distinct < 2) throw InputError("saturation fit: all powers identical");

  std::vector<double> w(n, 1.0);
  if (poisson_weights) {
    for (std::size_t i = 0; i < n; ++i) {
      // Count-noise variance is rate/dwell; points without a dwell time
      // keep unit weight.
      if (points[i].dwell_s > 0.0)
        w[i] = points[i].dwell_s / std::max(points[i].rate_Hz, 1.0);
    }
  }

  // Start values: asymptote at twice the peak, half-saturation power from
  // the first crossing of half the peak rate along the power axis.
  double R = 2.0 * max_rate;
  double Ps = 0.0;
  {
    std::vector<const RatePoint*> sorted;
    sorted.reserve(n);
    for (const RatePoint& p : points) sorted.push_back(&p);
    std::sort(sorted.begin(), sorted.end(),
              [](const RatePoint* a, const RatePoint* b) { return a->power_W < b->power_W; });
    const double target = 0.5 * max_rate;
    for (std::size_t i = 1; i < n; ++i) {
      const double r0 = sorted[i - 1]->rate_Hz, r1 = sorted[i]->rate_Hz;
      if ((r0 - target) * (r1 - target) <= 0.0 && r0 != r1) {
        const double t = (target - r0) / (r1 - r0);
        Ps = sorted[i - 1]->power_W + t * (sorted[i]->power_W - sorted[i - 1]->power_W);
        break;
      }
    }
    if (!(Ps > 0.0)) {
      for (const RatePoint* p : sorted)
        if (p->power_W > 0.0) {
          // Rates never cross half peak inside the design; start from the
          // smallest nonzero power.
          Ps = p->power_W;
          break;
        }
    }
    if (!(Ps > 0.0)) throw InputError("saturation fit: no positive powers");
  }

  auto chi2_at = [&](double Rv, double Psv) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = points[i].rate_Hz - saturation_model(points[i].power_W, Rv, Psv);
      c += w[i] * r * r;
    }
    return c;
  };

  double lambda = 1e-3;
  double chi2 = chi2_at(R, Ps);
  int iter = 0;
  bool converged = false;
  double a00 = 0.0, a01 = 0.0, a11 = 0.0;
  for (; iter < 200; ++iter) {
    a00 = a01 = a11 = 0.0;
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double P = points[i].power_W;
      const double denom = P + Ps;
      const double j0 = P / denom;
      const double j1 = -R * P / (denom * denom);
      const double r = points[i].rate_Hz - saturation_model(P, R, Ps);
      a00 += w[i] * j0 * j0;
      a01 += w[i] * j0 * j1;
      a11 += w[i] * j1 * j1;
      g0 += w[i] * j0 * r;
      g1 += w[i] * j1 * r;
    }

    bool stepped = false;
    for (int damp = 0; damp < 40; ++damp) {
      const double m00 = a00 * (1.0 + lambda);
      const double m11 = a11 * (1.0 + lambda);
      const double det = m00 * m11 - a01 * a01;
      if (det == 0.0 || !std::isfinite(det))
        throw NumericError("saturation fit: singular normal equations");
      const double dR = (g0 * m11 - g1 * a01) / det;
      const double dPs = (g1 * m00 - g0 * a01) / det;
      const double R_try = R + dR;
      const double Ps_try = Ps + dPs;
      if (Ps_try > 0.0) {
        const double chi2_try = chi2_at(R_try, Ps_try);
        if (chi2_try <= chi2) {
          const double rel = std::max(std::fabs(dR) / std::max(std::fabs(R_try), 1e-300),
                                      std::fabs(dPs) / std::max(std::fabs(Ps_try), 1e-300));
          R = R_try;
          Ps = Ps_try;
          chi2 = chi2_try;
          lambda = std::max(lambda * 0.1, 1e-12);
          stepped = true;
          if (rel < 1e-10) converged = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    if (converged) break;
    if (!stepped) {
      // No damping level improved chi^2: we are at a (local) optimum to
      // machine precision.
      converged = true;
      break;
    }
  }
  if (!converged) {
    char msg[160];
    std::snprintf(msg, sizeof(msg),
                  "saturation fit did not converge: R=%.6g Hz, P_s=%.6g W, chi2=%.6g",
                  R, Ps, chi2);
    throw NumericError(msg);
  }

  // Normal matrix at the final parameters for the covariance.
  a00 = a01 = a11 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double P = points[i].power_W;
    const double denom = P + Ps;
    const double j0 = P / denom;
    const double j1 = -R * P / (denom * denom);
    a00 += w[i] * j0 * j0;
    a01 += w[i] * j0 * j1;
    a11 += w[i] * j1 * j1;
  }
  const double det = a00 * a11 - a01 * a01;
  if (det <= 0.0 || !std::isfinite(det))
    throw NumericError("saturation fit: singular covariance");
  const double s2 = chi2 / static_cast<double>(n - 2);
  const double c00 = a11 / det * s2;
  const double c11 = a00 / det * s2;
  const double c01 = -a01 / det * s2;

  SaturationFit out;
  out.R_det_Hz = R;
  out.P_s_W = Ps;
  out.R_det_err_Hz = std::sqrt(c00);
  out.P_s_err_W = std::sqrt(c11);
  out.covariance_RP = c01;
  out.rss = chi2;
  out.iterations = iter + 1;
  out.low_confidence = distinct < 3 || powers.front() > Ps || powers.back() < Ps;
  return out;
}

IrradianceProfile IrradianceProfile::gaussian(double waist_um) {
  if (!(waist_um > 0.0)) throw InputError("beam waist must be positive");
  IrradianceProfile p;
  p.waist_um_ = waist_um;
  return p;
}

IrradianceProfile IrradianceProfile::tabulated(
    std::vector<std::pair<double, double>> radius_factor) {
  if (radius_factor.empty()) throw InputError("irradiance table is empty");
  if (radius_factor.front().first != 0.0 ||
      std::fabs(radius_factor.front().second - 1.0) > 1e-12)
    throw InputError("irradiance table must start at (0, 1)");
  for (std::size_t i = 0; i < radius_factor.size(); ++i) {
    if (i > 0 && !(radius_factor[i].first > radius_factor[i - 1].first))
      throw InputError("irradiance table radii must increase");
    const double f = radius_factor[i].second;
    if (!(f > 0.0 && f <= 1.0)) throw InputError("irradiance factors must lie in (0, 1]");
  }
  IrradianceProfile p;
  p.table_ = std::move(radius_factor);
  return p;
}

IrradianceProfile IrradianceProfile::flat() {
  IrradianceProfile p;
  p.table_ = {{0.0, 1.0}};
  return p;
}

double IrradianceProfile::factor_at(double x_um, double y_um) const {
  const double r = std::hypot(x_um, y_um);
  if (waist_um_ > 0.0) {
    const double u = r / waist_um_;
    return std::exp(-2.0 * u * u);
  }
  if (r >= table_.back().first) return table_.back().second;
  auto it = std::lower_bound(table_.begin(), table_.end(), r,
                             [](const std::pair<double, double>& e, double v) {
                               return e.first < v;
                             });
  if (it == table_.begin()) return it->second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (r - lo.first) / (hi.first - lo.first);
  return lo.second + t * (hi.second - lo.second);
}

void fit_all_records(std::vector<CrystalRecord>& records, bool poisson_weights) {
  for (CrystalRecord& rec : records) {
    try {
      rec.fit = fit_saturation(rec.points, poisson_weights);
      rec.fit_failure.reset();
    } catch (const std::exception& e) {
      rec.fit.reset();
      rec.fit_failure = e.what();
    }
  }
}

void apply_irradiance_correction(std::vector<CrystalRecord>& records,
                                 const IrradianceProfile& profile) {
  for (CrystalRecord& rec : records) {
    const double f = profile.factor_at(rec.x_um, rec.y_um);
    if (!(f > 0.0)) throw InputError("irradiance factor must be positive");
    rec.irradiance_factor = f;
    for (RatePoint& p : rec.points) p.power_W *= f;
    if (rec.fit) {
      rec.fit->P_s_W *= f;
      rec.fit->P_s_err_W *= f;
      rec.fit->covariance_RP *= f;
    }
  }
}

double raw_axis_saturation_power(double center_P_s_W, double factor) {
  if (!(factor > 0.0)) throw InputError("irradiance factor must be positive");
  return center_P_s_W / factor;
}

double Histogram::mode_nm() const {
  if (weights.empty() || total() <= 0.0) throw InputError("histogram is empty");
  const std::size_t i = static_cast<std::size_t>(
      std::max_element(weights.begin(), weights.end()) - weights.begin());
  return origin_nm + (static_cast<double>(i) + 0.5) * bin_width_nm;
}

double Histogram::total() const {
  double s = 0.0;
  for (double v : weights) s += v;
  return s;
}

Histogram Histogram::rebinned(double new_origin_nm, double new_width_nm) const {
  if (!(new_width_nm > 0.0)) throw InputError("bin width must be positive");
  Histogram out;
  out.origin_nm = new_origin_nm;
  out.bin_width_nm = new_width_nm;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double lo = origin_nm + static_cast<double>(i) * bin_width_nm;
    const double hi = lo + bin_width_nm;
    // Spread this bin's weight over the target bins it overlaps.
    long j = static_cast<long>(std::floor((lo - new_origin_nm) / new_width_nm));
    for (; j * new_width_nm + new_origin_nm < hi; ++j) {
      if (j < 0) continue;
      const double t_lo = new_origin_nm + static_cast<double>(j) * new_width_nm;
      const double t_hi = t_lo + new_width_nm;
      const double cover = std::min(hi, t_hi) - std::max(lo, t_lo);
      if (cover <= 0.0) continue;
      if (out.weights.size() <= static_cast<std::size_t>(j))
        out.weights.resize(static_cast<std::size_t>(j) + 1, 0.0);
      out.weights[static_cast<std::size_t>(j)] += weights[i] * cover / bin_width_nm;
    }
  }
  return out;
}

namespace {

Histogram build_histogram(const std::vector<std::pair<double, double>>& dw,
                          double bin_width_nm, double origin_nm) {
  if (!(bin_width_nm > 0.0)) throw InputError("bin width must be positive");
  Histogram h;
  h.origin_nm = origin_nm;
  h.bin_width_nm = bin_width_nm;
  for (const auto& [d, weight] : dw) {
    if (d < origin_nm) throw InputError("diameter below histogram origin");
    const std::size_t i =
        static_cast<std::size_t>(std::floor((d - origin_nm) / bin_width_nm));
    if (h.weights.size() <= i) h.weights.resize(i + 1, 0.0);
    h.weights[i] += weight;
  }
  return h;
}

}  // namespace

Histogram make_histogram(const std::vector<double>& diameters_nm, double bin_width_nm,
                         double origin_nm) {
  std::vector<std::pair<double, double>> dw;
  dw.reserve(diameters_nm.size());
  for (double d : diameters_nm) dw.emplace_back(d, 1.0);
  return build_histogram(dw, bin_width_nm, origin_nm);
}

Histogram make_weighted_histogram(const std::vector<std::pair<double, double>>& diameter_weight,
                                  double bin_width_nm, double origin_nm) {
  return build_histogram(diameter_weight, bin_width_nm, origin_nm);
}

SizeDistributionResult size_distribution(std::vector<CrystalRecord>& records,
                                         const SuspensionSpec& spec,
                                         const DetectionChain& det, double bin_width_nm) {
  spec.validate();
  det.validate();
  if (!(det.phi_det() > 0.0)) throw InputError("detection efficiency must be positive");
  if (records.empty()) throw InputError("no crystal records");

  KahanSum rate_sum;
  std::size_t fitted = 0;
  for (const CrystalRecord& rec : records) {
    if (!rec.fit) continue;
    ++fitted;
    rate_sum.add(rec.fit->R_det_Hz);
  }
  if (fitted == 0) throw InputError("no fitted records");
  if (!(rate_sum.sum > 0.0)) throw InputError("fitted rates sum to zero");

  const double v_tot = spec.total_volume_nm3();
  const double beta = rate_sum.sum / v_tot;

  SizeDistributionResult out;
  out.beta_Hz_nm3 = beta;
  out.beta_absolute_photons_s_nm3 = beta / det.phi_det();
  out.fitted_count = fitted;
  out.failed_count = records.size() - fitted;
  out.diameters_nm.reserve(fitted);
  for (CrystalRecord& rec : records) {
    if (!rec.fit) continue;
    rec.volume_nm3 = rec.fit->R_det_Hz / beta;
    rec.diameter_nm = std::cbrt(6.0 * rec.volume_nm3 / kPi);
    out.diameters_nm.push_back(rec.diameter_nm);
  }
  out.histogram = make_histogram(out.diameters_nm, bin_width_nm);
  return out;
}

double brightness_per_center_MHz(double beta_absolute_photons_s_nm3, double diameter_nm,
                                 double nv_count) {
  if (!(beta_absolute_photons_s_nm3 > 0.0) || !(diameter_nm > 0.0))
    throw InputError("brightness inputs must be positive");
  if (!(nv_count > 0.0)) throw InputError("center count must be positive");
  const double volume = kPi * diameter_nm * diameter_nm * diameter_nm / 6.0;
  return beta_absolute_photons_s_nm3 * volume / nv_count / 1e6;
}

DistributionComparison compare_distributions(const Histogram& a, const Histogram& b) {
  const double ta = a.total();
  const double tb = b.total();
  if (!(ta > 0.0) || !(tb > 0.0)) throw InputError("histogram is empty");

  const Histogram b_on_a = b.rebinned(a.origin_nm, a.bin_width_nm);
  const double tb2 = b_on_a.total();
  double overlap = 0.0;
  const std::size_t m = std::max(a.weights.size(), b_on_a.weights.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double pa = i < a.weights.size() ? a.weights[i] / ta : 0.0;
    const double pb = i < b_on_a.weights.size() ? b_on_a.weights[i] / tb2 : 0.0;
    overlap += std::min(pa, pb);
  }

  DistributionComparison out;
  out.mode_a_nm = a.mode_nm();
  out.mode_b_nm = b.mode_nm();
  out.mode_shift_nm = out.mode_a_nm - out.mode_b_nm;
  out.overlap = overlap;
  return out;
}

}  // namespace nvphys
