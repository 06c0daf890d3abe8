#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nvphys/errors.hpp"
#include "nvphys/rng.hpp"
#include "nvphys/sizing.hpp"
#include "support/oracles.hpp"

using namespace nvphys;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<RatePoint> hyperbola_points(double R, double Ps,
                                        const std::vector<double>& powers,
                                        double dwell = 0.0) {
  std::vector<RatePoint> pts;
  for (double P : powers) pts.push_back({P, R * P / (P + Ps), dwell});
  return pts;
}

std::vector<double> geometric_powers(double lo, double hi, int n) {
  std::vector<double> p(n);
  const double step = std::pow(hi / lo, 1.0 / (n - 1));
  double v = lo;
  for (int i = 0; i < n; ++i, v *= step) p[i] = v;
  return p;
}

}  // namespace

TEST_CASE("suspension volume bookkeeping") {
  SuspensionSpec spec{5e-4, 8.4e-5, 3.5};
  CHECK(spec.total_volume_nm3() == doctest::Approx(1.2e10).epsilon(1e-12));
  CHECK_NOTHROW(spec.validate());

  spec.mass_concentration_mg_ml = 0.0;
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = SuspensionSpec{5e-4, -1.0, 3.5};
  CHECK_THROWS_AS(spec.validate(), InputError);
  spec = SuspensionSpec{5e-4, 8.4e-5, 0.0};
  CHECK_THROWS_AS(spec.validate(), InputError);
}

TEST_CASE("saturation fit recovers exact hyperbola data") {
  const double R = 54321.0;
  const double Ps = 0.0125;
  const auto powers = geometric_powers(Ps / 30.0, Ps * 30.0, 11);
  const SaturationFit fit = fit_saturation(hyperbola_points(R, Ps, powers));
  CHECK(fit.R_det_Hz == doctest::Approx(R).epsilon(1e-8));
  CHECK(fit.P_s_W == doctest::Approx(Ps).epsilon(1e-8));
  CHECK(fit.rss < 1e-10 * R * R);
  CHECK_FALSE(fit.low_confidence);
  CHECK(fit.iterations > 0);
}

TEST_CASE("saturation fit with poisson weights") {
  const double R = 2e5;
  const double Ps = 0.004;
  const auto powers = geometric_powers(Ps / 20.0, Ps * 20.0, 12);
  const SaturationFit fit =
      fit_saturation(hyperbola_points(R, Ps, powers, 0.5), true);
  CHECK(fit.R_det_Hz == doctest::Approx(R).epsilon(1e-7));
  CHECK(fit.P_s_W == doctest::Approx(Ps).epsilon(1e-7));
}

TEST_CASE("saturation fit input validation") {
  CHECK_THROWS_AS(fit_saturation({}), InputError);
  CHECK_THROWS_AS(fit_saturation({{1.0, 10.0}, {2.0, 20.0}}), InputError);  // < 3 points
  CHECK_THROWS_AS(fit_saturation({{1.0, 10.0}, {1.0, 10.0}, {1.0, 10.0}}),
                  InputError);  // one distinct power
  CHECK_THROWS_AS(fit_saturation({{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}}),
                  InputError);  // nothing detected
  CHECK_THROWS_AS(fit_saturation({{1.0, -5.0}, {2.0, 20.0}, {3.0, 30.0}}),
                  InputError);  // negative rate
  CHECK_THROWS_AS(fit_saturation({{1.0, std::nan("")}, {2.0, 20.0}, {3.0, 30.0}}),
                  InputError);
}

TEST_CASE("unbracketed saturation power lowers confidence") {
  const double R = 1e5;
  const double Ps = 1.0;
  // All powers far below Ps: the curve looks linear, Ps is an extrapolation.
  const auto powers = geometric_powers(1e-4, 1e-2, 8);
  const SaturationFit fit = fit_saturation(hyperbola_points(R, Ps, powers));
  CHECK(fit.low_confidence);

  // Only two distinct powers among three points: fit runs, flagged.
  const SaturationFit thin = fit_saturation(
      {{0.5, R * 0.5 / (0.5 + Ps)}, {0.5, R * 0.5 / (0.5 + Ps)},
       {4.0, R * 4.0 / (4.0 + Ps)}});
  CHECK(thin.low_confidence);
}

TEST_CASE("fit errors are calibrated against the true noise level") {
  // 1000 synthetic saturation measurements with Poisson counting noise.
  // Estimates must land within 3 expected standard errors of the truth in
  // at least 99% of the trials, parameter by parameter; the expected errors
  // come from the information matrix at the true parameters, not the fit.
  const double R = 5e4;
  const double Ps = 0.008;
  const double dwell = 0.05;
  const auto powers = geometric_powers(Ps / 20.0, Ps * 20.0, 12);
  const std::array<double, 2> se = oracle::saturation_fit_se(R, Ps, powers, dwell);

  int ok_R = 0, ok_Ps = 0, trials = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    SplitMix64 rng(0xFEEDu, trial);
    std::vector<RatePoint> pts;
    for (double P : powers) {
      const double expected = R * P / (P + Ps);
      pts.push_back({P, static_cast<double>(rng.poisson(expected * dwell)) / dwell,
                     dwell});
    }
    const SaturationFit fit = fit_saturation(pts, true);
    ++trials;
    if (std::fabs(fit.R_det_Hz - R) <= 3.0 * se[0]) ++ok_R;
    if (std::fabs(fit.P_s_W - Ps) <= 3.0 * se[1]) ++ok_Ps;
  }
  CHECK(trials == 1000);
  CHECK(ok_R >= 990);
  CHECK(ok_Ps >= 990);
}

TEST_CASE("irradiance profiles") {
  const IrradianceProfile g = IrradianceProfile::gaussian(100.0);
  CHECK(g.factor_at(0.0, 0.0) == 1.0);
  CHECK(g.factor_at(100.0, 0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(g.factor_at(60.0, 80.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));

  const IrradianceProfile t = IrradianceProfile::tabulated(
      {{0.0, 1.0}, {50.0, 0.8}, {100.0, 0.4}});
  CHECK(t.factor_at(0.0, 0.0) == 1.0);
  CHECK(t.factor_at(25.0, 0.0) == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(t.factor_at(0.0, 75.0) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(t.factor_at(500.0, 0.0) == 0.4);  // holds the last value

  CHECK(IrradianceProfile::flat().factor_at(1e6, -1e6) == 1.0);

  CHECK_THROWS_AS(IrradianceProfile::gaussian(0.0), InputError);
  CHECK_THROWS_AS(IrradianceProfile::tabulated({}), InputError);
  CHECK_THROWS_AS(IrradianceProfile::tabulated({{1.0, 1.0}, {2.0, 0.5}}),
                  InputError);  // must start at radius 0, factor 1
  CHECK_THROWS_AS(IrradianceProfile::tabulated({{0.0, 1.0}, {2.0, 0.0}}),
                  InputError);  // zero factor
  CHECK_THROWS_AS(IrradianceProfile::tabulated({{0.0, 1.0}, {2.0, 1.2}}),
                  InputError);  // above center
  CHECK_THROWS_AS(IrradianceProfile::tabulated({{0.0, 1.0}, {5.0, 0.9}, {2.0, 0.8}}),
                  InputError);  // radii not increasing
}

TEST_CASE("beam correction collapses position-induced spread") {
  // Same crystal everywhere in a Gaussian beam: raw fits disagree on P_s
  // purely through the local irradiance; correction removes the spread.
  const double R = 8e4;
  const double Ps = 0.01;
  const IrradianceProfile beam = IrradianceProfile::gaussian(300.0);
  const auto powers = geometric_powers(Ps / 20.0, Ps * 20.0, 12);

  std::vector<CrystalRecord> records;
  for (double x : {0.0, 120.0, 210.0, 300.0}) {
    CrystalRecord rec;
    rec.id = "r" + std::to_string(records.size());
    rec.x_um = x;
    const double f = beam.factor_at(x, 0.0);
    for (double P : powers)
      rec.points.push_back({P, R * f * P / (f * P + Ps), 0.0});
    records.push_back(std::move(rec));
  }
  fit_all_records(records);

  std::vector<double> raw;
  for (const CrystalRecord& rec : records) {
    REQUIRE(rec.fit.has_value());
    raw.push_back(rec.fit->P_s_W);
  }
  CHECK(oracle::stddev_population(raw) / oracle::mean(raw) > 0.2);

  apply_irradiance_correction(records, beam);
  std::vector<double> corrected;
  for (const CrystalRecord& rec : records) {
    corrected.push_back(rec.fit->P_s_W);
    CHECK(rec.irradiance_factor == beam.factor_at(rec.x_um, rec.y_um));
    // The asymptote is irradiance-independent and must not move.
    CHECK(rec.fit->R_det_Hz == doctest::Approx(R).epsilon(1e-6));
  }
  for (double v : corrected) CHECK(v == doctest::Approx(Ps).epsilon(1e-6));

  // Raw-axis helper undoes the normalization.
  CHECK(raw_axis_saturation_power(Ps, 0.5) == doctest::Approx(2.0 * Ps));
}

TEST_CASE("beam correction rejects vanishing factors") {
  std::vector<CrystalRecord> records(1);
  records[0].id = "far";
  records[0].x_um = 1e6;  // so deep in the Gaussian tail the factor underflows
  records[0].points = {{1.0, 10.0}, {2.0, 20.0}, {4.0, 30.0}};
  CHECK_THROWS_AS(
      apply_irradiance_correction(records, IrradianceProfile::gaussian(10.0)),
      InputError);
}

TEST_CASE("histograms") {
  const Histogram h = make_histogram({5.0, 25.0, 30.0, 45.0, 47.0}, 20.0);
  REQUIRE(h.weights.size() == 3);
  CHECK(h.weights[0] == 1.0);
  CHECK(h.weights[1] == 2.0);
  CHECK(h.weights[2] == 2.0);
  CHECK(h.total() == 5.0);
  CHECK(h.mode_nm() == 30.0);  // first heaviest bin wins ties

  CHECK(make_histogram({}, 20.0).weights.empty());
  CHECK_THROWS_AS(make_histogram({}, 20.0).mode_nm(), InputError);
  CHECK_THROWS_AS(make_histogram({-1.0}, 20.0), InputError);
  CHECK_THROWS_AS(make_histogram({5.0}, 0.0), InputError);
  CHECK_THROWS_AS(Histogram{}.mode_nm(), InputError);

  const Histogram w = make_weighted_histogram({{10.0, 0.5}, {15.0, 0.25}, {30.0, 2.0}},
                                              20.0);
  CHECK(w.weights[0] == 0.75);
  CHECK(w.weights[1] == 2.0);
  CHECK(w.mode_nm() == 30.0);
}

TEST_CASE("rebinning conserves mass") {
  const Histogram h = make_histogram({5.0, 25.0, 30.0, 45.0, 47.0, 61.0}, 20.0);
  const Histogram fine = h.rebinned(0.0, 8.0);
  CHECK(fine.total() == doctest::Approx(h.total()).epsilon(1e-12));
  const Histogram shifted = h.rebinned(-10.0, 20.0);
  CHECK(shifted.total() == doctest::Approx(h.total()).epsilon(1e-12));
  // A bin straddling two target bins splits proportionally.
  const Histogram half = make_histogram({10.0}, 20.0).rebinned(-10.0, 20.0);
  CHECK(half.weights[0] == doctest::Approx(0.5));
  CHECK(half.weights[1] == doctest::Approx(0.5));
}

TEST_CASE("size distribution from fitted brightness") {
  // Two crystals with brightness 2:1 share the drop volume 2:1.
  const double V_tot = 3e9;
  SuspensionSpec spec;
  spec.drop_volume_ml = 1.0;
  spec.density_g_cm3 = 3.5;
  spec.mass_concentration_mg_ml = V_tot * 3.5 * 1e-18;
  REQUIRE(spec.total_volume_nm3() == doctest::Approx(V_tot).epsilon(1e-12));

  const double Ps = 0.01;
  const auto powers = geometric_powers(Ps / 20.0, Ps * 20.0, 10);
  std::vector<CrystalRecord> records;
  for (double R : {2000.0, 1000.0}) {
    CrystalRecord rec;
    rec.id = "c" + std::to_string(records.size());
    rec.points = hyperbola_points(R, Ps, powers);
    records.push_back(std::move(rec));
  }
  // A third record that cannot be fitted joins the failure count only.
  CrystalRecord dud;
  dud.id = "dud";
  dud.points = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
  records.push_back(dud);

  fit_all_records(records);
  const DetectionChain det{1.0, 0.1};
  const SizeDistributionResult result = size_distribution(records, spec, det, 20.0);

  CHECK(result.fitted_count == 2);
  CHECK(result.failed_count == 1);
  CHECK(result.beta_Hz_nm3 == doctest::Approx(3000.0 / V_tot).epsilon(1e-8));
  CHECK(result.beta_absolute_photons_s_nm3 ==
        doctest::Approx(result.beta_Hz_nm3 / 0.1).epsilon(1e-12));
  REQUIRE(result.diameters_nm.size() == 2);
  CHECK(result.diameters_nm[0] ==
        doctest::Approx(std::cbrt(6.0 * 2e9 / kPi)).epsilon(1e-8));
  CHECK(result.diameters_nm[1] ==
        doctest::Approx(std::cbrt(6.0 * 1e9 / kPi)).epsilon(1e-8));
  CHECK(result.histogram.total() == 2.0);
  CHECK(records[2].fit_failure.has_value());
}

TEST_CASE("brightness per center") {
  // beta_abs (pi d^3 / 6) / N / 1e6, in MHz.
  CHECK(brightness_per_center_MHz(1.5e3, 100.0, 300.0) ==
        doctest::Approx(1.5e3 * kPi / 6.0 * 1e6 / 300.0 / 1e6).epsilon(1e-12));
  CHECK_THROWS_AS(brightness_per_center_MHz(1.5e3, 100.0, 0.0), InputError);
}

TEST_CASE("distribution comparison") {
  const Histogram a = make_histogram({30.0, 30.0, 50.0}, 20.0);
  const DistributionComparison self = compare_distributions(a, a);
  CHECK(self.overlap == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(self.mode_shift_nm == 0.0);

  const Histogram far = make_histogram({210.0, 230.0}, 20.0);
  CHECK(compare_distributions(a, far).overlap == doctest::Approx(0.0));

  Histogram b = a;
  b.weights = {0.0, 3.0};  // drop the 40-60 bin, keep 20-40
  const DistributionComparison cmp = compare_distributions(a, b);
  CHECK(cmp.mode_a_nm == 30.0);
  CHECK(cmp.mode_b_nm == 30.0);
  CHECK(cmp.overlap == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("intensity weighting drags the mode to larger sizes") {
  // A reference method weighting each particle by d^6 against the number
  // distribution of the same sample: its mode must sit at or above ours.
  SplitMix64 rng(31u);
  std::vector<double> diameters;
  std::vector<std::pair<double, double>> intensity_weighted;
  for (int i = 0; i < 4000; ++i) {
    const double d = rng.lognormal(std::log(70.0), 0.3);
    diameters.push_back(d);
    intensity_weighted.emplace_back(d, std::pow(d, 6.0));
  }
  const Histogram number = make_histogram(diameters, 20.0);
  const Histogram dls = make_weighted_histogram(intensity_weighted, 20.0);
  const DistributionComparison cmp = compare_distributions(number, dls);
  CHECK(cmp.mode_shift_nm < 0.0);
  CHECK(cmp.overlap < 0.9);
  CHECK(cmp.overlap > 0.0);
}
