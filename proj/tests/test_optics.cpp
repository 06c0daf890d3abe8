#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "nvphys/constants.hpp"
#include "nvphys/ellipsoid.hpp"
#include "nvphys/errors.hpp"
#include "nvphys/optics.hpp"
#include "nvphys/rng.hpp"
#include "support/oracles.hpp"

using namespace nvphys;

TEST_CASE("shielding factor limits and sphere value") {
  CHECK(shielding_factor(0.0, 2.42) == 1.0);
  CHECK(shielding_factor(1.0, 2.42) == doctest::Approx(1.0 / (2.42 * 2.42)));
  // Sphere: eta = 3 / (n^2 + 2).
  CHECK(shielding_factor(1.0 / 3.0, 2.42) ==
        doctest::Approx(3.0 / (2.42 * 2.42 + 2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(shielding_factor(-0.1, 2.0), InputError);
  CHECK_THROWS_AS(shielding_factor(1.1, 2.0), InputError);
  CHECK_THROWS_AS(shielding_factor(0.5, 0.0), InputError);
}

TEST_CASE("bulk interface field ratio and transmittance") {
  const BulkInterface vac = bulk_interface(1.0);
  CHECK(vac.eta == 1.0);
  CHECK(vac.transmittance == 1.0);

  const BulkInterface diamond = bulk_interface(2.42);
  CHECK(diamond.eta == doctest::Approx(2.0 / 3.42).epsilon(1e-15));
  // T = eta^2 n: flux conservation across the boundary.
  CHECK(diamond.transmittance ==
        doctest::Approx(diamond.eta * diamond.eta * 2.42).epsilon(1e-14));
  CHECK_THROWS_AS(bulk_interface(0.0), InputError);
}

TEST_CASE("environment validation") {
  OpticalEnvironment env;
  CHECK_NOTHROW(env.validate());

  env.n_crystal = 1.0;
  CHECK_THROWS_AS(env.validate(), InputError);

  env = OpticalEnvironment();
  env.n_medium = 0.9;
  CHECK_THROWS_AS(env.validate(), InputError);

  env = OpticalEnvironment();
  env.n_medium = 2.5;  // denser than the crystal
  CHECK_THROWS_AS(env.validate(), InputError);

  env = OpticalEnvironment();
  env.n_substrate = 0.5;
  CHECK_THROWS_AS(env.validate(), InputError);

  env = OpticalEnvironment();
  env.substrate_enhancement_average = 0.9;
  CHECK_THROWS_AS(env.validate(), InputError);
}

TEST_CASE("environment factories") {
  CHECK(OpticalEnvironment::air().n_medium == 1.0);
  CHECK(OpticalEnvironment::water().n_medium == kWaterIndex);
  const OpticalEnvironment glass = OpticalEnvironment::on_glass();
  CHECK(glass.n_substrate.has_value());
  CHECK(*glass.n_substrate == kSilicaIndex);
  CHECK(glass.n_medium == 1.0);
}

TEST_CASE("substrate emission factor selection") {
  OpticalEnvironment env = OpticalEnvironment::on_glass();
  env.emission_mode = SubstrateEmissionMode::kParallel;
  CHECK(env.substrate_emission_factor() == 1.4);
  env.emission_mode = SubstrateEmissionMode::kPerpendicular;
  CHECK(env.substrate_emission_factor() == 2.3);
  env.emission_mode = SubstrateEmissionMode::kAverage;
  CHECK(env.substrate_emission_factor() == 1.7);

  // No substrate, no enhancement, whatever the mode says.
  OpticalEnvironment bare;
  bare.emission_mode = SubstrateEmissionMode::kPerpendicular;
  CHECK(bare.substrate_emission_factor() == 1.0);
}

TEST_CASE("sphere coupling factors in air") {
  const FieldCoupling fc =
      coupling_factors(Ellipsoid(1.0, 1.0, 1.0), OpticalEnvironment::air());
  const double eta = 3.0 / (2.42 * 2.42 + 2.0);
  for (int i = 0; i < 3; ++i) {
    CHECK(fc.eta[i] == doctest::Approx(eta).epsilon(1e-14));
    CHECK(fc.absorption_factor[i] == doctest::Approx(eta * eta * 2.42).epsilon(1e-14));
    CHECK(fc.emission_factor[i] == doctest::Approx(eta * eta / 2.42).epsilon(1e-14));
  }
  CHECK(fc.absorption_factor_avg == doctest::Approx(fc.absorption_factor[0]));
  CHECK(fc.emission_factor_avg == doctest::Approx(fc.emission_factor[0]));
}

TEST_CASE("absorption to emission ratio is the squared relative index") {
  SplitMix64 rng(19u);
  for (int trial = 0; trial < 50; ++trial) {
    const Ellipsoid shape(1.0, rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0));
    for (const OpticalEnvironment& env :
         {OpticalEnvironment::air(), OpticalEnvironment::water()}) {
      const FieldCoupling fc = coupling_factors(shape, env);
      const double n2 = env.relative_index() * env.relative_index();
      for (int i = 0; i < 3; ++i)
        CHECK(fc.absorption_factor[i] / fc.emission_factor[i] ==
              doctest::Approx(n2).epsilon(1e-12));
    }
  }
}

TEST_CASE("substrate multiplies emission only by default") {
  const Ellipsoid shape(1.0, 0.8, 0.6);
  const FieldCoupling bare = coupling_factors(shape, OpticalEnvironment::air());
  const FieldCoupling on_glass = coupling_factors(shape, OpticalEnvironment::on_glass());
  for (int i = 0; i < 3; ++i) {
    CHECK(on_glass.absorption_factor[i] == bare.absorption_factor[i]);
    CHECK(on_glass.emission_factor[i] ==
          doctest::Approx(1.7 * bare.emission_factor[i]).epsilon(1e-14));
  }
}

TEST_CASE("optional substrate field reduction scales absorption") {
  OpticalEnvironment env = OpticalEnvironment::on_glass();
  env.substrate_field_reduction = true;
  const Ellipsoid shape(1.0, 0.8, 0.6);
  const FieldCoupling bare = coupling_factors(shape, OpticalEnvironment::air());
  const FieldCoupling reduced = coupling_factors(shape, env);
  const double eta_sub = 2.0 / (1.46 + 1.0);
  for (int i = 0; i < 3; ++i)
    CHECK(reduced.absorption_factor[i] ==
          doctest::Approx(eta_sub * eta_sub * bare.absorption_factor[i]).epsilon(1e-14));
}

TEST_CASE("standard shape table layout") {
  const std::vector<StandardShapeRow> rows = standard_shape_rows();
  REQUIRE(rows.size() == 8);
  CHECK(rows.front().shape_id == "needle");
  CHECK(rows.back().shape_id == "flake");
  CHECK(rows[3].shape_id == "sphere");
  CHECK(rows[3].axes == std::array<double, 3>{1.0, 1.0, 1.0});

  for (const StandardShapeRow& row : rows) {
    CHECK(row.delta.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Rows must be plain recomputations, nothing baked in.
    const Ellipsoid shape(row.axes[0], row.axes[1], row.axes[2]);
    const FieldCoupling air = coupling_factors(shape, OpticalEnvironment::air());
    const FieldCoupling water = coupling_factors(shape, OpticalEnvironment::water());
    for (int i = 0; i < 3; ++i) {
      CHECK(row.air.absorption_factor[i] == air.absorption_factor[i]);
      CHECK(row.water.emission_factor[i] == water.emission_factor[i]);
    }
  }
}

TEST_CASE("standard shape CSV is rectangular") {
  const std::string csv = standard_shape_csv(standard_shape_rows());
  std::istringstream in(csv);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    ++lines;
    const std::size_t commas = std::count(line.begin(), line.end(), ',');
    CHECK(commas == 20);  // 21 columns
  }
  CHECK(lines == 9);  // header plus eight shapes
  CHECK(csv.rfind("shape_id,axis_ratios,delta_a", 0) == 0);
}

TEST_CASE("standard shape text names every shape") {
  const std::string text = standard_shape_text(standard_shape_rows());
  for (const char* id : {"needle", "sphere", "oblate_1_8", "flake"})
    CHECK(text.find(id) != std::string::npos);
}

TEST_CASE("shape class statistics match a direct recount") {
  const std::vector<Ellipsoid> family = compact_shape_family();
  REQUIRE(family.size() == 3);
  const OpticalEnvironment env = OpticalEnvironment::water();
  const FactorStats stats = shape_class_stats(family, env);

  std::vector<double> em, ab;
  for (const Ellipsoid& s : family) {
    const FieldCoupling fc = coupling_factors(s, env);
    for (int i = 0; i < 3; ++i) {
      em.push_back(fc.emission_factor[i]);
      ab.push_back(fc.absorption_factor[i]);
    }
  }
  CHECK(stats.emission_mean == doctest::Approx(oracle::mean(em)).epsilon(1e-14));
  CHECK(stats.emission_std ==
        doctest::Approx(oracle::stddev_population(em)).epsilon(1e-12));
  CHECK(stats.absorption_mean == doctest::Approx(oracle::mean(ab)).epsilon(1e-14));
  CHECK(stats.absorption_std ==
        doctest::Approx(oracle::stddev_population(ab)).epsilon(1e-12));

  CHECK_THROWS_AS(shape_class_stats({}, env), InputError);
}
