#include "nvphys/optics.hpp"

#include <cmath>
#include <cstdio>

#include "nvphys/errors.hpp"

namespace nvphys {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

double OpticalEnvironment::substrate_emission_factor() const {
  if (!n_substrate) return 1.0;
  switch (emission_mode) {
    case SubstrateEmissionMode::kParallel:
      return substrate_enhancement_parallel;
    case SubstrateEmissionMode::kPerpendicular:
      return substrate_enhancement_perpendicular;
    case SubstrateEmissionMode::kAverage:
      return substrate_enhancement_average;
  }
  return 1.0;
}

void OpticalEnvironment::validate() const {
  if (!(n_crystal > 1.0)) throw InputError("crystal index must exceed 1");
  if (!(n_medium >= 1.0)) throw InputError("medium index must be at least 1");
  if (!(relative_index() > 1.0))
    throw InputError("crystal must be optically denser than the medium");
  if (n_substrate && !(*n_substrate >= 1.0))
    throw InputError("substrate index must be at least 1");
  if (substrate_enhancement_parallel < 1.0 ||
      substrate_enhancement_perpendicular < 1.0 ||
      substrate_enhancement_average < 1.0)
    throw InputError("substrate enhancement factors must be at least 1");
}

OpticalEnvironment OpticalEnvironment::air() { return {}; }

OpticalEnvironment OpticalEnvironment::water() {
  OpticalEnvironment env;
  env.n_medium = 1.33;
  return env;
}

OpticalEnvironment OpticalEnvironment::on_glass() {
  OpticalEnvironment env;
  env.n_substrate = 1.46;
  return env;
}

double shielding_factor(double delta, double n_rel) {
  if (!(delta >= 0.0 && delta <= 1.0))
    throw InputError("depolarization factor outside [0, 1]");
  if (!(n_rel > 0.0)) throw InputError("relative index must be positive");
  return 1.0 / (1.0 + (n_rel * n_rel - 1.0) * delta);
}

BulkInterface bulk_interface(double n_rel) {
  if (!(n_rel > 0.0)) throw InputError("relative index must be positive");
  const double s = n_rel + 1.0;
  return {2.0 / s, 4.0 * n_rel / (s * s)};
}

FieldCoupling coupling_factors(const Ellipsoid& shape, const OpticalEnvironment& env) {
  env.validate();
  const DepolarizationFactors d = depolarization_factors(shape);
  const double n_rel = env.relative_index();

  double abs_scale = 1.0;
  if (env.substrate_field_reduction && env.n_substrate) {
    const double eta_sub = bulk_interface(*env.n_substrate / env.n_medium).eta;
    abs_scale = eta_sub * eta_sub;
  }
  const double em_scale = env.substrate_emission_factor();

  FieldCoupling out{};
  for (int i = 0; i < 3; ++i) {
    const double eta = shielding_factor(d.delta[i], n_rel);
    out.eta[i] = eta;
    out.absorption_factor[i] = eta * eta * n_rel * abs_scale;
    out.emission_factor[i] = eta * eta / n_rel * em_scale;
  }
  out.absorption_factor_avg = (out.absorption_factor[0] + out.absorption_factor[1] +
                               out.absorption_factor[2]) /
                              3.0;
  out.emission_factor_avg =
      (out.emission_factor[0] + out.emission_factor[1] + out.emission_factor[2]) / 3.0;
  return out;
}

std::vector<StandardShapeRow> standard_shape_rows() {
  struct Entry {
    const char* id;
    double a, b, c;
  };
  static const Entry entries[] = {
      {"needle", 1.0, 0.0, 0.0},        {"prolate_1_4", 1.0, 0.25, 0.25},
      {"prolate_1_2", 1.0, 0.5, 0.5},   {"sphere", 1.0, 1.0, 1.0},
      {"oblate_1_2", 1.0, 1.0, 0.5},    {"oblate_1_4", 1.0, 1.0, 0.25},
      {"oblate_1_8", 1.0, 1.0, 0.125},  {"flake", 1.0, 1.0, 0.0},
  };
  const OpticalEnvironment air = OpticalEnvironment::air();
  const OpticalEnvironment water = OpticalEnvironment::water();

  std::vector<StandardShapeRow> rows;
  rows.reserve(std::size(entries));
  for (const Entry& e : entries) {
    const Ellipsoid shape(e.a, e.b, e.c);
    StandardShapeRow row;
    row.shape_id = e.id;
    row.axes = {e.a, e.b, e.c};
    row.delta = depolarization_factors(shape);
    row.air = coupling_factors(shape, air);
    row.water = coupling_factors(shape, water);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string standard_shape_csv(const std::vector<StandardShapeRow>& rows) {
  std::string out =
      "shape_id,axis_ratios,delta_a,delta_b,delta_c,"
      "abs_air_a,abs_air_b,abs_air_c,abs_air_avg,"
      "abs_water_a,abs_water_b,abs_water_c,abs_water_avg,"
      "em_air_a,em_air_b,em_air_c,em_air_avg,"
      "em_water_a,em_water_b,em_water_c,em_water_avg\n";
  for (const StandardShapeRow& r : rows) {
    out += r.shape_id;
    out += ',' + num(r.axes[0]) + ':' + num(r.axes[1]) + ':' + num(r.axes[2]);
    for (int i = 0; i < 3; ++i) out += ',' + num(r.delta.delta[i]);
    for (const FieldCoupling* fc : {&r.air, &r.water}) {
      for (int i = 0; i < 3; ++i) out += ',' + num(fc->absorption_factor[i]);
      out += ',' + num(fc->absorption_factor_avg);
    }
    for (const FieldCoupling* fc : {&r.air, &r.water}) {
      for (int i = 0; i < 3; ++i) out += ',' + num(fc->emission_factor[i]);
      out += ',' + num(fc->emission_factor_avg);
    }
    out += '\n';
  }
  return out;
}

std::string standard_shape_text(const std::vector<StandardShapeRow>& rows) {
  std::string out;
  char line[160];
  for (const StandardShapeRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-12s axes %g : %g : %g\n", r.shape_id.c_str(),
                  r.axes[0], r.axes[1], r.axes[2]);
    out += line;
    std::snprintf(line, sizeof(line), "  delta      %8.4f %8.4f %8.4f\n",
                  r.delta.delta[0], r.delta.delta[1], r.delta.delta[2]);
    out += line;
    const struct {
      const char* label;
      const std::array<double, 3>& v;
      double avg;
    } blocks[] = {
        {"abs air  ", r.air.absorption_factor, r.air.absorption_factor_avg},
        {"abs water", r.water.absorption_factor, r.water.absorption_factor_avg},
        {"em  air  ", r.air.emission_factor, r.air.emission_factor_avg},
        {"em  water", r.water.emission_factor, r.water.emission_factor_avg},
    };
    for (const auto& b : blocks) {
      std::snprintf(line, sizeof(line), "  %s  %8.4f %8.4f %8.4f   avg %8.4f\n",
                    b.label, b.v[0], b.v[1], b.v[2], b.avg);
      out += line;
    }
  }
  return out;
}

FactorStats shape_class_stats(const std::vector<Ellipsoid>& shapes,
                              const OpticalEnvironment& env) {
  if (shapes.empty()) throw InputError("shape set is empty");
  std::vector<double> em;
  std::vector<double> ab;
  for (const Ellipsoid& s : shapes) {
    const FieldCoupling fc = coupling_factors(s, env);
    for (int i = 0; i < 3; ++i) {
      em.push_back(fc.emission_factor[i]);
      ab.push_back(fc.absorption_factor[i]);
    }
  }
  auto mean_std = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    // Population deviation; the quoted spreads divide by N, not N-1.
    return std::pair<double, double>(m, std::sqrt(s2 / static_cast<double>(v.size())));
  };
  const auto [em_mean, em_std] = mean_std(em);
  const auto [ab_mean, ab_std] = mean_std(ab);
  return {em_mean, em_std, ab_mean, ab_std};
}

std::vector<Ellipsoid> compact_shape_family() {
  return {Ellipsoid(1.0, 0.5, 0.5), Ellipsoid(1.0, 1.0, 1.0), Ellipsoid(1.0, 1.0, 0.5)};
}

}  // namespace nvphys
