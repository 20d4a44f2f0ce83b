#include "doctest.h"

#include <cmath>

#include "hcf/error.hpp"
#include "hcf/pump_transit.hpp"
#include "support.hpp"

using namespace hcf;
using hcf::test::cesium;

namespace {

double eta(double rabi, const TransitDistribution& transit, double beta = 0.5, double temperature = 363.0,
           double sigma_scale = 1.0) {
  PumpConfig c;
  c.rabi_frequency = rabi;
  c.branching_to_dark = beta;
  c.temperature = temperature;
  return pumping_efficiency(cesium(), c, transit, sigma_scale * doppler_sigma(cesium(), temperature),
                            thermal_ground_populations(cesium(), temperature));
}

const TransitDistribution& default_transit() {
  static const TransitDistribution d = analytic_transit_distribution(FibreGeometry{}, cesium(), 363.0);
  return d;
}

}  // namespace

TEST_SUITE("pump-transit") {

TEST_CASE("geometry invariants") {
  CHECK_NOTHROW(validate(FibreGeometry{}));
  FibreGeometry g;
  g.mode_width = 14e-6;
  CHECK_THROWS_AS(validate(g), InvariantError);
  g = FibreGeometry{};
  g.length = 0.0;
  CHECK_THROWS_AS(validate(g), InvariantError);
  g = FibreGeometry{};
  g.mode_width = 0.0;
  CHECK_THROWS_AS(validate(g), InvariantError);
}

TEST_CASE("rabi frequency from power") {
  const FibreGeometry g;
  const double dip = *cesium().dipole_moment;
  CHECK(rabi_from_power(0.0, g, dip) == 0.0);
  for (double p : {1e-9, 3.7e-6, 1e-4, 0.02}) {
    const double r = rabi_from_power(p, g, dip);
    CHECK(std::abs(rabi_from_power(4.0 * p, g, dip) / (2.0 * r) - 1.0) < 1e-12);
    CHECK(std::abs(power_for_rabi(r, g, dip) / p - 1.0) < 1e-12);
  }
  const double p700 = power_for_rabi(700e6, g, dip);
  CHECK(p700 == doctest::Approx(test::oracle::power_for_700mhz).epsilon(1e-9));
  CHECK(p700 < 1e-3);
  FibreGeometry bad;
  bad.mode_width = -1.0;
  CHECK_THROWS_AS(rabi_from_power(1e-3, bad, dip), DomainError);
  CHECK_THROWS_AS(rabi_from_power(-1e-3, g, dip), DomainError);
}

TEST_CASE("transit Monte Carlo at the default geometry") {
  const TransitStats s = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 1000000, 1);
  CHECK(s.mean > 60e-9);
  CHECK(s.mean < 140e-9);
  CHECK(std::abs(s.mean - test::oracle::transit_mean_363) < 5 * s.standard_error);
  CHECK(s.median < s.mean);
  CHECK(s.n_samples == 1000000);
  CHECK(s.rng_seed == 1);
  CHECK(std::is_sorted(s.distribution_quantiles.begin(), s.distribution_quantiles.end()));
  CHECK(s.distribution_quantiles.size() == 1000);
}

TEST_CASE("transit Monte Carlo is bit-identical across worker counts") {
  TransitOptions one, four, many;
  one.workers = 1;
  four.workers = 4;
  many.workers = 13;
  const auto a = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 200000, 42, one);
  const auto b = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 200000, 42, four);
  const auto c = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 200000, 42, many);
  CHECK(a.mean == b.mean);
  CHECK(a.mean == c.mean);
  CHECK(a.standard_error == c.standard_error);
  CHECK(a.distribution_quantiles == b.distribution_quantiles);
  CHECK(a.distribution_quantiles == c.distribution_quantiles);
  const auto d = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 200000, 43, one);
  CHECK(d.mean != a.mean);
}

TEST_CASE("transit scaling") {
  const TransitStats base = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 100000, 5);
  FibreGeometry wide;
  wide.core_diameter = 60e-6;
  wide.mode_width = 24e-6;
  const TransitStats doubled = transit_time_mc(wide, cesium(), 363.0, 100000, 5);
  CHECK(doubled.mean == doctest::Approx(2.0 * base.mean).epsilon(1e-12));

  const TransitStats hot = transit_time_mc(FibreGeometry{}, cesium(), 4 * 363.0, 100000, 5);
  CHECK(hot.mean == doctest::Approx(0.5 * base.mean).epsilon(1e-12));
  const TransitStats hot_other = transit_time_mc(FibreGeometry{}, cesium(), 4 * 363.0, 100000, 6);
  CHECK(std::abs(hot_other.mean - 0.5 * base.mean) < 5 * std::hypot(hot_other.standard_error, 0.5 * base.standard_error));
}

TEST_CASE("transit mean error falls as 1/sqrt(n)") {
  const auto a = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 10000, 9);
  const auto b = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 40000, 9);
  const double ratio = a.standard_error / b.standard_error;
  CHECK(ratio > 1.8);
  CHECK(ratio < 2.2);

  // empirical spread of the mean across seeds
  double var_small = 0, var_large = 0;
  const double truth = test::oracle::transit_mean_363;
  for (std::uint64_t seed = 100; seed < 140; ++seed) {
    var_small += std::pow(transit_time_mc(FibreGeometry{}, cesium(), 363.0, 2000, seed).mean - truth, 2);
    var_large += std::pow(transit_time_mc(FibreGeometry{}, cesium(), 363.0, 8000, seed).mean - truth, 2);
  }
  const double variance_ratio = var_small / var_large;
  CHECK(variance_ratio > 2.0);
  CHECK(variance_ratio < 8.0);
}

TEST_CASE("transit preconditions") {
  CHECK_THROWS_AS(transit_time_mc(FibreGeometry{}, cesium(), 363.0, 999, 1), DomainError);
  CHECK_THROWS_AS(transit_time_mc(FibreGeometry{}, cesium(), 0.0, 1000, 1), DomainError);
  FibreGeometry bad;
  bad.mode_width = 20e-6;
  CHECK_THROWS_AS(transit_time_mc(bad, cesium(), 363.0, 1000, 1), InvariantError);
}

TEST_CASE("analytic transit distribution agrees with Monte Carlo") {
  const TransitDistribution& d = default_transit();
  double mean = 0.0, total = 0.0;
  for (std::size_t i = 0; i < d.durations.size(); ++i) {
    mean += d.weights[i] * d.durations[i];
    total += d.weights[i];
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mean == doctest::Approx(test::oracle::transit_mean_363).epsilon(2e-3));
}

TEST_CASE("scattering rate") {
  const double g = cesium().natural_linewidth_gamma0;
  CHECK(scattering_rate(g, 0.0, 0.0) == 0.0);
  const double big = scattering_rate(g, 1e12, 0.0);
  CHECK(big == doctest::Approx(3.141592653589793 * g).epsilon(1e-6));
  // s = 1 on resonance gives a quarter of Gamma
  const double r = scattering_rate(g, g / std::sqrt(2.0), 0.0);
  CHECK(r == doctest::Approx(2 * 3.141592653589793 * g / 4).epsilon(1e-12));
  CHECK(scattering_rate(g, 1e8, 1e9) < scattering_rate(g, 1e8, 0.0));
}

TEST_CASE("no pump leaves the thermal dark population") {
  CHECK(eta(0.0, default_transit()) == 9.0 / 16.0);
  CHECK(eta(0.0, fixed_transit(1e-6)) == 9.0 / 16.0);
}

TEST_CASE("efficiency at 700 MHz") {
  const double e = eta(700e6, default_transit());
  CHECK(e == doctest::Approx(test::oracle::eta_700).epsilon(1e-3));
  const TransitStats mc = transit_time_mc(FibreGeometry{}, cesium(), 363.0, 1000000, 1);
  CHECK(eta(700e6, transit_distribution(mc)) == doctest::Approx(test::oracle::eta_700).epsilon(1e-3));
}

TEST_CASE("efficiency is monotone in rabi frequency, beta and transit time") {
  std::vector<double> rabi;
  for (int i = 0; i <= 40; ++i) rabi.push_back(25e6 * i);
  PumpConfig c;
  const auto sweep = pumping_efficiency_sweep(cesium(), c, default_transit(), doppler_sigma(cesium(), 363.0),
                                              thermal_ground_populations(cesium(), 363.0), rabi);
  REQUIRE(sweep.size() == rabi.size());
  for (std::size_t i = 1; i < sweep.size(); ++i) CHECK(sweep[i].efficiency >= sweep[i - 1].efficiency);

  double previous = 0.0;
  for (double beta = 0.1; beta <= 1.0; beta += 0.1) {
    const double e = eta(700e6, default_transit(), beta);
    CHECK(e >= previous);
    previous = e;
  }
  previous = 0.0;
  for (double t = 10e-9; t <= 2e-6; t *= 1.5) {
    const double e = eta(700e6, fixed_transit(t));
    CHECK(e >= previous);
    CHECK(e < 1.0);
    previous = e;
  }
}

TEST_CASE("strong pumping with a long transit approaches unity") {
  const TransitDistribution longer = fixed_transit(10e-6);
  double previous = 0.0;
  for (double rabi : {1e8, 1e9, 1e10, 1e11}) {
    const double e = eta(rabi, longer);
    CHECK(e >= previous);
    previous = e;
  }
  CHECK(previous > 0.999);
}

TEST_CASE("power broadened pumping is insensitive to the Doppler width") {
  const double e0 = eta(700e6, default_transit());
  CHECK(std::abs(eta(700e6, default_transit(), 0.5, 363.0, 0.8) - e0) < 0.02);
  CHECK(std::abs(eta(700e6, default_transit(), 0.5, 363.0, 1.2) - e0) < 0.02);
}

TEST_CASE("pump configuration invariants") {
  PumpConfig c;
  c.branching_to_dark = 0.0;
  CHECK_THROWS_AS(validate(c), InvariantError);
  c.branching_to_dark = 0.5;
  c.rabi_frequency = -1.0;
  CHECK_THROWS_AS(validate(c), InvariantError);
  c.rabi_frequency = 0.0;
  CHECK_THROWS_AS(pumping_efficiency(cesium(), c, default_transit(), 0.0, thermal_ground_populations(cesium(), 363.0)),
                  DomainError);
  CHECK_THROWS_AS(fixed_transit(0.0), DomainError);
}

}  // TEST_SUITE
