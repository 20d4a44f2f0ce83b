#ifndef HCF_PUMP_TRANSIT_HPP
#define HCF_PUMP_TRANSIT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hcf/atomic_data.hpp"

namespace hcf {

/*
 * Fibre and mode geometry. `mode_width` is the Gaussian mode-field radius;
 * the interaction region is the disc of radius `interaction_radius_factor`
 * times that radius (1 by default, i.e. a disc of diameter 2 x mode_width).
 */
struct FibreGeometry {
  double core_diameter = 26e-6;  // m
  double mode_width = 12e-6;     // m
  double length = 0.20;          // m
  double loss_db_per_m = 1.0;
  double interaction_radius_factor = 1.0;

  double interaction_radius() const { return interaction_radius_factor * mode_width; }
};

void validate(const FibreGeometry& geometry);

/// Speed distribution of the atoms that cross the mode.
enum class SpeedWeighting {
  /// Crossing atoms are flux weighted: p(v) ~ v^2 exp(-v^2 / 2 s^2) in the transverse plane.
  flux,
  /// Plain 2D Maxwell-Boltzmann speeds, p(v) ~ v exp(-v^2 / 2 s^2).
  density,
};

struct TransitOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  SpeedWeighting weighting = SpeedWeighting::flux;
  int n_quantiles = 1000;  // equal-mass nodes kept for downstream averaging
};

struct TransitStats {
  double mean = 0.0;            // s
  double median = 0.0;          // s
  double standard_error = 0.0;  // s, of the mean
  /// Quantiles at levels (i + 0.5) / n: equal-probability nodes of the distribution.
  std::vector<double> quantile_levels;
  std::vector<double> distribution_quantiles;
  std::uint64_t n_samples = 0;
  std::uint64_t rng_seed = 0;
  SpeedWeighting weighting = SpeedWeighting::flux;
};

/// A discrete transit-time distribution: durations with weights summing to 1.
struct TransitDistribution {
  std::vector<double> durations;  // s
  std::vector<double> weights;
};

struct PumpConfig {
  double rabi_frequency = 0.0;    // Hz
  double detuning = 0.0;          // Hz from the pumped transition
  double branching_to_dark = 0.5; // beta
  double temperature = 363.0;     // K
  int pumped_from_F = 3;
  int velocity_classes = 401;
  double velocity_span_sigmas = 5.0;
};

void validate(const PumpConfig& config);

/// Peak Rabi frequency (Hz) of a Gaussian mode carrying `power` watts: I0 = 2P / (pi w^2),
/// E = sqrt(2 I0 / (eps0 c)), Omega = d E / h.
double rabi_from_power(double power, const FibreGeometry& geometry, double dipole_moment);

/// Inverse of rabi_from_power.
double power_for_rabi(double rabi_frequency, const FibreGeometry& geometry, double dipole_moment);

/// The per-sample durations that transit_time_mc summarizes; sample i depends only on (seed, i).
std::vector<double> transit_time_samples(const FibreGeometry& geometry, const AtomicSystem& system,
                                         double temperature, std::uint64_t n_samples, std::uint64_t seed,
                                         const TransitOptions& options = {});

/// Monte Carlo crossing times of thermal atoms through the interaction disc. Bit-identical for a
/// given (seed, n_samples) whatever the worker count.
TransitStats transit_time_mc(const FibreGeometry& geometry, const AtomicSystem& system, double temperature,
                             std::uint64_t n_samples, std::uint64_t seed, const TransitOptions& options = {});

/// Equal-weight quantile nodes of a Monte Carlo run.
TransitDistribution transit_distribution(const TransitStats& stats);

/// Deterministic product-grid quadrature of the same crossing-time distribution.
TransitDistribution analytic_transit_distribution(const FibreGeometry& geometry, const AtomicSystem& system,
                                                  double temperature, SpeedWeighting weighting = SpeedWeighting::flux,
                                                  int impact_nodes = 200, int speed_nodes = 400);

/// Single fixed duration, weight 1.
TransitDistribution fixed_transit(double duration);

/// Steady-state scattering rate (1/s) of a two-level atom: (Gamma/2) s / (1 + s + (2 delta / Gamma)^2),
/// s = 2 Omega^2 / Gamma^2, Gamma = 2 pi natural_linewidth.
double scattering_rate(double natural_linewidth, double rabi_frequency, double detuning);

/*
 * Fraction of atoms left in the dark manifold after one transit. Each
 * velocity class (Gaussian over Doppler shifts, `velocity_classes` nodes
 * over +/- `velocity_span_sigmas`) scatters at scattering_rate(...) with the
 * Doppler-shifted detuning; a fraction beta of decays lands in the dark
 * manifold, so the pump-out probability is 1 - exp(-beta R t). Atoms enter
 * thermally distributed:
 *
 *   eta = p_dark + p_from < 1 - exp(-beta R(v) t) >_(v, t)
 */
double pumping_efficiency(const AtomicSystem& system, const PumpConfig& config, const TransitDistribution& transit,
                          double doppler_sigma, const ThermalState& initial);

struct EfficiencyPoint {
  double rabi_frequency;
  double efficiency;
};

std::vector<EfficiencyPoint> pumping_efficiency_sweep(const AtomicSystem& system, const PumpConfig& config,
                                                      const TransitDistribution& transit, double doppler_sigma,
                                                      const ThermalState& initial, std::span<const double> rabi);

}  // namespace hcf

#endif  // HCF_PUMP_TRANSIT_HPP
