#include "hcf/pump_transit.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "hcf/constants.hpp"
#include "hcf/error.hpp"

namespace hcf {

namespace {

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// splitmix64 stream keyed by (seed, sample index), so every sample owns its own draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index) : state_(mix64(mix64(seed) + index)) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }
  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Two independent standard normals (Box-Muller).
  std::pair<double, double> normal_pair() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * constants::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
  }

 private:
  std::uint64_t state_;
};

double thermal_speed_scale(const AtomicSystem& system, double temperature) {
  if (!(temperature > 0.0)) throw DomainError("temperature must be positive");
  return std::sqrt(constants::boltzmann * temperature / system.mass);
}

double sample_duration(std::uint64_t seed, std::uint64_t index, double radius, double speed_scale,
                       SpeedWeighting weighting) {
  CounterRng rng(seed, index);
  const double u = rng.uniform();  // impact parameter / radius
  const double chord = 2.0 * radius * std::sqrt(1.0 - u * u);
  const auto [a, b] = rng.normal_pair();
  double v2 = a * a + b * b;
  if (weighting == SpeedWeighting::flux) {
    // chi with three degrees of freedom has density ~ v^2 exp(-v^2/2)
    const auto [c, unused] = rng.normal_pair();
    (void)unused;
    v2 += c * c;
  }
  return chord / (speed_scale * std::sqrt(v2));
}

double quantile_sorted(const std::vector<double>& sorted, double level) {
  const double pos = level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void validate(const FibreGeometry& g) {
  if (!(g.mode_width > 0.0)) throw InvariantError("mode_width", "must be > 0");
  if (!(2.0 * g.mode_width <= g.core_diameter))
    throw InvariantError("mode_width", "mode diameter exceeds the core diameter");
  if (!(g.length > 0.0)) throw InvariantError("length", "must be > 0");
  if (!(g.loss_db_per_m >= 0.0)) throw InvariantError("loss_db_per_m", "must be >= 0");
  if (!(g.interaction_radius_factor > 0.0)) throw InvariantError("interaction_radius_factor", "must be > 0");
}

void validate(const PumpConfig& c) {
  if (!(c.rabi_frequency >= 0.0) || !std::isfinite(c.rabi_frequency))
    throw InvariantError("rabi_frequency", "must be finite and >= 0");
  if (!(c.branching_to_dark > 0.0 && c.branching_to_dark <= 1.0))
    throw InvariantError("branching_to_dark", "must lie in (0, 1]");
  if (!std::isfinite(c.detuning)) throw InvariantError("detuning", "not finite");
  if (c.velocity_classes < 1) throw InvariantError("velocity_classes", "must be >= 1");
  if (!(c.velocity_span_sigmas > 0.0)) throw InvariantError("velocity_span_sigmas", "must be > 0");
}

double rabi_from_power(double power, const FibreGeometry& geometry, double dipole_moment) {
  if (!(geometry.mode_width > 0.0)) throw DomainError("rabi_from_power: mode width must be positive");
  if (!(power >= 0.0)) throw DomainError("rabi_from_power: power must be >= 0");
  const double w = geometry.mode_width;
  const double peak_intensity = 2.0 * power / (constants::pi * w * w);
  const double field = std::sqrt(2.0 * peak_intensity / (constants::vacuum_permittivity * constants::speed_of_light));
  return dipole_moment * field / constants::planck;
}

double power_for_rabi(double rabi_frequency, const FibreGeometry& geometry, double dipole_moment) {
  if (!(geometry.mode_width > 0.0)) throw DomainError("power_for_rabi: mode width must be positive");
  const double field = rabi_frequency * constants::planck / dipole_moment;
  const double peak_intensity = 0.5 * constants::vacuum_permittivity * constants::speed_of_light * field * field;
  const double w = geometry.mode_width;
  return peak_intensity * constants::pi * w * w / 2.0;
}

std::vector<double> transit_time_samples(const FibreGeometry& geometry, const AtomicSystem& system,
                                         double temperature, std::uint64_t n_samples, std::uint64_t seed,
                                         const TransitOptions& options) {
  validate(geometry);
  const double radius = geometry.interaction_radius();
  const double scale = thermal_speed_scale(system, temperature);
  std::vector<double> samples(n_samples);

  unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, n_samples)));
  auto fill = [&](std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t i = begin; i < end; ++i)
      samples[i] = sample_duration(seed, i, radius, scale, options.weighting);
  };
  if (workers == 1) {
    fill(0, n_samples);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (n_samples + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min<std::uint64_t>(n_samples, w * chunk);
      const std::uint64_t end = std::min<std::uint64_t>(n_samples, begin + chunk);
      pool.emplace_back(fill, begin, end);
    }
    for (auto& t : pool) t.join();
  }
  return samples;
}

TransitStats transit_time_mc(const FibreGeometry& geometry, const AtomicSystem& system, double temperature,
                             std::uint64_t n_samples, std::uint64_t seed, const TransitOptions& options) {
  if (n_samples < 1000) throw DomainError("transit_time_mc: need at least 1000 samples");
  if (options.n_quantiles < 1) throw DomainError("transit_time_mc: need at least one quantile");
  std::vector<double> samples = transit_time_samples(geometry, system, temperature, n_samples, seed, options);

  TransitStats stats;
  stats.n_samples = n_samples;
  stats.rng_seed = seed;
  stats.weighting = options.weighting;

  // sequential in sample order so the sums do not depend on the worker split
  double sum = 0.0;
  for (double t : samples) sum += t;
  stats.mean = sum / static_cast<double>(n_samples);
  double sq = 0.0;
  for (double t : samples) sq += (t - stats.mean) * (t - stats.mean);
  stats.standard_error = std::sqrt(sq / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));

  std::sort(samples.begin(), samples.end());
  stats.median = quantile_sorted(samples, 0.5);
  const int nq = options.n_quantiles;
  for (int i = 0; i < nq; ++i) {
    const double level = (i + 0.5) / nq;
    stats.quantile_levels.push_back(level);
    stats.distribution_quantiles.push_back(quantile_sorted(samples, level));
  }
  return stats;
}

TransitDistribution transit_distribution(const TransitStats& stats) {
  if (stats.distribution_quantiles.empty()) throw InvariantError("distribution_quantiles", "empty");
  TransitDistribution d;
  d.durations = stats.distribution_quantiles;
  d.weights.assign(d.durations.size(), 1.0 / static_cast<double>(d.durations.size()));
  return d;
}

TransitDistribution analytic_transit_distribution(const FibreGeometry& geometry, const AtomicSystem& system,
                                                  double temperature, SpeedWeighting weighting, int impact_nodes,
                                                  int speed_nodes) {
  validate(geometry);
  if (impact_nodes < 1 || speed_nodes < 1) throw DomainError("analytic_transit_distribution: need nodes");
  const double radius = geometry.interaction_radius();
  const double scale = thermal_speed_scale(system, temperature);
  const double v_max = 8.0 * scale;
  const double dv = v_max / speed_nodes;

  std::vector<double> speed(static_cast<std::size_t>(speed_nodes)), speed_weight(speed.size());
  double total = 0.0;
  for (int j = 0; j < speed_nodes; ++j) {
    const double v = (j + 0.5) * dv;
    const double x = v / scale;
    const double w = (weighting == SpeedWeighting::flux ? x * x : x) * std::exp(-0.5 * x * x);
    speed[static_cast<std::size_t>(j)] = v;
    speed_weight[static_cast<std::size_t>(j)] = w;
    total += w;
  }

  TransitDistribution d;
  for (int i = 0; i < impact_nodes; ++i) {
    const double u = (i + 0.5) / impact_nodes;
    const double chord = 2.0 * radius * std::sqrt(1.0 - u * u);
    for (int j = 0; j < speed_nodes; ++j) {
      d.durations.push_back(chord / speed[static_cast<std::size_t>(j)]);
      d.weights.push_back(speed_weight[static_cast<std::size_t>(j)] / total / impact_nodes);
    }
  }
  return d;
}

TransitDistribution fixed_transit(double duration) {
  if (!(duration > 0.0)) throw DomainError("fixed_transit: duration must be positive");
  return {{duration}, {1.0}};
}

double scattering_rate(double natural_linewidth, double rabi_frequency, double detuning) {
  const double gamma = 2.0 * constants::pi * natural_linewidth;
  const double s = 2.0 * rabi_frequency * rabi_frequency / (natural_linewidth * natural_linewidth);
  const double y = 2.0 * detuning / natural_linewidth;
  return 0.5 * gamma * s / (1.0 + s + y * y);
}

double pumping_efficiency(const AtomicSystem& system, const PumpConfig& config, const TransitDistribution& transit,
                          double doppler_sigma, const ThermalState& initial) {
  validate(config);
  if (!(doppler_sigma > 0.0) || !std::isfinite(doppler_sigma))
    throw DomainError("pumping_efficiency: Doppler width must be positive");
  if (transit.durations.empty() || transit.durations.size() != transit.weights.size())
    throw InvariantError("transit", "empty or mismatched distribution");

  const double p_from = initial.population(config.pumped_from_F);
  double p_dark = 0.0;
  for (const auto& [F, p] : initial.ground_populations)
    if (F != config.pumped_from_F) p_dark += p;

  const int n = config.velocity_classes;
  const double span = config.velocity_span_sigmas * doppler_sigma;
  double weight_sum = 0.0, pumped = 0.0;
  for (int j = 0; j < n; ++j) {
    const double shift = n == 1 ? 0.0 : -span + 2.0 * span * j / (n - 1);
    const double w = std::exp(-0.5 * (shift / doppler_sigma) * (shift / doppler_sigma));
    const double rate = config.branching_to_dark *
                        scattering_rate(system.natural_linewidth_gamma0, config.rabi_frequency, config.detuning - shift);
    double out = 0.0;
    for (std::size_t k = 0; k < transit.durations.size(); ++k)
      out += transit.weights[k] * -std::expm1(-rate * transit.durations[k]);
    pumped += w * out;
    weight_sum += w;
  }
  return p_dark + p_from * pumped / weight_sum;
}

std::vector<EfficiencyPoint> pumping_efficiency_sweep(const AtomicSystem& system, const PumpConfig& config,
                                                      const TransitDistribution& transit, double doppler_sigma,
                                                      const ThermalState& initial, std::span<const double> rabi) {
  std::vector<EfficiencyPoint> out;
  PumpConfig c = config;
  for (double omega : rabi) {
    c.rabi_frequency = omega;
    out.push_back({omega, pumping_efficiency(system, c, transit, doppler_sigma, initial)});
  }
  return out;
}

}  // namespace hcf
