#ifndef HCF_ATOMIC_DATA_HPP
#define HCF_ATOMIC_DATA_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hcf {

enum class Level { ground, excited };

struct HyperfineManifold {
  Level level = Level::ground;
  int F = 0;
  int degeneracy = 1;
  /// Hz, relative to the level's named reference (AtomicSystem::ground_reference / excited_reference).
  double frequency_offset = 0.0;
};

/// One F -> F' transition. `offset` is the line position in the sweep frame of its ground manifold.
struct HyperfineLine {
  int ground_F = 0;
  int excited_F = 0;
  double offset = 0.0;
  double strength = 0.0;
};

/*
 * Species constants plus the hyperfine line table. Immutable once loaded;
 * load_atomic_data validates every invariant before returning one.
 */
struct AtomicSystem {
  int schema_version = 1;
  std::string species_name;
  double mass = 0.0;                      // kg
  double d2_wavelength = 0.0;             // m
  double natural_linewidth_gamma0 = 0.0;  // Hz, FWHM
  double excited_lifetime = 0.0;          // s
  std::optional<double> dipole_moment;    // C m
  std::string ground_reference;
  std::string excited_reference;
  std::string line_reference;
  std::string strength_normalization;
  std::vector<HyperfineManifold> ground_manifolds;
  std::vector<HyperfineManifold> excited_manifolds;
  std::vector<HyperfineLine> lines;

  double line_frequency() const;  // c / d2_wavelength
  bool has_ground_manifold(int F) const;
  const HyperfineManifold& ground_manifold(int F) const;
  /// Lines out of ground manifold F, ordered by offset. Throws InvariantError for an unknown F.
  std::vector<HyperfineLine> lines_from(int ground_F) const;
};

enum class PopulationModel {
  degeneracy_weighted,  // p_F = (2F+1) / sum(2F'+1)
  equal,                // 1/N per manifold
};

struct ThermalState {
  double temperature = 0.0;
  std::map<int, double> ground_populations;

  double population(int F) const;
};

/// 1-sigma Gaussian Doppler width (Hz) of the line at temperature T (K).
double doppler_sigma(const AtomicSystem& system, double temperature);

/// Doppler FWHM, 2 sqrt(2 ln 2) sigma.
double doppler_fwhm(const AtomicSystem& system, double temperature);

ThermalState thermal_ground_populations(const AtomicSystem& system, double temperature,
                                        PopulationModel model = PopulationModel::degeneracy_weighted);

/// Checks every AtomicSystem invariant; throws InvariantError naming the first offending field.
void validate(const AtomicSystem& system);

AtomicSystem parse_atomic_data(const std::string& text);
AtomicSystem load_atomic_data(const std::filesystem::path& path);

/// Writes the same key/value + table format that parse_atomic_data reads, with round-trip precision.
std::string serialize_atomic_data(const AtomicSystem& system);

}  // namespace hcf

#endif  // HCF_ATOMIC_DATA_HPP
