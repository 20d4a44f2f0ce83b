#ifndef HCF_TOOLS_RUN_CONFIG_HPP
#define HCF_TOOLS_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hcf/atomic_data.hpp"
#include "hcf/fitting.hpp"
#include "hcf/pump_transit.hpp"

namespace hcf::cli {

/// Config field that is missing, mistyped or out of range. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct SpectrumSettings {
  std::string model = "transmission";  // or "satspec"
  double effective_od = 5.7;
  std::optional<double> doppler_sigma;  // Hz; from the temperature when absent
  double global_offset = 0.0;
  double baseline = 1.0;
  double f_min = -700e6;
  double f_max = 500e6;
  int points = 500;
  double noise = 0.0;  // additive N(0, noise) on transmission, clipped at 0
  double pump_saturation = 0.0;
  double homogeneous_width = 0.0;
  std::map<std::string, double> dip_contrasts;
};

struct MonteCarloSettings {
  std::uint64_t n_samples = 1000000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  SpeedWeighting weighting = SpeedWeighting::flux;
};

struct PumpSettings {
  double rabi = 700e6;
  double detuning = 0.0;
  double branching_to_dark = 0.5;
  int pumped_from_F = 3;
  double sweep_max = 1e9;
  int sweep_points = 41;
  int velocity_classes = 401;
  double velocity_span_sigmas = 5.0;
  std::optional<std::filesystem::path> transit_report;
};

struct MemorySettings {
  std::optional<double> od;
  std::optional<double> effective_od;
  std::optional<double> homogeneous_gamma;
  std::optional<double> inhomogeneous_gamma;  // Doppler FWHM at `temperature` when absent
  std::optional<double> temperature;          // K, for inhomogeneous_gamma
  std::optional<double> bandwidth;
  std::optional<double> rabi;
  std::optional<double> detuning;
  std::optional<double> storage_time;
  std::optional<double> pulse_duration;
  double margin = 10.0;
  std::optional<double> coupling_efficiency;
  std::optional<std::filesystem::path> transit_report;
  std::optional<std::filesystem::path> pump_report;
  std::optional<std::filesystem::path> fit_report;
};

/*
 * Everything a command needs. Paths in the config file are relative to the
 * file's directory; paths given as flags are relative to the working directory.
 */
struct RunConfig {
  std::filesystem::path atomic_data_path;
  std::optional<std::filesystem::path> output_directory;
  int ground_F = 3;
  FibreGeometry geometry;
  double temperature = 363.0;
  PopulationModel population_model = PopulationModel::degeneracy_weighted;
  FitOptions fit;
  LiadModelForm liad_form = LiadModelForm::rise_decay_product;
  std::optional<TransmissionModelParams> fit_initial;
  MonteCarloSettings monte_carlo;
  SpectrumSettings spectrum;
  PumpSettings pump;
  MemorySettings memory;

  /// The config as parsed, for provenance.
  nlohmann::json source = nlohmann::json::object();
};

std::filesystem::path bundled_atomic_data();

/// Parses and validates a config document; `base` resolves relative paths.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base);
RunConfig load_run_config(const std::filesystem::path& path);

/// Referenced input paths must exist; throws ConfigError naming each missing field.
void check_paths(const RunConfig& config);

}  // namespace hcf::cli

#endif  // HCF_TOOLS_RUN_CONFIG_HPP
