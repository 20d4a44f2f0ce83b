#ifndef HCF_MEMORY_METRICS_HPP
#define HCF_MEMORY_METRICS_HPP

#include <optional>
#include <string>
#include <vector>

#include "hcf/pump_transit.hpp"

namespace hcf {

/// Inputs of the Raman-memory figures of merit. Rates and widths in Hz, times in s.
struct MemoryBudget {
  std::optional<double> od;            // d; derived from effective_od when absent
  std::optional<double> effective_od;  // d*
  double homogeneous_gamma = 0.0;
  double inhomogeneous_gamma = 0.0;
  double bandwidth_delta = 0.0;
  double rabi_omega = 0.0;
  double detuning_Delta = 0.0;
  double storage_time = 0.0;
  double pulse_duration = 0.0;
};

/// d, taking it directly or converting from d* with the budget's widths.
double optical_depth(const MemoryBudget& budget);

struct RamanCoupling {
  double c_squared = 0.0;
  bool efficient = false;  // C^2 >= 1
  double omega_over_delta = 0.0;
  bool adiabatic_warning = false;  // Omega / Delta above 0.5
};

/// C^2 = d (gamma / delta) (Omega / Delta)^2.
RamanCoupling raman_coupling(const MemoryBudget& budget);

inline constexpr double kAdiabaticWarningRatio = 0.5;

struct OdRequirement {
  double ratio = 0.0;      // delta / gamma_i
  double margin = 10.0;
  double threshold = 0.0;  // margin * ratio
  std::optional<double> effective_od;
  std::optional<bool> pass;  // effective_od >= threshold, when supplied
};

/// The "d* much greater than delta / gamma_i" condition, with "much greater" read as a factor `margin`.
OdRequirement required_effective_od(double bandwidth_delta, double inhomogeneous_gamma, double margin = 10.0,
                                    std::optional<double> effective_od = std::nullopt);

/// Storage time over pulse duration.
double time_bandwidth_product(double storage_time, double pulse_duration);

/// 10^(-length * loss / 10).
double propagation_transmission(double length, double loss_db_per_m);

struct ReportLine {
  std::string name;
  double value = 0.0;
  std::string unit;
  std::string source;
  std::optional<bool> pass;  // set for lines that enter the verdict
  std::string note;
};

struct FeasibilityInputs {
  std::optional<MemoryBudget> budget;
  std::optional<FibreGeometry> geometry;
  std::optional<double> coupling_efficiency;
  double margin = 10.0;
  /// Optional measured/simulated inputs and where they came from.
  std::optional<double> transit_mean;  // s
  std::string transit_source;
  std::optional<double> pump_efficiency;
  std::string pump_source;
  std::string effective_od_source = "configuration";
  std::optional<double> excited_lifetime;  // s, for the transit-versus-lifetime condition
};

struct FeasibilityReport {
  bool feasible = false;
  std::vector<std::string> failing_conditions;
  std::vector<std::string> warnings;
  std::vector<ReportLine> lines;

  const ReportLine& line(const std::string& name) const;
  std::string to_text() const;
};

/// Throws DataError naming every missing required input.
FeasibilityReport feasibility_report(const FeasibilityInputs& inputs);

}  // namespace hcf

#endif  // HCF_MEMORY_METRICS_HPP
