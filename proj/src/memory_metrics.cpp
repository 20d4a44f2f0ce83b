#include "hcf/memory_metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "hcf/error.hpp"
#include "hcf/spectral_model.hpp"

namespace hcf {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive");
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

double optical_depth(const MemoryBudget& b) {
  if (b.od) return *b.od;
  if (!b.effective_od) throw DataError("memory budget needs either od or effective_od");
  return effective_to_optical_depth(*b.effective_od, b.homogeneous_gamma, b.inhomogeneous_gamma);
}

RamanCoupling raman_coupling(const MemoryBudget& b) {
  if (!(b.bandwidth_delta != 0.0)) throw DomainError("raman_coupling: bandwidth delta must be non-zero");
  if (!(b.detuning_Delta != 0.0)) throw DomainError("raman_coupling: detuning Delta must be non-zero");
  require_positive(b.homogeneous_gamma, "raman_coupling: homogeneous gamma");
  if (!(b.rabi_omega >= 0.0)) throw DomainError("raman_coupling: Rabi frequency must be >= 0");
  const double d = optical_depth(b);
  if (!(d >= 0.0)) throw DomainError("raman_coupling: optical depth must be >= 0");

  RamanCoupling c;
  c.omega_over_delta = b.rabi_omega / std::abs(b.detuning_Delta);
  c.c_squared = d * (b.homogeneous_gamma / b.bandwidth_delta) * c.omega_over_delta * c.omega_over_delta;
  c.efficient = c.c_squared >= 1.0;
  c.adiabatic_warning = c.omega_over_delta > kAdiabaticWarningRatio;
  return c;
}

OdRequirement required_effective_od(double bandwidth_delta, double inhomogeneous_gamma, double margin,
                                    std::optional<double> effective_od) {
  require_positive(bandwidth_delta, "required_effective_od: bandwidth");
  require_positive(inhomogeneous_gamma, "required_effective_od: inhomogeneous width");
  if (!(margin >= 1.0)) throw DomainError("required_effective_od: margin must be >= 1");
  OdRequirement r;
  r.ratio = bandwidth_delta / inhomogeneous_gamma;
  r.margin = margin;
  r.threshold = margin * r.ratio;
  r.effective_od = effective_od;
  if (effective_od) r.pass = *effective_od >= r.threshold;
  return r;
}

double time_bandwidth_product(double storage_time, double pulse_duration) {
  require_positive(storage_time, "time_bandwidth_product: storage time");
  require_positive(pulse_duration, "time_bandwidth_product: pulse duration");
  return storage_time / pulse_duration;
}

double propagation_transmission(double length, double loss_db_per_m) {
  if (!(length >= 0.0) || !(loss_db_per_m >= 0.0)) throw DomainError("propagation_transmission: negative input");
  return std::pow(10.0, -length * loss_db_per_m / 10.0);
}

const ReportLine& FeasibilityReport::line(const std::string& name) const {
  for (const auto& l : lines)
    if (l.name == name) return l;
  throw InvariantError(name, "no such report line");
}

std::string FeasibilityReport::to_text() const {
  std::ostringstream out;
  out << "Raman memory feasibility: " << (feasible ? "feasible" : "infeasible") << '\n';
  for (const auto& l : lines) {
    out << "  " << l.name << " = " << format_value(l.value);
    if (!l.unit.empty()) out << ' ' << l.unit;
    if (l.pass) out << (*l.pass ? "  [pass]" : "  [FAIL]");
    out << "  (" << l.source << ')';
    if (!l.note.empty()) out << "  " << l.note;
    out << '\n';
  }
  for (const auto& c : failing_conditions) out << "failing: " << c << '\n';
  for (const auto& w : warnings) out << "warning: " << w << '\n';
  return out.str();
}

FeasibilityReport feasibility_report(const FeasibilityInputs& in) {
  std::vector<std::string> missing;
  if (!in.budget) missing.push_back("budget");
  if (!in.geometry) missing.push_back("geometry");
  if (!in.coupling_efficiency) missing.push_back("coupling_efficiency");
  if (in.budget) {
    const auto& b = *in.budget;
    if (!b.od && !b.effective_od) missing.push_back("budget.od or budget.effective_od");
    if (!(b.homogeneous_gamma > 0.0)) missing.push_back("budget.homogeneous_gamma");
    if (!(b.inhomogeneous_gamma > 0.0)) missing.push_back("budget.inhomogeneous_gamma");
    if (!(b.bandwidth_delta > 0.0)) missing.push_back("budget.bandwidth_delta");
    if (!(b.detuning_Delta > 0.0)) missing.push_back("budget.detuning_Delta");
    if (!(b.pulse_duration > 0.0)) missing.push_back("budget.pulse_duration");
    if (!(b.storage_time > 0.0) && !in.transit_mean) missing.push_back("budget.storage_time or transit_mean");
  }
  if (!missing.empty()) {
    std::string msg = "feasibility_report: missing required inputs:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
  }

  const auto& b = *in.budget;
  FeasibilityReport r;
  auto add = [&](std::string name, double value, std::string unit, std::string source,
                 std::optional<bool> pass = std::nullopt, std::string note = {}) {
    r.lines.push_back({std::move(name), value, std::move(unit), std::move(source), pass, std::move(note)});
  };

  const double d = optical_depth(b);
  const double d_star =
      b.effective_od ? *b.effective_od : optical_to_effective_depth(d, b.homogeneous_gamma, b.inhomogeneous_gamma);
  add("effective_od", d_star, "", in.effective_od_source);
  add("optical_depth", d, "", b.od ? "configuration" : "effective_od x inhomogeneous / homogeneous width");

  const RamanCoupling coupling = raman_coupling(b);
  add("raman_coupling_c2", coupling.c_squared, "", "d (gamma/delta) (Omega/Delta)^2", coupling.efficient,
      "requires C^2 >= 1");
  if (!coupling.efficient) r.failing_conditions.push_back("raman_coupling_c2 < 1");
  add("omega_over_delta", coupling.omega_over_delta, "", "configuration");
  if (coupling.adiabatic_warning)
    r.warnings.push_back("Omega/Delta = " + format_value(coupling.omega_over_delta) +
                         " exceeds 0.5; the adiabatic approximation behind C^2 is doubtful");

  const OdRequirement req = required_effective_od(b.bandwidth_delta, b.inhomogeneous_gamma, in.margin, d_star);
  add("required_effective_od", req.threshold, "", "margin x delta / gamma_i",
      req.pass, "delta/gamma_i = " + format_value(req.ratio) + ", margin " + format_value(req.margin));
  if (!*req.pass) r.failing_conditions.push_back("effective_od below margin x delta / gamma_i");

  const double storage = in.transit_mean ? *in.transit_mean : b.storage_time;
  const std::string storage_source = in.transit_mean ? in.transit_source : "configuration";
  add("storage_time", storage, "s", storage_source);
  add("time_bandwidth_product", time_bandwidth_product(storage, b.pulse_duration), "",
      "storage_time / pulse_duration");
  if (in.transit_mean && in.excited_lifetime) {
    const bool ok = *in.transit_mean > *in.excited_lifetime;
    add("transit_over_lifetime", *in.transit_mean / *in.excited_lifetime, "", in.transit_source, ok,
        "transit must exceed the excited-state lifetime");
    if (!ok) r.failing_conditions.push_back("transit time below excited-state lifetime");
  }
  if (in.pump_efficiency) add("pump_efficiency", *in.pump_efficiency, "", in.pump_source);

  const auto& g = *in.geometry;
  const double propagation = propagation_transmission(g.length, g.loss_db_per_m);
  add("propagation_loss", g.length * g.loss_db_per_m, "dB", "fibre length x loss");
  add("propagation_transmission", propagation, "", "fibre length x loss");
  add("coupling_efficiency", *in.coupling_efficiency, "", "configuration");
  add("fibre_throughput", propagation * *in.coupling_efficiency, "", "propagation x coupling");

  r.feasible = r.failing_conditions.empty();
  return r;
}

}  // namespace hcf
