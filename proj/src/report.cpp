#include "hcf/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>

#include "hcf/error.hpp"

namespace hcf {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) {
  for (unsigned char c : bytes) {
    state ^= c;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::string digest_hex(std::uint64_t digest) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

json json_number(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

json to_json(const FitResult& r) {
  json params = json::array();
  for (const auto& p : r.parameters)
    params.push_back({{"name", p.name},
                      {"value", json_number(p.value)},
                      {"uncertainty", json_number(p.uncertainty)},
                      {"fixed", p.fixed}});
  json derived = json::object();
  for (const auto& [name, value] : r.derived) derived[name] = json_number(value);
  return {{"model", r.model},
          {"parameters", params},
          {"derived", derived},
          {"residual_norm", json_number(r.residual_norm)},
          {"chi_square", json_number(r.chi_square)},
          {"dof", r.dof},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"gradient_criterion", r.gradient_criterion},
          {"step_criterion", r.step_criterion},
          {"solver_status", r.solver_status},
          {"weighted", r.weighted},
          {"warnings", r.warnings}};
}

json to_json(const TransitStats& s) {
  json q = json::array();
  for (double v : s.distribution_quantiles) q.push_back(json_number(v));
  return {{"mean_s", json_number(s.mean)},
          {"median_s", json_number(s.median)},
          {"standard_error_s", json_number(s.standard_error)},
          {"n_samples", s.n_samples},
          {"rng_seed", s.rng_seed},
          {"weighting", s.weighting == SpeedWeighting::flux ? "flux" : "density"},
          {"quantile_levels", s.quantile_levels},
          {"distribution_quantiles_s", q}};
}

json to_json(const std::vector<EfficiencyPoint>& sweep) {
  json out = json::array();
  for (const auto& p : sweep)
    out.push_back({{"rabi_hz", json_number(p.rabi_frequency)}, {"efficiency", json_number(p.efficiency)}});
  return out;
}

json to_json(const FeasibilityReport& r) {
  json lines = json::array();
  for (const auto& l : r.lines) {
    json j = {{"name", l.name}, {"value", json_number(l.value)}, {"unit", l.unit}, {"source", l.source}};
    j["pass"] = l.pass ? json(*l.pass) : json(nullptr);
    if (!l.note.empty()) j["note"] = l.note;
    lines.push_back(std::move(j));
  }
  return {{"verdict", r.feasible ? "feasible" : "infeasible"},
          {"feasible", r.feasible},
          {"failing_conditions", r.failing_conditions},
          {"warnings", r.warnings},
          {"lines", lines}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json report_envelope(std::string_view kind, json result, std::string_view input_digest) {
  return {{"schema_version", kReportSchemaVersion},
          {"kind", std::string(kind)},
          {"tool_version", kToolVersion},
          {"input_digest", std::string(input_digest)},
          {"timestamp", utc_timestamp()},
          {"result", std::move(result)}};
}

const json& report_result(const json& report, std::string_view expected_kind) {
  if (!report.is_object() || !report.contains("schema_version") || !report.contains("kind") ||
      !report.contains("result"))
    throw ParseError("not a report: missing schema_version, kind or result");
  if (report.at("schema_version") != kReportSchemaVersion)
    throw ParseError("unsupported report schema_version " + report.at("schema_version").dump());
  if (report.at("kind") != expected_kind)
    throw ParseError("expected a '" + std::string(expected_kind) + "' report, got " + report.at("kind").dump());
  return report.at("result");
}

}  // namespace hcf
