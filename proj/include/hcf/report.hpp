#ifndef HCF_REPORT_HPP
#define HCF_REPORT_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hcf/least_squares.hpp"
#include "hcf/memory_metrics.hpp"
#include "hcf/pump_transit.hpp"

namespace hcf {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL);
std::string digest_hex(std::uint64_t digest);

/// Non-finite values become null.
nlohmann::json json_number(double value);

nlohmann::json to_json(const FitResult& result);
nlohmann::json to_json(const TransitStats& stats);
nlohmann::json to_json(const std::vector<EfficiencyPoint>& sweep);
nlohmann::json to_json(const FeasibilityReport& report);

/*
 * Wraps a body in the versioned report envelope:
 *   { schema_version, kind, tool_version, input_digest, timestamp, result }
 * `timestamp` is the only field that differs between identical runs.
 */
nlohmann::json report_envelope(std::string_view kind, nlohmann::json result, std::string_view input_digest);

/// UTC, ISO 8601, second resolution.
std::string utc_timestamp();

/// Throws ParseError unless `report` is an envelope of the expected kind and schema.
const nlohmann::json& report_result(const nlohmann::json& report, std::string_view expected_kind);

}  // namespace hcf

#endif  // HCF_REPORT_HPP
