#pragma once

#include <string>

#include "json.hpp"

#include "frk/embed.hpp"
#include "frk/rank.hpp"
#include "frk/tiling.hpp"

namespace frk {

// Report serialization.  Every numeric is an exact rational emitted as
// numerator/denominator strings plus a fixed 12-digit decimal, so re-parsing
// reproduces the values bit-exactly and identical runs are byte-identical.

inline constexpr const char* kSchemaName = "foelner-rank/1";

nlohmann::json rational_json(const mpq_class& q);
nlohmann::json stage_json(const ReportStage& stage);
nlohmann::json report_json(const ConvergenceReport& report);
nlohmann::json defect_json(const std::string& kind, int level, const DefectReport& defect);
nlohmann::json tiling_json(const Tiling& tiling, const mpq_class& eps);
nlohmann::json bratteli_json(const BratteliTilingSystem& system, const SystemValidation& validation);
nlohmann::json first_identity_json(const FirstIdentityReport& report);

// Fixed column order: method,stage,numerator,denominator,bound,value_decimal.
std::string report_csv(const ConvergenceReport& report);

// Top-level document wrapper carrying the schema tag and run parameters.
nlohmann::json make_document(const std::string& command,
                             const std::map<std::string, std::string>& params);

}  // namespace frk
