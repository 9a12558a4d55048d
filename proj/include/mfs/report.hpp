// JSON and CSV encodings of results, versioned by schema_version.
#pragma once

#include <string>

#include "json.hpp"
#include "mfs/duality.hpp"
#include "mfs/evp.hpp"
#include "mfs/exact.hpp"
#include "mfs/gdfp.hpp"
#include "mfs/verify.hpp"

namespace mfs {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const PressureTable& table);
std::string to_csv(const PressureTable& table);

nlohmann::json to_json(const EvpSolution& sol);
nlohmann::json to_json(const GdfpSolution& sol);
nlohmann::json to_json(const SaddleAudit& audit);
nlohmann::json to_json(const VerifyReport& report);

// Two-column (x, y) data file.
std::string xy_csv(const std::string& x_name, const std::string& y_name,
                   const std::vector<std::pair<double, double>>& rows);

// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& contents);

// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace mfs
