#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lecam/grid_path.hpp"
#include "lecam/model.hpp"
#include "lecam/rate_harness.hpp"
#include "lecam/stats.hpp"
#include "lecam/time_change.hpp"

namespace lecam {

inline constexpr const char* kToolVersion = "0.1.0";

// Configuration problems that should surface as usage errors (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form of a double (printf %.17g).
std::string format_double(double x);

// Paths: two-column CSV "time,value" with a one-line header.
void write_path_csv(const std::filesystem::path& file, const GridPath& path);
GridPath read_path_csv(const std::filesystem::path& file);

// Time-change maps: breakpoints as CSV "t,u".
void write_clock_csv(const std::filesystem::path& file, const TimeChangeMap& map);

// Rate-scan records: "quantity,n,h,nh2,estimate,stderr,bound,bound_type,seed".
void write_records_csv(const std::filesystem::path& file,
                       const std::vector<RateScanRecord>& records);

nlohmann::json model_to_json(const ModelSpec& model);
// Strict parse: unknown keys are errors; certified constants, when present,
// must match the recomputed ones.
ModelSpec model_from_json(const nlohmann::json& j);

nlohmann::json estimate_to_json(const MeanEstimate& e, double horizon);

// Rejects keys outside the allowed set (ConfigError naming the key).
void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const std::string& where);

// FNV-1a 64-bit digest, hex-encoded.
std::string content_digest(const std::string& bytes);

// Write-to-temp-then-rename so partially written outputs never appear.
void atomic_write(const std::filesystem::path& file, const std::string& contents);

}  // namespace lecam
