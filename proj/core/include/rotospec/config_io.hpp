#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rotospec/harness.hpp"

namespace rotospec {

inline constexpr int kScenarioSchemaVersion = 1;

/// Configuration problem tied to a location in the scenario document, e.g.
/// "scenario.machines[1].rotation_speed_rpm".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Parses a scenario document (JSON, see README "Scenario files"), applies
/// defaults and validates it. Unknown keys, missing required keys, bad types
/// and unit violations raise ConfigError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::filesystem::path& path);

/// Canonical document for a scenario; every field is written explicitly.
std::string serialize_scenario(const Scenario& scenario);

enum class ResultFormat { csv, json };

std::vector<std::string> results_columns();

void write_results(std::span<const TrialResult> results, ResultFormat format,
                   std::ostream& out);
/// Writes to a file; I/O failures raise std::runtime_error naming the path.
void write_results(std::span<const TrialResult> results, ResultFormat format,
                   const std::filesystem::path& destination);

/// Reads back a CSV produced by write_results.
std::vector<TrialResult> read_results_csv(std::istream& in);

}  // namespace rotospec
