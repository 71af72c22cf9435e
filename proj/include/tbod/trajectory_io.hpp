#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tbod/plant.hpp"

namespace tbod {

/// Sidecar path for a trajectory CSV: same stem, `.json` extension.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

/// Writes `<path>` (CSV, one row per record) and its JSON sidecar. Numbers are
/// written in shortest round-trip form, so a reload is bit-exact.
void save_trajectory(const Trajectory& traj, const std::filesystem::path& csv_path);

/// Throws FormatError on malformed content and GridError on timing violations.
Trajectory load_trajectory(const std::filesystem::path& csv_path);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(const std::string& text);
/// Comma split that keeps empty cells, including a trailing one.
std::vector<std::string> split_csv_line(const std::string& line);

nlohmann::json to_json(const NoiseConfig& n);
NoiseConfig noise_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SensorSetup& s);
SensorSetup setup_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PlantState& s);
PlantState state_from_json(const nlohmann::json& j);

}  // namespace tbod
