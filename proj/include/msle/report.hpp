#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "msle/loewner.hpp"
#include "msle/perturbation.hpp"

namespace msle {

using json = nlohmann::ordered_json;

// Shortest round-trip formatting; identical across runs and worker counts.
std::string format_double(double v);

// Atomic writes: temp file in the target directory, then rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);
void write_json_atomic(const std::filesystem::path& path, const json& j);

// CSV with a fixed header; one row per entry of `rows`.
void write_csv(const std::filesystem::path& path, const std::string& header,
               const std::vector<std::vector<double>>& rows);

json to_json(const Summary& s);
json to_json(const BoundReport& r);
json to_json(const TailReport& r);
json to_json(const InitPerturbResult& r);
json to_json(const KappaPerturbResult& r);

// CSV dumps named by the external interfaces.
void write_forces_csv(const std::filesystem::path& path, const DrivingForces& forces);
void write_trajectory_csv(const std::filesystem::path& path, const MapTrajectory& traj,
                          const TimeGrid& grid);
void write_trace_csv(const std::filesystem::path& path, const Trace& trace);

} // namespace msle
