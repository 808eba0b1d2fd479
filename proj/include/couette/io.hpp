#pragma once

#include "couette/state.hpp"

#include <json.hpp>

#include <string>

namespace couette {

inline constexpr int kSchemaVersion = 1;

nlohmann::json grid_to_json(const GridSpec& g);
GridSpec grid_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const PhysParams& p);
PhysParams params_from_json(const nlohmann::json& j);

/// Self-describing checkpoint: schema version, grid, params, time and the three
/// coefficient arrays as interleaved (re, im) pairs in storage order.
nlohmann::json state_to_json(const SystemState& s);
SystemState state_from_json(const nlohmann::json& j);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace couette
