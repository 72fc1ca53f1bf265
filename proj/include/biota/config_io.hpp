#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "biota/model.hpp"

namespace biota {

BuildingConfig parse_config(std::string_view json_text);
BuildingConfig load_config(const std::filesystem::path& path);
/// Canonical JSON rendering; stable key order and number formatting.
std::string dump_config(const BuildingConfig& config);

SensorFrame parse_frame(std::string_view json_text, const BuildingConfig& config);
SensorFrame load_frame(const std::filesystem::path& path, const BuildingConfig& config);
std::string dump_frame(const SensorFrame& frame, const BuildingConfig& config);

std::string read_text_file(const std::filesystem::path& path);

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view text);

}  // namespace biota
