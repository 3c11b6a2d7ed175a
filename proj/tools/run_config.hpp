#pragma once

#include "chfront/simulator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace chfront::cli {

using nlohmann::json;

/// Only "m" is required. Unknown keys and wrong types raise
/// Error{ConfigError} naming the field.
SimConfig sim_config_from_json(const json& j);
json to_json(const SimConfig& cfg);

/// Parses a config file. A manifest is accepted too: its "config" member is
/// returned. Parse errors carry the line and column.
json read_config_file(const std::filesystem::path& file);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const json& config);

/// Creates `dir` and writes dir/manifest.json via a temporary file and a
/// rename, so a manifest is either absent or complete.
void write_manifest(const std::filesystem::path& dir, const std::string& command, const json& config,
                    std::uint64_t seed);

/// Whole-file write through a temporary and a rename.
void write_text_atomic(const std::filesystem::path& file, const std::string& text);

}  // namespace chfront::cli
