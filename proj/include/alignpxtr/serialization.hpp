#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"

#include "alignpxtr/bias.hpp"

namespace alignpxtr {

nlohmann::json bias_spec_to_json(const BiasSpec& spec);
BiasSpec bias_spec_from_json(const nlohmann::json& doc);

/// Member access that reports the missing field by name.
const nlohmann::json& require_field(const nlohmann::json& doc, std::string_view field);

/// Checks the format_version and artifact tag of a document.
void check_artifact(const nlohmann::json& doc, std::string_view artifact);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with sorted keys; numbers use shortest round-trip text.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace alignpxtr
