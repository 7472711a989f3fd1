#pragma once

#include "sfdi/scene.hpp"
#include "sfdi/transport.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>

namespace sfdi {

using Json = nlohmann::ordered_json;

/// Full explicit scene description; lengths in mm, angles in degrees.
Json scene_to_json(const SceneTemplate& scene);

/// Accepts either {"template": name, "overrides": {...}} or a full explicit scene
/// (with optional "overrides" applied on top).
SceneTemplate scene_from_json(const Json& j);

SceneTemplate load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneTemplate& scene);

Json settings_to_json(const RenderSettings& s);
RenderSettings settings_from_json(const Json& j, RenderSettings base = {});

ParameterSet parameters_from_json(const Json& j);
Json parameters_to_json(const ParameterSet& p);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sfdi
