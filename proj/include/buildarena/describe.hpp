// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/action_types.hpp"
#include "buildarena/scene.hpp"

namespace buildarena::describe {

/// Raw template text by key ("error.FaceOccupied", "summary.header", ...). Throws
/// std::out_of_range for unknown keys.
std::string_view template_text(std::string_view key);
std::vector<std::string> template_keys();

/// Substitutes {name} placeholders; unknown placeholders are left as written.
std::string render(std::string_view key, const std::map<std::string, std::string>& vars);

std::string machine_summary(const scene::Scene& scene);
std::string block_detail(const scene::Scene& scene, BlockId id);
std::string free_faces_text(const scene::Scene& scene, BlockId id);

/// Fixed prose per code. The scene, when given, supplies type names and candidates.
std::string error_message(ErrorCode code, const nlohmann::json& context, const scene::Scene* scene = nullptr);

/// "#3 PoweredWheel \"left front\"".
std::string block_ref(const scene::Scene& scene, BlockId id);
/// World compass word for axis-aligned blocks, "label (id)" otherwise.
std::string face_name(const scene::Scene& scene, BlockId id, std::string_view face_id);
/// One-line functional fact for wheels, cannons and torches; empty for passive blocks.
std::string function_phrase(const scene::Scene& scene, BlockId id);
std::string direction_text(const Vec3& direction);

}  // namespace buildarena::describe
