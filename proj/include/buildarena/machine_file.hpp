// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "buildarena/scene.hpp"

namespace buildarena::io {

struct UnfinalizedScene : std::runtime_error {
    UnfinalizedScene();
};

/// Namespace URI for elements and attributes whose meaning in the game format is unconfirmed.
inline constexpr std::string_view kExtensionNamespace = "urn:buildarena:unverified";

/// Best-effort sandbox machine markup. Positions and rotations are converted to the game's
/// left-handed y-up frame. Anything without public documentation (numeric type ids other than
/// the starting block, key bindings, connectors, the control sequence) sits under the `ba:`
/// namespace. Throws UnfinalizedScene unless the scene is finalized.
std::string export_machine_file(const scene::Scene& scene, std::string_view machine_name = "machine");

/// Game-frame rotation for a right-handed z-up rotation (y and z swap, handedness flips).
Quat to_game_frame(const Quat& q);
Vec3 to_game_frame(const Vec3& v);

}  // namespace buildarena::io
