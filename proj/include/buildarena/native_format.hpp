// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/actions.hpp"

namespace buildarena::io {

inline constexpr int kNativeVersion = 1;

/// The document was written against a different block catalog.
struct CatalogMismatch : std::runtime_error {
    CatalogMismatch(std::string expected, std::string found);
    std::string expected;
    std::string found;
};

/// Unrecognized version, wrong format tag or a structurally broken document.
struct DocumentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::ordered_json scene_to_json(const scene::Scene& scene);
scene::Scene scene_from_json(const nlohmann::json& doc, std::shared_ptr<const catalog::Catalog> catalog,
                             scene::SceneConfig config = {});

nlohmann::ordered_json log_to_json(const std::vector<actions::LogEntry>& log);
std::vector<actions::LogEntry> log_from_json(const nlohmann::json& doc);

/// Full workbench document: scene, trajectory log and saved substructures.
/// Output is byte-identical for identical state.
std::string export_native(const actions::Workbench& bench);
std::string export_native(const scene::Scene& scene);
actions::Workbench import_native(std::string_view document, std::shared_ptr<const catalog::Catalog> catalog,
                                 scene::SceneConfig config = {});

}  // namespace buildarena::io
