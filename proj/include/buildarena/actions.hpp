// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "buildarena/action_types.hpp"
#include "buildarena/scene.hpp"

namespace buildarena::actions {

struct LogEntry {
    Action action;
    ActionResult result;
};

/// Category an operation name is registered under (review_control_config is listed under
/// control and also accepted as a query).
std::optional<ActionCategory> registered_category(std::string_view name);
bool accepts(ActionCategory category, std::string_view name);
std::vector<std::string> registered_names(ActionCategory category);

/// The active scene, its append-only trajectory log and the named substructures saved
/// during the session.
class Workbench {
public:
    explicit Workbench(std::shared_ptr<const catalog::Catalog> catalog, scene::SceneConfig config = {});

    /// Validates, dispatches and logs. Failed actions leave the scene untouched.
    ActionResult apply(const Action& action);

    const scene::Scene& scene() const { return scene_; }
    const std::vector<LogEntry>& log() const { return log_; }
    const std::map<std::string, scene::Scene>& substructures() const { return substructures_; }

    /// Used by document import; replaces everything.
    void restore(scene::Scene scene, std::vector<LogEntry> log, std::map<std::string, scene::Scene> substructures);

private:
    ActionResult dispatch(const Action& action);

    scene::Scene scene_;
    std::vector<LogEntry> log_;
    std::map<std::string, scene::Scene> substructures_;
};

/// Replays the actions of a log on a fresh workbench.
Workbench replay(const std::vector<LogEntry>& log, std::shared_ptr<const catalog::Catalog> catalog,
                 scene::SceneConfig config = {});

/// Resolves a block reference: integer id, "#id", a numeric string or a unique note fragment.
BlockId resolve_block(const scene::Scene& scene, const nlohmann::json& ref);

inline Action make_action(ActionCategory category, std::string name, nlohmann::json arguments = nlohmann::json::object())
{
    return Action{category, std::move(name), std::move(arguments), {}};
}

}  // namespace buildarena::actions
