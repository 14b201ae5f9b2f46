// SPDX-License-Identifier: Apache-2.0
#include "buildarena/action_types.hpp"

#include <array>

namespace buildarena {

namespace {

constexpr std::array<std::pair<ErrorCode, std::string_view>, 16> kErrorNames{{
    {ErrorCode::OverlapConflict, "OverlapConflict"},
    {ErrorCode::FaceOccupied, "FaceOccupied"},
    {ErrorCode::InvalidFace, "InvalidFace"},
    {ErrorCode::ExcessConnection, "ExcessConnection"},
    {ErrorCode::UnknownBlock, "UnknownBlock"},
    {ErrorCode::UnknownBlockType, "UnknownBlockType"},
    {ErrorCode::StartingBlockProtected, "StartingBlockProtected"},
    {ErrorCode::ConnectorSpanExceeded, "ConnectorSpanExceeded"},
    {ErrorCode::PhaseViolation, "PhaseViolation"},
    {ErrorCode::MalformedArguments, "MalformedArguments"},
    {ErrorCode::IllegalKey, "IllegalKey"},
    {ErrorCode::UnknownAction, "UnknownAction"},
    {ErrorCode::DuplicateBinding, "DuplicateBinding"},
    {ErrorCode::UnboundKey, "UnboundKey"},
    {ErrorCode::NonPositiveHold, "NonPositiveHold"},
    {ErrorCode::NegativeTime, "NegativeTime"},
}};

constexpr std::array<std::pair<ActionCategory, std::string_view>, 5> kCategoryNames{{
    {ActionCategory::build, "build"},
    {ActionCategory::refine, "refine"},
    {ActionCategory::assemble, "assemble"},
    {ActionCategory::control, "control"},
    {ActionCategory::query, "query"},
}};

}  // namespace

std::string_view to_string(ErrorCode code)
{
    for (const auto& [c, name] : kErrorNames) {
        if (c == code)
            return name;
    }
    return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name)
{
    for (const auto& [c, n] : kErrorNames) {
        if (n == name)
            return c;
    }
    return std::nullopt;
}

std::string_view to_string(ActionCategory category)
{
    for (const auto& [c, name] : kCategoryNames) {
        if (c == category)
            return name;
    }
    return "unknown";
}

std::optional<ActionCategory> category_from_string(std::string_view name)
{
    for (const auto& [c, n] : kCategoryNames) {
        if (n == name)
            return c;
    }
    return std::nullopt;
}

EngineError::EngineError(ErrorCode code, nlohmann::json context)
    : std::runtime_error(std::string(to_string(code))), code_(code), context_(std::move(context))
{
}

nlohmann::json to_json(const Action& action)
{
    nlohmann::json node = {
        {"category", to_string(action.category)},
        {"name", action.name},
        {"arguments", action.arguments},
    };
    if (!action.note.empty())
        node["note"] = action.note;
    return node;
}

Action action_from_json(const nlohmann::json& node)
{
    Action action;
    const auto category = category_from_string(node.at("category").get<std::string>());
    if (!category)
        throw std::invalid_argument("unknown action category");
    action.category = *category;
    action.name = node.at("name").get<std::string>();
    action.arguments = node.value("arguments", nlohmann::json::object());
    action.note = node.value("note", std::string());
    return action;
}

nlohmann::json to_json(const ActionResult& result)
{
    nlohmann::json node = {
        {"ok", result.ok},
        {"description", result.description},
        {"error", result.error ? nlohmann::json(std::string(to_string(*result.error))) : nlohmann::json(nullptr)},
        {"state_delta",
         {{"created_blocks", result.state_delta.created_blocks},
          {"removed_blocks", result.state_delta.removed_blocks},
          {"created_connectors", result.state_delta.created_connectors},
          {"removed_connectors", result.state_delta.removed_connectors}}},
    };
    if (result.warning)
        node["warning"] = true;
    return node;
}

ActionResult result_from_json(const nlohmann::json& node)
{
    ActionResult r;
    r.ok = node.at("ok").get<bool>();
    r.description = node.value("description", std::string());
    if (node.contains("error") && node["error"].is_string())
        r.error = error_code_from_string(node["error"].get<std::string>());
    if (node.contains("state_delta")) {
        const auto& d = node["state_delta"];
        r.state_delta.created_blocks = d.value("created_blocks", std::vector<BlockId>{});
        r.state_delta.removed_blocks = d.value("removed_blocks", std::vector<BlockId>{});
        r.state_delta.created_connectors = d.value("created_connectors", std::vector<ConnectorId>{});
        r.state_delta.removed_connectors = d.value("removed_connectors", std::vector<ConnectorId>{});
    }
    r.warning = node.value("warning", false);
    return r;
}

}  // namespace buildarena
