// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/math.hpp"

namespace buildarena {

/// Engine failure classes. Every code has a fixed prose template (see describe.hpp).
enum class ErrorCode {
    OverlapConflict,
    FaceOccupied,
    InvalidFace,
    ExcessConnection,
    UnknownBlock,
    UnknownBlockType,
    StartingBlockProtected,
    ConnectorSpanExceeded,
    PhaseViolation,
    MalformedArguments,
    // control
    IllegalKey,
    UnknownAction,
    DuplicateBinding,
    UnboundKey,
    NonPositiveHold,
    NegativeTime,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view name);
inline constexpr ErrorCode kAllErrorCodes[] = {
    ErrorCode::OverlapConflict,  ErrorCode::FaceOccupied,        ErrorCode::InvalidFace,
    ErrorCode::ExcessConnection, ErrorCode::UnknownBlock,        ErrorCode::UnknownBlockType,
    ErrorCode::StartingBlockProtected, ErrorCode::ConnectorSpanExceeded, ErrorCode::PhaseViolation,
    ErrorCode::MalformedArguments, ErrorCode::IllegalKey,        ErrorCode::UnknownAction,
    ErrorCode::DuplicateBinding, ErrorCode::UnboundKey,          ErrorCode::NonPositiveHold,
    ErrorCode::NegativeTime,
};

enum class ActionCategory { build, refine, assemble, control, query };

std::string_view to_string(ActionCategory category);
std::optional<ActionCategory> category_from_string(std::string_view name);

/// One typed request from the agent: operation name plus a JSON argument object.
struct Action {
    ActionCategory category = ActionCategory::build;
    std::string name;
    nlohmann::json arguments = nlohmann::json::object();
    std::string note;
};

struct StateDelta {
    std::vector<BlockId> created_blocks;
    std::vector<BlockId> removed_blocks;
    std::vector<ConnectorId> created_connectors;
    std::vector<ConnectorId> removed_connectors;

    bool empty() const
    {
        return created_blocks.empty() && removed_blocks.empty() && created_connectors.empty() &&
               removed_connectors.empty();
    }
};

/// Outcome of one action. ok implies no error; a failed action leaves the scene unchanged.
struct ActionResult {
    bool ok = false;
    std::string description;
    std::optional<ErrorCode> error;
    StateDelta state_delta;
    bool warning = false;

    static ActionResult success(std::string description, StateDelta delta = {})
    {
        return ActionResult{true, std::move(description), std::nullopt, std::move(delta), false};
    }
    static ActionResult failure(ErrorCode code, std::string description)
    {
        return ActionResult{false, std::move(description), code, {}, false};
    }
};

/// Thrown by scene and control operations; `context` carries the ids and values the
/// error template needs (block, face, other_block, cap, span, ...).
class EngineError : public std::runtime_error {
public:
    EngineError(ErrorCode code, nlohmann::json context = nlohmann::json::object());
    ErrorCode code() const { return code_; }
    const nlohmann::json& context() const { return context_; }

private:
    ErrorCode code_;
    nlohmann::json context_;
};

nlohmann::json to_json(const Action& action);
Action action_from_json(const nlohmann::json& node);
nlohmann::json to_json(const ActionResult& result);
ActionResult result_from_json(const nlohmann::json& node);

}  // namespace buildarena
