// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "buildarena/actions.hpp"
#include "buildarena/evaluate.hpp"
#include "buildarena/task_config.hpp"

namespace buildarena::workflow {

enum class EntityName { planner, drafter, reviewer, builder, guidance, controller };
std::string_view to_string(EntityName name);
std::optional<EntityName> entity_from_string(std::string_view name);
inline constexpr EntityName kAllEntities[] = {EntityName::planner, EntityName::drafter, EntityName::reviewer,
                                              EntityName::builder, EntityName::guidance, EntityName::controller};

struct Entity {
    EntityName name = EntityName::planner;
    /// System prompt with the block list substituted.
    std::string prompt;
    int turn_budget = 1;
};

/// Raw prompt asset as shipped, placeholders intact.
std::string prompt_asset(EntityName name);
/// Prompt with `{available_blks}` filled in from the catalog.
Entity make_entity(EntityName name, const catalog::Catalog& catalog, int turn_budget);

enum class RunPhase { plan, draft_review, build_guidance, done, failed };
std::string_view to_string(RunPhase phase);

enum class FailureReason { format, budget, rejection, backend };
std::string_view to_string(FailureReason reason);

enum class WorkflowErrorCode { FormatViolation, LoopBudgetExceeded, MalformedToolCall, BackendError, Rejected };
std::string_view to_string(WorkflowErrorCode code);

struct WorkflowError : std::runtime_error {
    WorkflowError(WorkflowErrorCode code, const std::string& detail);
    WorkflowErrorCode code;
};

struct Message {
    /// system, user, assistant or tool.
    std::string role;
    EntityName entity = EntityName::planner;
    std::string content;
    long long input_tokens = 0;
    long long output_tokens = 0;
};

struct Reply {
    std::string content;
    long long input_tokens = 0;
    long long output_tokens = 0;
};

class AgentBackend {
public:
    virtual ~AgentBackend() = default;
    /// Next message for `entity` given its conversation so far. Throws WorkflowError(BackendError).
    virtual Reply respond(EntityName entity, const std::vector<Message>& conversation) = 0;
};

/// Replays canned replies per entity. Exhausting a queue is a backend error unless
/// `repeat_last` is set, in which case the final reply keeps coming back.
class ScriptedBackend : public AgentBackend {
public:
    ScriptedBackend() = default;
    /// {"usage": {"input": n, "output": n}, "repeat_last": bool, "planner": [...], ...}.
    /// Each reply is a string or {"content", "input_tokens", "output_tokens"}.
    static ScriptedBackend from_json(const nlohmann::json& script);

    void push(EntityName entity, Reply reply);
    void push(EntityName entity, std::string content);
    void set_default_usage(long long input_tokens, long long output_tokens);
    void set_repeat_last(bool repeat) { repeat_last_ = repeat; }

    Reply respond(EntityName entity, const std::vector<Message>& conversation) override;
    std::size_t remaining(EntityName entity) const;

private:
    std::map<EntityName, std::deque<Reply>> queues_;
    std::map<EntityName, Reply> last_;
    long long default_input_ = 0;
    long long default_output_ = 0;
    bool repeat_last_ = false;
};

struct WorkflowOptions {
    int max_rounds = 5;
    int max_turns = 120;
    /// Attempts per turn when the output has the wrong shape (first try included).
    int format_attempts = 2;
    scene::SceneConfig scene_config;
};

struct WorkflowRun {
    WorkflowRun(tasks::TaskConfig task, std::shared_ptr<const catalog::Catalog> catalog, WorkflowOptions options = {});

    tasks::TaskConfig task;
    WorkflowOptions options;
    RunPhase phase = RunPhase::plan;
    std::vector<Message> transcript;
    actions::Workbench bench;
    std::string plan;
    std::string blueprint;
    std::string machine_file;
    std::optional<FailureReason> failure_reason;
    std::optional<WorkflowErrorCode> failure_code;
    std::string failure_detail;
    int draft_rounds = 0;
    int build_turns = 0;

    const scene::Scene& scene() const { return bench.scene(); }
};

std::string run_plan_phase(WorkflowRun& run, AgentBackend& backend);
std::string run_draft_review_loop(WorkflowRun& run, AgentBackend& backend);
const scene::Scene& run_build_guidance_loop(WorkflowRun& run, AgentBackend& backend);
const control::ControlState& run_controller_phase(WorkflowRun& run, AgentBackend& backend);

/// Runs every phase in order and stops at the first failure; never throws WorkflowError.
WorkflowRun run_workflow(const tasks::TaskConfig& task, std::shared_ptr<const catalog::Catalog> catalog,
                         AgentBackend& backend, WorkflowOptions options = {});

evaluate::CostCounters account_costs(const WorkflowRun& run);
/// Cumulative counters after each transcript message.
std::vector<evaluate::CostCounters> cost_prefixes(const WorkflowRun& run);

/// One JSON object per line.
std::string transcript_jsonl(const std::vector<Message>& transcript);
std::string transcript_hash(const std::vector<Message>& transcript);

/// Content between the first `<building_plan>` and its closing tag, envelope included.
std::optional<std::string> extract_building_plan(std::string_view text);

struct ToolCall {
    std::string name;
    nlohmann::json arguments;
};

/// Tool calls found in a Builder message. Throws WorkflowError(MalformedToolCall) for a
/// broken envelope.
std::vector<ToolCall> parse_tool_calls(std::string_view text);

/// JSON document from a ```json fence, or the whole text when there is no fence.
std::optional<nlohmann::json> extract_json_document(std::string_view text);

/// Installs a control_config/control_sequence document into a copy of `state`.
/// Throws EngineError for illegal keys, unknown actions or unbound keys and
/// WorkflowError(FormatViolation) for structural problems.
control::ControlState install_control_document(const scene::Scene& scene, const nlohmann::json& document);

}  // namespace buildarena::workflow
