// SPDX-License-Identifier: Apache-2.0
#include "buildarena/workflow.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "buildarena/describe.hpp"
#include "buildarena/hash.hpp"
#include "buildarena/machine_file.hpp"

namespace buildarena::workflow {

namespace {

using json = nlohmann::json;

constexpr std::string_view kTerminate = "TERMINATE";
constexpr std::string_view kRejectDraft = "REJECT_DRAFT";

bool contains(std::string_view text, std::string_view token) { return text.find(token) != std::string_view::npos; }

std::string block_names(const catalog::Catalog& catalog)
{
    std::string out;
    for (const auto& id : catalog.type_ids()) {
        if (id == "StartingBlock")
            continue;
        out += (out.empty() ? "" : ", ") + id;
    }
    return out;
}

std::string block_descriptions(const catalog::Catalog& catalog)
{
    std::string out;
    for (const auto& id : catalog.type_ids()) {
        if (id == "StartingBlock")
            continue;
        if (!out.empty())
            out += "\n\n";
        out += catalog::describe_block_type(catalog, id);
    }
    return out;
}

std::string replace_all(std::string text, std::string_view from, const std::string& to)
{
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size()))
        text.replace(pos, from.size(), to);
    return text;
}

/// Per-run conversation bookkeeping; every message also lands in the shared transcript.
class Session {
public:
    Session(WorkflowRun& run, AgentBackend& backend) : run_(run), backend_(backend) {}

    void system(EntityName entity)
    {
        if (conversations_.count(entity))
            return;
        const auto e = make_entity(entity, run_.scene().catalog(), 1);
        append(entity, {"system", entity, e.prompt, 0, 0});
    }

    void user(EntityName entity, std::string content) { append(entity, {"user", entity, std::move(content), 0, 0}); }
    void tool(EntityName entity, std::string content) { append(entity, {"tool", entity, std::move(content), 0, 0}); }

    std::string call(EntityName entity)
    {
        Reply reply;
        try {
            reply = backend_.respond(entity, conversations_[entity]);
        } catch (const WorkflowError& e) {
            fail(FailureReason::backend, WorkflowErrorCode::BackendError, e.what());
        } catch (const std::exception& e) {
            fail(FailureReason::backend, WorkflowErrorCode::BackendError, e.what());
        }
        append(entity, {"assistant", entity, reply.content, reply.input_tokens, reply.output_tokens});
        return reply.content;
    }

    [[noreturn]] void fail(FailureReason reason, WorkflowErrorCode code, const std::string& detail)
    {
        run_.phase = RunPhase::failed;
        run_.failure_reason = reason;
        run_.failure_code = code;
        run_.failure_detail = detail;
        throw WorkflowError(code, detail);
    }

private:
    void append(EntityName entity, Message message)
    {
        conversations_[entity].push_back(message);
        run_.transcript.push_back(std::move(message));
    }

    WorkflowRun& run_;
    AgentBackend& backend_;
    std::map<EntityName, std::vector<Message>> conversations_;
};

void require_phase(WorkflowRun& run, RunPhase expected, std::string_view operation)
{
    if (run.phase != expected) {
        throw std::logic_error(fmt::format("{} needs phase {}, run is in {}", operation, to_string(expected),
                                           to_string(run.phase)));
    }
}

double number_field(const json& entry, const char* key)
{
    if (!entry.contains(key))
        throw WorkflowError(WorkflowErrorCode::FormatViolation, fmt::format("control_sequence entry lacks '{}'", key));
    const json& v = entry.at(key);
    if (v.is_number())
        return v.get<double>();
    if (v.is_string()) {
        try {
            std::size_t used = 0;
            const double d = std::stod(v.get<std::string>(), &used);
            if (used == v.get<std::string>().size())
                return d;
        } catch (const std::exception&) {
        }
    }
    throw WorkflowError(WorkflowErrorCode::FormatViolation, fmt::format("control_sequence '{}' must be a number", key));
}

std::string string_field(const json& entry, const char* key, const char* where)
{
    if (!entry.contains(key) || !entry.at(key).is_string())
        throw WorkflowError(WorkflowErrorCode::FormatViolation, fmt::format("{} entry needs a string '{}'", where, key));
    return entry.at(key).get<std::string>();
}

struct ControlDocument {
    std::vector<control::KeyBinding> bindings;
    std::vector<control::ControlSequenceEntry> sequence;
};

ControlDocument parse_control_document(const scene::Scene& scene, const json& doc)
{
    if (!doc.is_object() || !doc.contains("control_config") || !doc.at("control_config").is_array() ||
        !doc.contains("control_sequence") || !doc.at("control_sequence").is_array())
        throw WorkflowError(WorkflowErrorCode::FormatViolation,
                            "the document needs control_config and control_sequence lists");
    ControlDocument out;
    for (const auto& b : doc.at("control_config")) {
        if (!b.is_object() || !b.contains("block_id"))
            throw WorkflowError(WorkflowErrorCode::FormatViolation, "control_config entry needs a block_id");
        out.bindings.push_back({string_field(b, "key", "control_config"), string_field(b, "action", "control_config"),
                                actions::resolve_block(scene, b.at("block_id"))});
    }
    for (const auto& e : doc.at("control_sequence")) {
        if (!e.is_object())
            throw WorkflowError(WorkflowErrorCode::FormatViolation, "control_sequence entries must be objects");
        out.sequence.push_back({number_field(e, "time"), string_field(e, "key", "control_sequence"),
                                number_field(e, "hold_for"), e.value("motion_action", std::string())});
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(EntityName name)
{
    switch (name) {
    case EntityName::planner: return "Planner";
    case EntityName::drafter: return "Drafter";
    case EntityName::reviewer: return "Reviewer";
    case EntityName::builder: return "Builder";
    case EntityName::guidance: return "Guidance";
    case EntityName::controller: return "Controller";
    }
    return "?";
}

std::optional<EntityName> entity_from_string(std::string_view name)
{
    for (EntityName e : kAllEntities) {
        const auto canonical = to_string(e);
        if (canonical.size() == name.size() &&
            std::equal(canonical.begin(), canonical.end(), name.begin(),
                       [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b)); }))
            return e;
    }
    return std::nullopt;
}

std::string_view to_string(RunPhase phase)
{
    switch (phase) {
    case RunPhase::plan: return "plan";
    case RunPhase::draft_review: return "draft_review";
    case RunPhase::build_guidance: return "build_guidance";
    case RunPhase::done: return "done";
    case RunPhase::failed: return "failed";
    }
    return "?";
}

std::string_view to_string(FailureReason reason)
{
    switch (reason) {
    case FailureReason::format: return "format";
    case FailureReason::budget: return "budget";
    case FailureReason::rejection: return "rejection";
    case FailureReason::backend: return "backend";
    }
    return "?";
}

std::string_view to_string(WorkflowErrorCode code)
{
    switch (code) {
    case WorkflowErrorCode::FormatViolation: return "FormatViolation";
    case WorkflowErrorCode::LoopBudgetExceeded: return "LoopBudgetExceeded";
    case WorkflowErrorCode::MalformedToolCall: return "MalformedToolCall";
    case WorkflowErrorCode::BackendError: return "BackendError";
    case WorkflowErrorCode::Rejected: return "Rejected";
    }
    return "?";
}

WorkflowError::WorkflowError(WorkflowErrorCode c, const std::string& detail)
    : std::runtime_error(fmt::format("{}: {}", to_string(c), detail)), code(c)
{
}

std::string prompt_asset(EntityName name)
{
    std::string file(to_string(name));
    std::transform(file.begin(), file.end(), file.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto path = catalog::asset_dir() / "prompts" / (file + ".txt");
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error(fmt::format("prompt asset {} is missing", path.string()));
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

Entity make_entity(EntityName name, const catalog::Catalog& catalog, int turn_budget)
{
    if (turn_budget <= 0)
        throw std::invalid_argument("entity turn budget must be positive");
    const bool long_form = name == EntityName::planner || name == EntityName::controller;
    return {name, replace_all(prompt_asset(name), "{available_blks}",
                              long_form ? block_descriptions(catalog) : block_names(catalog)),
            turn_budget};
}

// ---------------------------------------------------------------------------
// Scripted backend

ScriptedBackend ScriptedBackend::from_json(const json& script)
{
    ScriptedBackend backend;
    if (!script.is_object())
        throw std::invalid_argument("a backend script must be a JSON object");
    if (script.contains("usage"))
        backend.set_default_usage(script["usage"].value("input", 0LL), script["usage"].value("output", 0LL));
    backend.set_repeat_last(script.value("repeat_last", false));
    for (EntityName e : kAllEntities) {
        std::string key(to_string(e));
        std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (!script.contains(key))
            continue;
        for (const auto& item : script.at(key)) {
            if (item.is_string()) {
                backend.push(e, item.get<std::string>());
            } else {
                backend.push(e, Reply{item.at("content").get<std::string>(),
                                      item.value("input_tokens", backend.default_input_),
                                      item.value("output_tokens", backend.default_output_)});
            }
        }
    }
    return backend;
}

void ScriptedBackend::push(EntityName entity, Reply reply) { queues_[entity].push_back(std::move(reply)); }

void ScriptedBackend::push(EntityName entity, std::string content)
{
    push(entity, Reply{std::move(content), default_input_, default_output_});
}

void ScriptedBackend::set_default_usage(long long input_tokens, long long output_tokens)
{
    default_input_ = input_tokens;
    default_output_ = output_tokens;
}

Reply ScriptedBackend::respond(EntityName entity, const std::vector<Message>&)
{
    auto& queue = queues_[entity];
    if (queue.empty()) {
        if (repeat_last_ && last_.count(entity))
            return last_.at(entity);
        throw WorkflowError(WorkflowErrorCode::BackendError, fmt::format("script for {} is exhausted", to_string(entity)));
    }
    Reply reply = std::move(queue.front());
    queue.pop_front();
    last_[entity] = reply;
    return reply;
}

std::size_t ScriptedBackend::remaining(EntityName entity) const
{
    const auto it = queues_.find(entity);
    return it == queues_.end() ? 0 : it->second.size();
}

// ---------------------------------------------------------------------------
// Envelopes

std::optional<std::string> extract_building_plan(std::string_view text)
{
    constexpr std::string_view open = "<building_plan>";
    constexpr std::string_view close = "</building_plan>";
    const auto begin = text.find(open);
    if (begin == std::string_view::npos)
        return std::nullopt;
    const auto end = text.find(close, begin + open.size());
    if (end == std::string_view::npos)
        return std::nullopt;
    return std::string(text.substr(begin, end + close.size() - begin));
}

std::vector<ToolCall> parse_tool_calls(std::string_view text)
{
    constexpr std::string_view open = "<tool_call>";
    constexpr std::string_view close = "</tool_call>";
    std::vector<ToolCall> calls;
    std::size_t pos = 0;
    while (true) {
        const auto begin = text.find(open, pos);
        const auto stray = text.find(close, pos);
        if (begin == std::string_view::npos) {
            if (stray != std::string_view::npos)
                throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "closing </tool_call> without an opening tag");
            break;
        }
        if (stray < begin)
            throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "closing </tool_call> without an opening tag");
        const auto end = text.find(close, begin + open.size());
        if (end == std::string_view::npos)
            throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "<tool_call> is never closed");
        const auto body = text.substr(begin + open.size(), end - begin - open.size());
        json doc;
        try {
            doc = json::parse(body);
        } catch (const json::parse_error&) {
            throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "the tool call body is not valid JSON");
        }
        if (!doc.is_object() || !doc.contains("name") || !doc["name"].is_string())
            throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "a tool call needs a string \"name\"");
        json args = doc.value("arguments", json::object());
        if (!args.is_object())
            throw WorkflowError(WorkflowErrorCode::MalformedToolCall, "tool call \"arguments\" must be an object");
        calls.push_back({doc["name"].get<std::string>(), std::move(args)});
        pos = end + close.size();
    }
    return calls;
}

std::optional<json> extract_json_document(std::string_view text)
{
    std::string_view body = text;
    if (const auto fence = text.find("```json"); fence != std::string_view::npos) {
        const auto start = fence + 7;
        const auto end = text.find("```", start);
        body = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    }
    const json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded())
        return std::nullopt;
    return doc;
}

control::ControlState install_control_document(const scene::Scene& scene, const json& document)
{
    const auto parsed = parse_control_document(scene, document);
    control::ControlState state = scene.control();
    for (const auto& b : parsed.bindings)
        state.bind_key(b.key, b.action, b.block_id, scene.spec_of(b.block_id).control_actions);
    for (const auto& e : parsed.sequence)
        state.add_control_sequence(e.time, e.key, e.hold_for, e.motion_note);
    return state;
}

// ---------------------------------------------------------------------------
// Phases

WorkflowRun::WorkflowRun(tasks::TaskConfig task_config, std::shared_ptr<const catalog::Catalog> catalog,
                         WorkflowOptions opts)
    : task(std::move(task_config)), options(opts), bench(std::move(catalog), opts.scene_config)
{
    if (options.max_rounds <= 0 || options.max_turns <= 0 || options.format_attempts <= 0)
        throw std::invalid_argument("workflow budgets must be positive");
}

std::string run_plan_phase(WorkflowRun& run, AgentBackend& backend)
{
    require_phase(run, RunPhase::plan, "run_plan_phase");
    Session s(run, backend);
    s.system(EntityName::planner);
    s.user(EntityName::planner, run.task.prompt);
    for (int attempt = 1; attempt <= run.options.format_attempts; ++attempt) {
        const std::string reply = s.call(EntityName::planner);
        if (auto plan = extract_building_plan(reply)) {
            run.plan = std::move(*plan);
            run.phase = RunPhase::draft_review;
            return run.plan;
        }
        if (attempt < run.options.format_attempts)
            s.user(EntityName::planner, "FormatViolation: the plan must be wrapped in <building_plan> ... </building_plan>. "
                                        "Reply again with the complete plan in that format.");
    }
    s.fail(FailureReason::format, WorkflowErrorCode::FormatViolation,
           fmt::format("no <building_plan> envelope after {} attempt(s)", run.options.format_attempts));
}

std::string run_draft_review_loop(WorkflowRun& run, AgentBackend& backend)
{
    require_phase(run, RunPhase::draft_review, "run_draft_review_loop");
    Session s(run, backend);
    s.system(EntityName::drafter);
    s.system(EntityName::reviewer);
    s.user(EntityName::drafter, fmt::format("{}\n\n{}", run.task.prompt, run.plan));
    for (int round = 1; round <= run.options.max_rounds; ++round) {
        run.draft_rounds = round;
        const std::string draft = s.call(EntityName::drafter);
        s.user(EntityName::reviewer, fmt::format("Building plan:\n{}\n\nDraft, round {}:\n{}", run.plan, round, draft));
        const std::string review = s.call(EntityName::reviewer);
        if (contains(review, kTerminate)) {
            run.blueprint = draft;
            run.phase = RunPhase::build_guidance;
            return run.blueprint;
        }
        s.user(EntityName::drafter, fmt::format("Reviewer feedback:\n{}", review));
    }
    s.fail(FailureReason::budget, WorkflowErrorCode::LoopBudgetExceeded,
           fmt::format("no approval within {} draft/review round(s)", run.options.max_rounds));
}

const scene::Scene& run_build_guidance_loop(WorkflowRun& run, AgentBackend& backend)
{
    require_phase(run, RunPhase::build_guidance, "run_build_guidance_loop");
    Session s(run, backend);
    s.system(EntityName::guidance);
    s.system(EntityName::builder);
    s.user(EntityName::guidance, fmt::format("{}\n\nApproved blueprint:\n{}", run.task.prompt, run.blueprint));

    for (int turn = 1; turn <= run.options.max_turns; ++turn) {
        run.build_turns = turn;
        const std::string instruction = s.call(EntityName::guidance);
        if (contains(instruction, kRejectDraft))
            s.fail(FailureReason::rejection, WorkflowErrorCode::Rejected, "Guidance rejected the draft");
        if (contains(instruction, kTerminate)) {
            if (run.scene().phase() != scene::Phase::finalized) {
                const auto r = run.bench.apply(actions::make_action(ActionCategory::assemble, "finalize"));
                if (!r.ok) {
                    s.tool(EntityName::builder, r.description);
                    s.fail(FailureReason::rejection, WorkflowErrorCode::Rejected,
                           "completion confirmed on a machine that cannot be finalized: " + r.description);
                }
            }
            run.machine_file = io::export_machine_file(run.scene(), run.task.name());
            if (!run.task.requires_controller)
                run.phase = RunPhase::done;
            return run.scene();
        }

        s.user(EntityName::builder, instruction);
        std::vector<ToolCall> calls;
        std::string reply;
        for (int attempt = 1;; ++attempt) {
            reply = s.call(EntityName::builder);
            std::string problem;
            try {
                calls = parse_tool_calls(reply);
                if (calls.size() > 1)
                    problem = fmt::format("{} tool calls in one reply; parallel tool calls are not allowed", calls.size());
            } catch (const WorkflowError& e) {
                problem = e.what();
            }
            if (problem.empty())
                break;
            if (attempt >= run.options.format_attempts)
                s.fail(FailureReason::format, WorkflowErrorCode::MalformedToolCall, problem);
            s.user(EntityName::builder, fmt::format("MalformedToolCall: {}. Make exactly one tool call.", problem));
        }

        if (calls.empty()) {
            s.user(EntityName::guidance, fmt::format("Builder reply:\n{}", reply));
            continue;
        }
        const ToolCall& call = calls.front();
        const auto category = actions::registered_category(call.name).value_or(ActionCategory::query);
        const ActionResult result = run.bench.apply(Action{category, call.name, call.arguments, {}});
        s.tool(EntityName::builder, result.description);
        s.user(EntityName::guidance, fmt::format("Builder reply:\n{}\n\nTool result for {}:\n{}", reply, call.name,
                                                 result.description));
    }
    s.fail(FailureReason::budget, WorkflowErrorCode::LoopBudgetExceeded,
           fmt::format("no completion within {} build turn(s)", run.options.max_turns));
}

const control::ControlState& run_controller_phase(WorkflowRun& run, AgentBackend& backend)
{
    require_phase(run, RunPhase::build_guidance, "run_controller_phase");
    if (run.scene().phase() != scene::Phase::finalized)
        throw std::logic_error("run_controller_phase needs a finalized scene");
    Session s(run, backend);
    s.system(EntityName::controller);
    s.user(EntityName::controller,
           fmt::format("{}\n\nMachine summary:\n{}", run.task.prompt, describe::machine_summary(run.scene())));

    std::string problem;
    for (int attempt = 1; attempt <= run.options.format_attempts; ++attempt) {
        const std::string reply = s.call(EntityName::controller);
        try {
            const auto doc = extract_json_document(reply);
            if (!doc)
                throw WorkflowError(WorkflowErrorCode::FormatViolation, "no JSON control document found");
            install_control_document(run.scene(), *doc);
            const auto parsed = parse_control_document(run.scene(), *doc);
            for (const auto& b : parsed.bindings) {
                run.bench.apply(actions::make_action(ActionCategory::control, "bind_key",
                                                     {{"key", b.key}, {"action", b.action}, {"block", b.block_id}}));
            }
            for (const auto& e : parsed.sequence) {
                const auto r = run.bench.apply(actions::make_action(
                    ActionCategory::control, "add_control_sequence",
                    {{"time", e.time}, {"key", e.key}, {"hold_for", e.hold_for}, {"motion_action", e.motion_note}}));
                if (r.warning)
                    s.tool(EntityName::controller, r.description);
            }
            run.machine_file = io::export_machine_file(run.scene(), run.task.name());
            run.phase = RunPhase::done;
            return run.scene().control();
        } catch (const WorkflowError& e) {
            problem = e.what();
        } catch (const EngineError& e) {
            problem = describe::error_message(e.code(), e.context(), &run.scene());
        }
        if (attempt < run.options.format_attempts)
            s.user(EntityName::controller, problem);
    }
    s.fail(FailureReason::format, WorkflowErrorCode::FormatViolation, problem);
}

WorkflowRun run_workflow(const tasks::TaskConfig& task, std::shared_ptr<const catalog::Catalog> catalog,
                         AgentBackend& backend, WorkflowOptions options)
{
    WorkflowRun run(task, std::move(catalog), options);
    try {
        run_plan_phase(run, backend);
        run_draft_review_loop(run, backend);
        run_build_guidance_loop(run, backend);
        if (task.requires_controller)
            run_controller_phase(run, backend);
    } catch (const WorkflowError&) {
        // The failing phase already recorded the reason on the run.
    } catch (const std::exception& e) {
        run.phase = RunPhase::failed;
        run.failure_reason = FailureReason::backend;
        run.failure_code = WorkflowErrorCode::BackendError;
        run.failure_detail = e.what();
    }
    return run;
}

// ---------------------------------------------------------------------------
// Accounting and persistence

evaluate::CostCounters account_costs(const WorkflowRun& run)
{
    const auto prefixes = cost_prefixes(run);
    return prefixes.empty() ? evaluate::CostCounters{} : prefixes.back();
}

std::vector<evaluate::CostCounters> cost_prefixes(const WorkflowRun& run)
{
    std::vector<evaluate::CostCounters> out;
    evaluate::CostCounters total;
    for (const auto& m : run.transcript) {
        if (m.role == "assistant")
            total += {m.input_tokens, m.output_tokens, 1};
        out.push_back(total);
    }
    return out;
}

std::string transcript_jsonl(const std::vector<Message>& transcript)
{
    std::string out;
    for (std::size_t i = 0; i < transcript.size(); ++i) {
        const auto& m = transcript[i];
        nlohmann::ordered_json line{{"index", i},
                                    {"entity", to_string(m.entity)},
                                    {"role", m.role},
                                    {"content", m.content},
                                    {"input_tokens", m.input_tokens},
                                    {"output_tokens", m.output_tokens}};
        out += line.dump() + "\n";
    }
    return out;
}

std::string transcript_hash(const std::vector<Message>& transcript)
{
    Hasher h;
    h.str(transcript_jsonl(transcript));
    return h.hex();
}

}  // namespace buildarena::workflow
