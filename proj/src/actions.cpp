// SPDX-License-Identifier: Apache-2.0
#include "buildarena/actions.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "buildarena/describe.hpp"
#include "buildarena/format.hpp"

namespace buildarena::actions {

namespace {

using json = nlohmann::json;
using scene::Phase;
using scene::Scene;

struct Registration {
    std::string_view name;
    ActionCategory category;
};

constexpr std::array<Registration, 21> kRegistry{{
    {"start", ActionCategory::build},
    {"attach_block_to", ActionCategory::build},
    {"connect_blocks", ActionCategory::build},
    {"remove_block", ActionCategory::build},
    {"reset", ActionCategory::build},
    {"twist_block", ActionCategory::refine},
    {"translate_block", ActionCategory::refine},
    {"flip_block", ActionCategory::refine},
    {"begin_refine", ActionCategory::refine},
    {"begin_assemble", ActionCategory::assemble},
    {"finalize", ActionCategory::assemble},
    {"save_substructure", ActionCategory::assemble},
    {"merge_substructure", ActionCategory::assemble},
    {"bind_key", ActionCategory::control},
    {"add_control_sequence", ActionCategory::control},
    {"review_control_config", ActionCategory::control},
    {"get_machine_summary", ActionCategory::query},
    {"get_block_detail", ActionCategory::query},
    {"get_free_faces", ActionCategory::query},
    {"describe_block_type", ActionCategory::query},
    {"get_part_count", ActionCategory::query},
}};

[[noreturn]] void malformed(std::string detail)
{
    throw EngineError(ErrorCode::MalformedArguments, {{"detail", std::move(detail)}});
}

const json& need(const json& args, const char* name)
{
    if (!args.is_object() || !args.contains(name) || args.at(name).is_null())
        malformed(fmt::format("missing argument '{}'.", name));
    return args.at(name);
}

double number(const json& args, const char* name)
{
    const json& v = need(args, name);
    if (!v.is_number())
        malformed(fmt::format("argument '{}' must be a number.", name));
    const double d = v.get<double>();
    if (!std::isfinite(d))
        malformed(fmt::format("argument '{}' must be finite.", name));
    return d;
}

std::string text(const json& args, const char* name)
{
    const json& v = need(args, name);
    if (!v.is_string())
        malformed(fmt::format("argument '{}' must be a string.", name));
    return v.get<std::string>();
}

std::string optional_text(const json& args, const char* name, std::string fallback = {})
{
    if (!args.is_object() || !args.contains(name) || args.at(name).is_null())
        return fallback;
    if (!args.at(name).is_string())
        malformed(fmt::format("argument '{}' must be a string.", name));
    return args.at(name).get<std::string>();
}

Vec3 vec3(const json& args, const char* name, std::optional<Vec3> fallback = std::nullopt)
{
    if (fallback && (!args.is_object() || !args.contains(name) || args.at(name).is_null()))
        return *fallback;
    const json& v = need(args, name);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); }))
        malformed(fmt::format("argument '{}' must be a list of three numbers.", name));
    Vec3 out(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    if (!out.allFinite())
        malformed(fmt::format("argument '{}' must be finite.", name));
    return out;
}

const json& block_arg(const json& args, std::initializer_list<const char*> names)
{
    for (const char* n : names) {
        if (args.is_object() && args.contains(n) && !args.at(n).is_null())
            return args.at(n);
    }
    return need(args, *names.begin());
}

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string resolve_type(const catalog::Catalog& catalog, const std::string& name)
{
    if (catalog.contains(name))
        return name;
    for (const auto& id : catalog.type_ids()) {
        if (lower(id) == lower(name))
            return id;
    }
    throw EngineError(ErrorCode::UnknownBlockType, {{"type", name}});
}

std::string resolve_face_arg(const Scene& scene, BlockId block, const std::string& word)
{
    if (auto face = scene.resolve_face(block, word))
        return *face;
    throw EngineError(ErrorCode::InvalidFace, {{"block", block}, {"face", word}});
}

void require_started(const Scene& scene, std::string_view op)
{
    if (!scene.started())
        throw EngineError(ErrorCode::PhaseViolation, {{"operation", std::string(op)}, {"phase", "unstarted"}});
}

void require_phase(const Scene& scene, std::string_view op, std::initializer_list<Phase> allowed)
{
    require_started(scene, op);
    if (std::find(allowed.begin(), allowed.end(), scene.phase()) == allowed.end())
        throw EngineError(ErrorCode::PhaseViolation,
                          {{"operation", std::string(op)}, {"phase", std::string(scene::to_string(scene.phase()))}});
}

std::string id_list(const std::vector<int>& ids)
{
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        out += (i ? ", #" : "#") + std::to_string(ids[i]);
    return out;
}

}  // namespace

std::optional<ActionCategory> registered_category(std::string_view name)
{
    for (const auto& r : kRegistry) {
        if (r.name == name)
            return r.category;
    }
    return std::nullopt;
}

bool accepts(ActionCategory category, std::string_view name)
{
    const auto registered = registered_category(name);
    if (!registered)
        return false;
    return *registered == category || (name == "review_control_config" && category == ActionCategory::query);
}

std::vector<std::string> registered_names(ActionCategory category)
{
    std::vector<std::string> out;
    for (const auto& r : kRegistry) {
        if (accepts(category, r.name))
            out.emplace_back(r.name);
    }
    return out;
}

BlockId resolve_block(const Scene& scene, const json& ref)
{
    if (ref.is_number_integer()) {
        const BlockId id = ref.get<BlockId>();
        scene.block(id);
        return id;
    }
    if (!ref.is_string())
        malformed("a block reference must be an id or a note.");
    std::string s = ref.get<std::string>();
    const auto first = s.find_first_not_of(" \t");
    const auto last = s.find_last_not_of(" \t");
    s = first == std::string::npos ? std::string() : s.substr(first, last - first + 1);
    std::string digits = !s.empty() && s.front() == '#' ? s.substr(1) : s;
    if (!digits.empty() && digits.size() < 9 && std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
        const BlockId id = std::stoi(digits);
        if (scene.find_block(id))
            return id;
        if (s.front() == '#')
            throw EngineError(ErrorCode::UnknownBlock, {{"block", id}, {"ref", s}});
    }
    for (const auto& [id, b] : scene.blocks()) {
        if (!s.empty() && b.note == s)
            return id;
    }
    const auto matches = scene.find_by_note(s);
    if (matches.size() == 1)
        return matches.front();
    json ctx = {{"ref", s}};
    if (matches.size() > 1)
        ctx["candidates"] = matches;
    throw EngineError(ErrorCode::UnknownBlock, ctx);
}

Workbench::Workbench(std::shared_ptr<const catalog::Catalog> catalog, scene::SceneConfig config)
    : scene_(std::move(catalog), config)
{
}

void Workbench::restore(scene::Scene scene, std::vector<LogEntry> log, std::map<std::string, scene::Scene> substructures)
{
    scene_ = std::move(scene);
    log_ = std::move(log);
    substructures_ = std::move(substructures);
}

ActionResult Workbench::apply(const Action& action)
{
    ActionResult result;
    try {
        if (!accepts(action.category, action.name)) {
            const auto registered = registered_category(action.name);
            malformed(registered ? fmt::format("'{}' belongs to the {} category, not {}.", action.name,
                                               to_string(*registered), to_string(action.category))
                                 : fmt::format("unknown operation '{}'.", action.name));
        }
        if (!action.arguments.is_object())
            malformed("arguments must be an object.");
        result = dispatch(action);
    } catch (const EngineError& e) {
        result = ActionResult::failure(e.code(), describe::error_message(e.code(), e.context(), &scene_));
    } catch (const catalog::UnknownBlockType& e) {
        result = ActionResult::failure(ErrorCode::UnknownBlockType,
                                       describe::error_message(ErrorCode::UnknownBlockType, {{"type", e.type_id}}, &scene_));
    } catch (const nlohmann::json::exception& e) {
        result = ActionResult::failure(ErrorCode::MalformedArguments,
                                       describe::error_message(ErrorCode::MalformedArguments, {{"detail", e.what()}}, &scene_));
    }
    log_.push_back({action, result});
    return result;
}

ActionResult Workbench::dispatch(const Action& action)
{
    const json& args = action.arguments;
    const std::string& op = action.name;
    const auto render = [](std::string_view key, const std::map<std::string, std::string>& vars) {
        return describe::render(key, vars);
    };

    // ---- build
    if (op == "start") {
        const Vec3 shift = vec3(args, "init_shift", Vec3::Zero());
        const Vec3 rot = vec3(args, "init_rotation", Vec3::Zero());
        scene_.start(shift, rot, optional_text(args, "note"));
        const auto& b = scene_.block(scene::kStartBlockId);
        std::vector<std::string> faces;
        for (const auto& f : scene_.free_faces(b.id))
            faces.push_back(describe::face_name(scene_, b.id, f));
        std::string faces_text;
        for (std::size_t i = 0; i < faces.size(); ++i)
            faces_text += (i ? ", " : "") + faces[i];
        const std::string rotation = rot.isZero() ? "" : fmt::format(" rotated by {} degrees", fixed3(rot));
        StateDelta delta;
        delta.created_blocks.push_back(b.id);
        return ActionResult::success(render("ok.start", {{"position", fixed3(b.pose.position)},
                                                         {"rotation", rotation},
                                                         {"faces", faces_text}}),
                                     delta);
    }
    if (op == "reset") {
        StateDelta delta;
        for (const auto& [id, b] : scene_.blocks())
            delta.removed_blocks.push_back(id);
        for (const auto& [id, c] : scene_.connectors())
            delta.removed_connectors.push_back(id);
        scene_.reset();
        return ActionResult::success(render("ok.reset", {}), delta);
    }
    if (op == "attach_block_to") {
        require_phase(scene_, op, {Phase::build, Phase::assemble});
        const BlockId base = resolve_block(scene_, block_arg(args, {"base_block", "block"}));
        const std::string type = resolve_type(scene_.catalog(), text(args, "new_block"));
        const std::string face = resolve_face_arg(scene_, base, text(args, "face"));
        std::optional<Vec3> pointing;
        if (const auto word = optional_text(args, "pointing"); !word.empty()) {
            pointing = geometry::compass_direction(word);
            if (!pointing)
                malformed(fmt::format("unknown pointing direction '{}'.", word));
        }
        const BlockId id = scene_.attach(base, face, type, optional_text(args, "note", action.note), pointing);
        StateDelta delta;
        delta.created_blocks.push_back(id);
        return ActionResult::success(render("ok.attach", {{"block", describe::block_ref(scene_, id)},
                                                          {"face", describe::face_name(scene_, base, face)},
                                                          {"parent", describe::block_ref(scene_, base)},
                                                          {"position", fixed3(scene_.block(id).pose.position)},
                                                          {"function", describe::function_phrase(scene_, id)}}),
                                     delta);
    }
    if (op == "connect_blocks") {
        require_phase(scene_, op, {Phase::build, Phase::assemble});
        const BlockId a = resolve_block(scene_, block_arg(args, {"block_a", "a"}));
        const BlockId b = resolve_block(scene_, block_arg(args, {"block_b", "b"}));
        const std::string face_a = resolve_face_arg(scene_, a, text(args, "face_a"));
        const std::string face_b = resolve_face_arg(scene_, b, text(args, "face_b"));
        const std::string type = resolve_type(scene_.catalog(), optional_text(args, "connector", "Brace"));
        const ConnectorId cid = scene_.connect({a, face_a}, {b, face_b}, type, optional_text(args, "note", action.note));
        const auto& c = scene_.connectors().at(cid);
        const double span = (scene_.face_frame(a, face_a).world_center - scene_.face_frame(b, face_b).world_center).norm();
        StateDelta delta;
        delta.created_connectors.push_back(cid);
        return ActionResult::success(render("ok.connect", {{"kind", std::string(catalog::to_string(c.kind))},
                                                           {"id", std::to_string(cid)},
                                                           {"face_a", describe::face_name(scene_, a, face_a)},
                                                           {"a", describe::block_ref(scene_, a)},
                                                           {"face_b", describe::face_name(scene_, b, face_b)},
                                                           {"b", describe::block_ref(scene_, b)},
                                                           {"span", fixed3(span)}}),
                                     delta);
    }
    if (op == "remove_block") {
        require_phase(scene_, op, {Phase::build, Phase::assemble});
        const BlockId id = resolve_block(scene_, block_arg(args, {"block", "block_id"}));
        auto [blocks, connectors] = scene_.remove(id);
        StateDelta delta;
        delta.removed_blocks = blocks;
        delta.removed_connectors = connectors;
        const std::string cut = connectors.empty() ? "" : " and connector(s) " + id_list(connectors);
        return ActionResult::success(render("ok.remove", {{"blocks", "block(s) " + id_list(blocks)},
                                                          {"connectors", cut},
                                                          {"parts", std::to_string(scene_.part_count())}}),
                                     delta);
    }

    // ---- refine
    if (op == "begin_refine") {
        require_phase(scene_, op, {Phase::build});
        scene_.set_phase(Phase::refine);
        return ActionResult::success(render("ok.phase", {{"phase", "refine"}}));
    }
    if (op == "twist_block") {
        require_phase(scene_, op, {Phase::build, Phase::refine});
        const BlockId id = resolve_block(scene_, block_arg(args, {"block", "block_id"}));
        const double angle = number(args, "angle");
        scene_.twist(id, angle);
        return ActionResult::success(render("ok.twist", {{"block", describe::block_ref(scene_, id)},
                                                         {"angle", num(angle)},
                                                         {"position", fixed3(scene_.block(id).pose.position)},
                                                         {"function", describe::function_phrase(scene_, id)}}));
    }
    if (op == "translate_block") {
        require_phase(scene_, op, {Phase::build, Phase::refine});
        const BlockId id = resolve_block(scene_, block_arg(args, {"block", "block_id"}));
        const Vec3 shift = vec3(args, "shift");
        scene_.translate(id, shift);
        return ActionResult::success(render("ok.translate", {{"block", describe::block_ref(scene_, id)},
                                                             {"shift", fixed3(shift)},
                                                             {"position", fixed3(scene_.block(id).pose.position)}}));
    }
    if (op == "flip_block") {
        require_phase(scene_, op, {Phase::build, Phase::refine});
        const BlockId id = resolve_block(scene_, block_arg(args, {"block", "block_id"}));
        scene_.flip(id);
        return ActionResult::success(render("ok.flip", {{"block", describe::block_ref(scene_, id)},
                                                        {"function", describe::function_phrase(scene_, id)}}));
    }

    // ---- assemble
    if (op == "begin_assemble") {
        require_phase(scene_, op, {Phase::build, Phase::refine});
        scene_.set_phase(Phase::assemble);
        return ActionResult::success(render("ok.phase", {{"phase", "assemble"}}));
    }
    if (op == "finalize") {
        require_phase(scene_, op, {Phase::build, Phase::refine, Phase::assemble});
        scene_.set_phase(Phase::finalized);
        return ActionResult::success(render("ok.phase", {{"phase", "finalized"}}));
    }
    if (op == "save_substructure") {
        require_phase(scene_, op, {Phase::finalized});
        const std::string name = text(args, "name");
        if (name.empty())
            malformed("a substructure needs a non-empty name.");
        substructures_.insert_or_assign(name, scene_);
        return ActionResult::success(
            render("ok.save", {{"name", name}, {"parts", std::to_string(scene_.part_count())}}));
    }
    if (op == "merge_substructure") {
        require_phase(scene_, op, {Phase::assemble});
        const std::string name = text(args, "name");
        auto it = substructures_.find(name);
        if (it == substructures_.end())
            malformed(fmt::format("no saved substructure named '{}'.", name));
        const scene::Scene& sub = it->second;
        const BlockId base = resolve_block(scene_, block_arg(args, {"base_block", "block"}));
        const std::string base_face = resolve_face_arg(scene_, base, text(args, "base_face"));
        const BlockId anchor = args.contains("anchor_block") ? resolve_block(sub, args["anchor_block"]) : scene::kStartBlockId;
        const std::string anchor_face = resolve_face_arg(sub, anchor, text(args, "anchor_face"));
        const auto created = scene_.merge(sub, base, base_face, anchor, anchor_face);
        StateDelta delta;
        delta.created_blocks = created;
        return ActionResult::success(render("ok.merge", {{"name", name},
                                                         {"face", describe::face_name(scene_, base, base_face)},
                                                         {"parent", describe::block_ref(scene_, base)},
                                                         {"count", std::to_string(created.size())},
                                                         {"ids", id_list(created)}}),
                                     delta);
    }

    // ---- control
    if (op == "bind_key") {
        require_started(scene_, op);
        const BlockId id = resolve_block(scene_, block_arg(args, {"block", "block_id"}));
        const std::string key = text(args, "key");
        const std::string act = text(args, "action");
        scene_.control().bind_key(key, act, id, scene_.spec_of(id).control_actions);
        return ActionResult::success(
            render("ok.bind", {{"key", key}, {"action", act}, {"block", describe::block_ref(scene_, id)}}));
    }
    if (op == "add_control_sequence") {
        require_started(scene_, op);
        const double time = number(args, "time");
        const std::string key = text(args, "key");
        const double hold = number(args, "hold_for");
        std::string note = optional_text(args, "motion_action");
        if (note.empty())
            note = optional_text(args, "note", action.note);
        const bool beyond = scene_.control().add_control_sequence(time, key, hold, note);
        auto r = ActionResult::success(render(beyond ? "ok.sequence_beyond" : "ok.sequence",
                                              {{"time", num(time)}, {"key", key}, {"hold", num(hold)}}));
        r.warning = beyond;
        return r;
    }
    if (op == "review_control_config")
        return ActionResult::success(control::review_control_config(scene_.control()));

    // ---- query
    if (op == "get_machine_summary")
        return ActionResult::success(describe::machine_summary(scene_));
    if (op == "get_block_detail") {
        require_started(scene_, op);
        return ActionResult::success(
            describe::block_detail(scene_, resolve_block(scene_, block_arg(args, {"block", "block_id"}))));
    }
    if (op == "get_free_faces") {
        require_started(scene_, op);
        return ActionResult::success(
            describe::free_faces_text(scene_, resolve_block(scene_, block_arg(args, {"block", "block_id"}))));
    }
    if (op == "describe_block_type") {
        const std::string type = resolve_type(scene_.catalog(), text(args, "type"));
        return ActionResult::success(catalog::describe_block_type(scene_.catalog(), type));
    }
    if (op == "get_part_count") {
        const bool include_start = args.is_object() && args.value("include_start", false);
        return ActionResult::success(render(
            "ok.part_count", {{"count", std::to_string(scene_.part_count(include_start))},
                              {"basis", include_start ? "starting block included" : "starting block excluded, connectors included"}}));
    }
    malformed(fmt::format("unknown operation '{}'.", op));
}

Workbench replay(const std::vector<LogEntry>& log, std::shared_ptr<const catalog::Catalog> catalog,
                 scene::SceneConfig config)
{
    Workbench bench(std::move(catalog), config);
    for (const auto& entry : log)
        bench.apply(entry.action);
    return bench;
}

}  // namespace buildarena::actions
