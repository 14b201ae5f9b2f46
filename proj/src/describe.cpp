// SPDX-License-Identifier: Apache-2.0
#include "buildarena/describe.hpp"

#include <fmt/format.h>

#include "buildarena/evaluate.hpp"
#include "buildarena/format.hpp"

namespace buildarena::describe {

namespace {

using scene::Scene;

std::string join(const std::vector<std::string>& items, std::string_view sep = ", ")
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i)
            out += sep;
        out += items[i];
    }
    return out;
}

std::string ctx_text(const nlohmann::json& ctx, const char* key, std::string fallback = "?")
{
    if (!ctx.is_object() || !ctx.contains(key))
        return fallback;
    const auto& v = ctx.at(key);
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer())
        return std::to_string(v.get<long long>());
    if (v.is_number())
        return fixed3(v.get<double>());
    if (v.is_array()) {
        std::vector<std::string> parts;
        for (const auto& item : v)
            parts.push_back(item.is_string() ? item.get<std::string>() : item.dump());
        return join(parts);
    }
    return v.dump();
}

std::string block_token(const nlohmann::json& ctx, const char* key, const Scene* scene)
{
    if (!ctx.is_object() || !ctx.contains(key) || !ctx.at(key).is_number_integer())
        return ctx_text(ctx, key);
    const BlockId id = ctx.at(key).get<int>();
    if (scene) {
        if (const auto* b = scene->find_block(id))
            return fmt::format("#{} ({})", id, b->type_id);
    }
    return fmt::format("#{}", id);
}

std::string orientation_text(const Quat& q)
{
    if (q.isApprox(Quat::Identity(), 1e-9) || q.isApprox(Quat(-1, 0, 0, 0), 1e-9))
        return "no rotation";
    if (geometry::is_axis_aligned(q)) {
        const auto x = geometry::compass_word(q * Vec3::UnitX());
        const auto z = geometry::compass_word(q * Vec3::UnitZ());
        return fmt::format("local x {} and local z {}", x.value_or("?"), z.value_or("?"));
    }
    const Quat c = geometry::canonical(q);
    return fmt::format("rotation quaternion (w {}, x {}, y {}, z {})", fixed3(c.w()), fixed3(c.x()), fixed3(c.y()),
                       fixed3(c.z()));
}

std::string mount_text(const Scene& scene, const scene::PlacedBlock& b)
{
    if (!b.mounted_on)
        return "";
    const auto& m = *b.mounted_on;
    std::string out = fmt::format(", mounted on the {} face of #{}", face_name(scene, m.parent, m.parent_face), m.parent);
    if (!m.offset.isZero())
        out += fmt::format(" shifted by {}", fixed3(m.offset));
    return out;
}

}  // namespace

std::string render(std::string_view key, const std::map<std::string, std::string>& vars)
{
    const std::string_view text = template_text(key);
    std::string out;
    out.reserve(text.size() + 32);
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '{') {
            const auto close = text.find('}', i);
            if (close != std::string_view::npos) {
                const std::string name(text.substr(i + 1, close - i - 1));
                if (auto it = vars.find(name); it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out += text[i++];
    }
    return out;
}

std::string direction_text(const Vec3& direction)
{
    if (auto word = geometry::compass_word(direction))
        return *word;
    return fixed3(direction.normalized());
}

std::string block_ref(const Scene& scene, BlockId id)
{
    const auto& b = scene.block(id);
    if (b.note.empty())
        return fmt::format("#{} {}", id, b.type_id);
    return fmt::format("#{} {} \"{}\"", id, b.type_id, b.note);
}

std::string face_name(const Scene& scene, BlockId id, std::string_view face_id)
{
    const auto& b = scene.block(id);
    const auto* face = scene.catalog().block_spec(b.type_id).face(face_id);
    if (!face)
        return std::string(face_id);
    if (geometry::is_axis_aligned(b.pose.orientation)) {
        if (auto word = geometry::face_word(b.pose.rotate(face->local_normal))) {
            if (*word == face->face_id)
                return *word;
            // a cube turned by a twist: world word first, catalog id for reference
            return fmt::format("{} ({})", *word, face->face_id);
        }
    }
    return fmt::format("{} ({})", face->label, face->face_id);
}

std::string function_phrase(const Scene& scene, BlockId id)
{
    const auto& spec = scene.spec_of(id);
    if (spec.is_wheel()) {
        const auto w = evaluate::wheel_info(scene, id);
        if (w.roll_direction.isZero())
            return render("fn.wheel_flat", {{"axis", direction_text(w.axis)}});
        return render("fn.wheel", {{"axis", direction_text(w.axis)}, {"roll", direction_text(w.roll_direction)}});
    }
    if (spec.is_cannon()) {
        const auto c = evaluate::cannon_info(scene, id, evaluate::heated_cannons(scene));
        const std::string mode =
            render(c.heated ? "fn.cannon_steam" : "fn.cannon_water", {{"thrust", num(c.thrust)}});
        return render("fn.cannon", {{"jet", direction_text(c.jet_direction)},
                                    {"thrust_dir", direction_text(-c.jet_direction)},
                                    {"inlet", fixed3(c.inlet)},
                                    {"outlet", fixed3(c.outlet)},
                                    {"mode", mode}});
    }
    if (spec.is_heater()) {
        const auto& b = scene.block(id);
        const auto centers = evaluate::heat_centers(scene, id);
        std::vector<std::string> heat;
        for (const auto& c : centers)
            heat.push_back(fixed3(c));
        return render("fn.torch", {{"dir", direction_text(b.pose.rotate(Vec3::UnitX()))},
                                   {"heat", join(heat)},
                                   {"radius", num(*spec.physical.heat_radius)}});
    }
    return "";
}

std::string machine_summary(const Scene& scene)
{
    if (!scene.started())
        return render("summary.unstarted", {}) + "\n";
    std::string out = render("summary.header", {{"blocks", std::to_string(scene.blocks().size())},
                                                {"connectors", std::to_string(scene.connectors().size())},
                                                {"phase", std::string(scene::to_string(scene.phase()))},
                                                {"mass", num(evaluate::total_mass(scene))}});
    out += "\n";
    std::vector<std::string> controllable;
    for (const auto& [id, b] : scene.blocks()) {
        out += render("summary.block", {{"ref", block_ref(scene, id)},
                                        {"position", fixed3(b.pose.position)},
                                        {"orientation", orientation_text(b.pose.orientation)},
                                        {"mount", mount_text(scene, b)},
                                        {"function", function_phrase(scene, id)}});
        out += "\n";
        for (const auto& action : scene.catalog().block_spec(b.type_id).control_actions)
            controllable.push_back(fmt::format("{} on #{}", action, id));
    }
    if (scene.connectors().empty()) {
        out += render("summary.connectors_none", {}) + "\n";
    } else {
        out += "Connectors:\n";
        for (const auto& [cid, c] : scene.connectors()) {
            const double span =
                (scene.face_frame(c.a.block, c.a.face).world_center - scene.face_frame(c.b.block, c.b.face).world_center).norm();
            out += render("summary.connector", {{"kind", std::string(catalog::to_string(c.kind))},
                                                {"id", std::to_string(cid)},
                                                {"face_a", face_name(scene, c.a.block, c.a.face)},
                                                {"a", fmt::format("#{}", c.a.block)},
                                                {"face_b", face_name(scene, c.b.block, c.b.face)},
                                                {"b", fmt::format("#{}", c.b.block)},
                                                {"span", fixed3(span)}});
            if (!c.note.empty())
                out += fmt::format(" \"{}\"", c.note);
            out += "\n";
        }
    }
    out += (controllable.empty() ? render("summary.controls_none", {})
                                 : render("summary.controls", {{"actions", join(controllable)}})) +
           "\n";
    const auto entries = scene.control().sequence().size();
    out += render("summary.control_state", {{"bindings", std::to_string(scene.control().bindings().size())},
                                            {"entries", std::to_string(entries)},
                                            {"plural", entries == 1 ? "y" : "ies"}});
    out += "\n";
    return out;
}

std::string block_detail(const Scene& scene, BlockId id)
{
    const auto& b = scene.block(id);
    const auto& spec = scene.catalog().block_spec(b.type_id);
    std::string out = render("detail.header", {{"ref", block_ref(scene, id)},
                                               {"position", fixed3(b.pose.position)},
                                               {"orientation", orientation_text(b.pose.orientation)},
                                               {"mount", mount_text(scene, b)}});
    out += "\n";
    if (const auto fn = function_phrase(scene, id); !fn.empty())
        out += fn.substr(1) + "\n";
    bool any = false;
    for (const auto& f : spec.faces) {
        if (!f.attachable)
            continue;
        any = true;
        std::string status = render("detail.free", {});
        if (const auto* occ = scene.occupancy({id, f.face_id})) {
            if (occ->attachment)
                status = render("detail.attached", {{"other", block_ref(scene, *occ->attachment)}});
            else if (!occ->connectors.empty()) {
                std::vector<std::string> ids;
                for (auto cid : occ->connectors)
                    ids.push_back(fmt::format("#{}", cid));
                status = render("detail.connectors", {{"count", std::to_string(ids.size())}, {"ids", join(ids)}});
            }
        }
        const auto frame = geometry::face_world_frame(b.pose, f);
        out += render("detail.face", {{"face", face_name(scene, id, f.face_id)}, {"status", status}});
        out += fmt::format(", center {}, normal {}\n", fixed3(frame.world_center), direction_text(frame.world_normal));
    }
    if (!any)
        out += render("detail.no_faces", {}) + "\n";
    return out;
}

std::string free_faces_text(const Scene& scene, BlockId id)
{
    std::vector<std::string> names;
    for (const auto& f : scene.free_faces(id))
        names.push_back(face_name(scene, id, f));
    if (names.empty())
        return render("detail.free_faces_none", {{"ref", block_ref(scene, id)}});
    return render("detail.free_faces", {{"ref", block_ref(scene, id)}, {"faces", join(names)}});
}

std::string error_message(ErrorCode code, const nlohmann::json& ctx, const Scene* scene)
{
    const std::string key = "error." + std::string(to_string(code));
    std::map<std::string, std::string> vars;
    vars["block"] = block_token(ctx, "block", scene);
    vars["other"] = block_token(ctx, "other_block", scene);
    for (const char* k : {"face", "type", "key", "action", "value", "detail", "operation", "cap"})
        vars[k] = ctx_text(ctx, k);

    switch (code) {
    case ErrorCode::FaceOccupied:
        if (ctx.contains("other_block"))
            vars["occupant"] = "block " + vars["other"];
        else if (ctx.contains("connector"))
            vars["occupant"] = "connector #" + ctx_text(ctx, "connector");
        else
            vars["occupant"] = "another part";
        break;
    case ErrorCode::InvalidFace:
        if (!ctx.contains("detail")) {
            vars["detail"] = "";
            if (scene && ctx.contains("block") && ctx["block"].is_number_integer()) {
                const BlockId id = ctx["block"].get<int>();
                if (scene->find_block(id)) {
                    std::vector<std::string> names;
                    for (const auto& f : scene->spec_of(id).faces) {
                        if (f.attachable)
                            names.push_back(face_name(*scene, id, f.face_id));
                    }
                    vars["detail"] = names.empty() ? "It has no attachable faces." : "Its faces are: " + join(names) + ".";
                }
            }
        }
        break;
    case ErrorCode::UnknownBlock: {
        vars["ref"] = ctx.contains("ref") ? ctx_text(ctx, "ref") : "#" + ctx_text(ctx, "block");
        std::string cands;
        if (ctx.contains("candidates") && ctx["candidates"].is_array() && !ctx["candidates"].empty()) {
            std::vector<std::string> names;
            for (const auto& c : ctx["candidates"]) {
                const BlockId id = c.get<int>();
                names.push_back(scene && scene->find_block(id) ? block_ref(*scene, id) : fmt::format("#{}", id));
            }
            cands = " The note is ambiguous; candidates: " + join(names) + ".";
        } else if (scene && scene->started()) {
            std::vector<std::string> ids;
            for (const auto& [id, b] : scene->blocks())
                ids.push_back(fmt::format("#{}", id));
            cands = " Existing blocks: " + join(ids) + ".";
        }
        vars["candidates"] = cands;
        break;
    }
    case ErrorCode::UnknownBlockType:
        vars["types"] = scene ? join(scene->catalog().type_ids()) : ctx_text(ctx, "types", "see describe_block_type");
        break;
    case ErrorCode::StartingBlockProtected: {
        const auto op = ctx_text(ctx, "operation", "");
        vars["verb"] = op == "remove" ? "removed" : op == "translate" ? "moved" : "changed";
        break;
    }
    case ErrorCode::ConnectorSpanExceeded:
        vars["span"] = ctx_text(ctx, "span");
        vars["max_span"] = ctx_text(ctx, "max_span");
        break;
    case ErrorCode::PhaseViolation:
        if (ctx.contains("dependents")) {
            std::vector<std::string> ids;
            for (const auto& d : ctx["dependents"])
                ids.push_back(fmt::format("#{}", d.get<int>()));
            vars["situation"] = fmt::format("while block(s) {} are mounted on block {} (cascade removal is off)",
                                            join(ids), vars["block"]);
        } else if (ctx.contains("phase")) {
            vars["situation"] = "in the " + ctx_text(ctx, "phase") + " phase";
        } else {
            vars["situation"] = "now";
        }
        break;
    case ErrorCode::UnknownAction:
        if (scene && ctx.contains("block") && ctx["block"].is_number_integer() && scene->find_block(ctx["block"].get<int>())) {
            const auto& actions = scene->spec_of(ctx["block"].get<int>()).control_actions;
            vars["actions"] = actions.empty() ? "none" : join(actions);
        } else {
            vars["actions"] = ctx_text(ctx, "actions", "none");
        }
        break;
    default:
        break;
    }
    return render(key, vars);
}

}  // namespace buildarena::describe
