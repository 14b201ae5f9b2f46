// SPDX-License-Identifier: Apache-2.0
#include "buildarena/native_format.hpp"

#include <fmt/format.h>

namespace buildarena::io {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

ojson vec_json(const Vec3& v) { return ojson::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const json& j)
{
    if (!j.is_array() || j.size() != 3)
        throw DocumentError("expected a three-element vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ojson face_ref_json(const scene::FaceRef& ref) { return ojson{{"block", ref.block}, {"face", ref.face}}; }

scene::FaceRef face_ref_from(const json& j) { return {j.at("block").get<BlockId>(), j.at("face").get<std::string>()}; }

ojson control_json(const control::ControlState& state)
{
    ojson bindings = ojson::array();
    for (const auto& b : state.bindings())
        bindings.push_back({{"key", b.key}, {"action", b.action}, {"block", b.block_id}});
    ojson sequence = ojson::array();
    for (const auto& e : state.sequence())
        sequence.push_back({{"time", e.time}, {"key", e.key}, {"hold_for", e.hold_for}, {"note", e.motion_note}});
    return ojson{{"bindings", std::move(bindings)}, {"sequence", std::move(sequence)}};
}

void restore_control(scene::Scene& scene, const json& j)
{
    auto& state = scene.control();
    state.clear();
    for (const auto& b : j.at("bindings")) {
        const BlockId id = b.at("block").get<BlockId>();
        state.bind_key(b.at("key").get<std::string>(), b.at("action").get<std::string>(), id,
                       scene.spec_of(id).control_actions);
    }
    for (const auto& e : j.at("sequence")) {
        state.add_control_sequence(e.at("time").get<double>(), e.at("key").get<std::string>(),
                                   e.at("hold_for").get<double>(), e.value("note", std::string()));
    }
}

ojson workbench_json(const scene::Scene& scene, const std::vector<actions::LogEntry>* log,
                     const std::map<std::string, scene::Scene>* subs)
{
    ojson doc;
    doc["format"] = "buildarena.scene";
    doc["version"] = kNativeVersion;
    doc["catalog_hash"] = scene.catalog().content_hash();
    doc["scene"] = scene_to_json(scene);
    doc["log"] = log ? log_to_json(*log) : ojson::array();
    ojson named = ojson::object();
    if (subs) {
        for (const auto& [name, sub] : *subs)
            named[name] = scene_to_json(sub);
    }
    doc["substructures"] = std::move(named);
    return doc;
}

}  // namespace

CatalogMismatch::CatalogMismatch(std::string expected_hash, std::string found_hash)
    : std::runtime_error(fmt::format("catalog hash mismatch: loaded catalog is {}, document expects {}",
                                     expected_hash, found_hash)),
      expected(std::move(expected_hash)), found(std::move(found_hash))
{
}

ojson scene_to_json(const scene::Scene& scene)
{
    ojson blocks = ojson::array();
    for (const auto& [id, b] : scene.blocks()) {
        const Quat q = geometry::canonical(b.pose.orientation);
        ojson mount = nullptr;
        if (b.mounted_on) {
            const auto& m = *b.mounted_on;
            mount = {{"parent", m.parent},
                     {"parent_face", m.parent_face},
                     {"child_face", m.child_face ? ojson(*m.child_face) : ojson(nullptr)},
                     {"offset", vec_json(m.offset)}};
        }
        blocks.push_back({{"id", id},
                          {"type", b.type_id},
                          {"position", vec_json(b.pose.position)},
                          {"quaternion", {q.w(), q.x(), q.y(), q.z()}},
                          {"note", b.note},
                          {"mount", std::move(mount)},
                          {"reversed", b.reversed}});
    }
    ojson connectors = ojson::array();
    for (const auto& [id, c] : scene.connectors()) {
        connectors.push_back({{"id", id},
                              {"type", c.type_id},
                              {"a", face_ref_json(c.a)},
                              {"b", face_ref_json(c.b)},
                              {"note", c.note}});
    }
    return ojson{{"phase", scene::to_string(scene.phase())},
                 {"next_block_id", scene.next_block_id()},
                 {"next_connector_id", scene.next_connector_id()},
                 {"blocks", std::move(blocks)},
                 {"connectors", std::move(connectors)},
                 {"control", control_json(scene.control())}};
}

scene::Scene scene_from_json(const json& doc, std::shared_ptr<const catalog::Catalog> catalog, scene::SceneConfig config)
{
    scene::Scene out(catalog, config);
    try {
        const auto phase = scene::phase_from_string(doc.at("phase").get<std::string>());
        if (!phase)
            throw DocumentError("unknown phase");
        for (const auto& j : doc.at("blocks")) {
            scene::PlacedBlock b;
            b.id = j.at("id").get<BlockId>();
            b.type_id = j.at("type").get<std::string>();
            if (!catalog->contains(b.type_id))
                throw DocumentError(fmt::format("unknown block type '{}'", b.type_id));
            b.pose.position = vec_from(j.at("position"));
            const auto& q = j.at("quaternion");
            if (!q.is_array() || q.size() != 4)
                throw DocumentError("expected a four-element quaternion");
            b.pose.orientation = Quat(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(), q[3].get<double>());
            b.note = j.value("note", std::string());
            b.reversed = j.value("reversed", false);
            if (const auto& m = j.at("mount"); !m.is_null()) {
                scene::MountRecord rec;
                rec.parent = m.at("parent").get<BlockId>();
                rec.parent_face = m.at("parent_face").get<std::string>();
                if (!m.at("child_face").is_null())
                    rec.child_face = m.at("child_face").get<std::string>();
                rec.offset = vec_from(m.at("offset"));
                b.mounted_on = std::move(rec);
            }
            out.restore_block(std::move(b));
        }
        for (const auto& j : doc.at("connectors")) {
            scene::Connector c;
            c.id = j.at("id").get<ConnectorId>();
            c.type_id = j.at("type").get<std::string>();
            const auto& spec = catalog->block_spec(c.type_id);
            if (!spec.is_connector())
                throw DocumentError(fmt::format("'{}' is not a connector type", c.type_id));
            c.kind = spec.physical.connector_kind;
            c.a = face_ref_from(j.at("a"));
            c.b = face_ref_from(j.at("b"));
            c.note = j.value("note", std::string());
            out.restore_connector(std::move(c));
        }
        out.restore_counters(doc.at("next_block_id").get<BlockId>(), doc.at("next_connector_id").get<ConnectorId>());
        out.set_phase(*phase);
        out.rebuild_ledger();
        restore_control(out, doc.at("control"));
    } catch (const json::exception& e) {
        throw DocumentError(fmt::format("malformed scene document: {}", e.what()));
    } catch (const EngineError& e) {
        throw DocumentError(fmt::format("scene document rejected by the engine: {}", e.what()));
    }
    return out;
}

ojson log_to_json(const std::vector<actions::LogEntry>& log)
{
    ojson out = ojson::array();
    for (const auto& entry : log)
        out.push_back({{"action", ojson(to_json(entry.action))}, {"result", ojson(to_json(entry.result))}});
    return out;
}

std::vector<actions::LogEntry> log_from_json(const json& doc)
{
    std::vector<actions::LogEntry> out;
    try {
        for (const auto& j : doc)
            out.push_back({action_from_json(j.at("action")), result_from_json(j.at("result"))});
    } catch (const json::exception& e) {
        throw DocumentError(fmt::format("malformed trajectory log: {}", e.what()));
    }
    return out;
}

std::string export_native(const actions::Workbench& bench)
{
    return workbench_json(bench.scene(), &bench.log(), &bench.substructures()).dump(2) + "\n";
}

std::string export_native(const scene::Scene& scene) { return workbench_json(scene, nullptr, nullptr).dump(2) + "\n"; }

actions::Workbench import_native(std::string_view document, std::shared_ptr<const catalog::Catalog> catalog,
                                 scene::SceneConfig config)
{
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw DocumentError(fmt::format("not a JSON document: {}", e.what()));
    }
    if (!doc.is_object() || doc.value("format", std::string()) != "buildarena.scene")
        throw DocumentError("not a buildarena.scene document");
    if (!doc.contains("version") || !doc["version"].is_number_integer() || doc["version"].get<int>() != kNativeVersion)
        throw DocumentError("unrecognized scene document version");
    const std::string found = doc.value("catalog_hash", std::string());
    if (found != catalog->content_hash())
        throw CatalogMismatch(catalog->content_hash(), found);

    std::map<std::string, scene::Scene> subs;
    if (doc.contains("substructures")) {
        for (const auto& [name, sub] : doc["substructures"].items())
            subs.emplace(name, scene_from_json(sub, catalog, config));
    }
    actions::Workbench bench(catalog, config);
    bench.restore(scene_from_json(doc.at("scene"), catalog, config),
                  doc.contains("log") ? log_from_json(doc["log"]) : std::vector<actions::LogEntry>{}, std::move(subs));
    return bench;
}

}  // namespace buildarena::io
