// SPDX-License-Identifier: Apache-2.0
#include "buildarena/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "buildarena/format.hpp"
#include "buildarena/hash.hpp"

namespace buildarena::catalog {

using nlohmann::json;

namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kBoundaryTolerance = 1e-9;

[[noreturn]] void invalid(const std::string& type_id, const std::string& field, const std::string& why)
{
    throw ValidationError(type_id, field, fmt::format("catalog entry '{}': field '{}' {}", type_id, field, why));
}

Vec3 read_vec3(const json& node, const std::string& type_id, const std::string& field)
{
    if (!node.is_array() || node.size() != 3)
        invalid(type_id, field, "must be an array of three numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) {
        if (!node[i].is_number())
            invalid(type_id, field, "must be an array of three numbers");
        v[i] = node[i].get<double>();
    }
    return v;
}

double read_positive(const json& node, const std::string& type_id, const std::string& field)
{
    if (!node.is_number())
        invalid(type_id, field, "must be a number");
    const double value = node.get<double>();
    if (!(value > 0.0))
        invalid(type_id, field, "must be positive");
    return value;
}

std::optional<double> optional_positive(const json& physical, const char* key, const std::string& type_id)
{
    if (!physical.contains(key))
        return std::nullopt;
    return read_positive(physical.at(key), type_id, std::string("physical.") + key);
}

LocalBox read_box(const json& node, const std::string& type_id, const std::string& field)
{
    if (!node.is_object() || !node.contains("center") || !node.contains("half_extents"))
        invalid(type_id, field, "entries need center and half_extents");
    LocalBox box{read_vec3(node.at("center"), type_id, field + ".center"),
                 read_vec3(node.at("half_extents"), type_id, field + ".half_extents")};
    if ((box.half_extents.array() <= 0.0).any())
        invalid(type_id, field, "half_extents must be positive");
    return box;
}

ConnectorKind parse_connector_kind(const std::string& value, const std::string& type_id)
{
    if (value == "brace")
        return ConnectorKind::brace;
    if (value == "winch")
        return ConnectorKind::winch;
    if (value == "none")
        return ConnectorKind::none;
    invalid(type_id, "physical.connector_kind", "must be brace, winch or none");
}

/// A face must sit on the extent box and point out of it.
void check_face_geometry(const BlockSpec& spec, const FaceSpec& face)
{
    const Vec3 half = spec.shape / 2.0;
    const Vec3& c = face.local_center;
    for (int i = 0; i < 3; ++i) {
        if (std::abs(c[i]) > half[i] + kBoundaryTolerance)
            invalid(spec.type_id, "faces." + face.face_id + ".center", "lies outside the block extent");
    }
    bool on_boundary = false;
    for (int i = 0; i < 3; ++i)
        on_boundary = on_boundary || std::abs(std::abs(c[i]) - half[i]) <= kBoundaryTolerance;
    if (!on_boundary)
        invalid(spec.type_id, "faces." + face.face_id + ".center", "is not on the block boundary");

    const Vec3 probe = c + 1e-6 * face.local_normal;
    bool outside = false;
    for (int i = 0; i < 3; ++i)
        outside = outside || std::abs(probe[i]) > half[i];
    if (!outside)
        invalid(spec.type_id, "faces." + face.face_id + ".normal", "does not point out of the block");
}

BlockSpec parse_block(const json& node)
{
    if (!node.is_object())
        throw ValidationError("", "blocks", "catalog blocks must be objects");
    if (!node.contains("type_id") || !node.at("type_id").is_string())
        throw ValidationError("", "type_id", "catalog block without a type_id");

    BlockSpec spec;
    spec.type_id = node.at("type_id").get<std::string>();
    const std::string& id = spec.type_id;
    if (id.empty())
        invalid(id, "type_id", "must not be empty");

    if (!node.contains("shape"))
        invalid(id, "shape", "is required");
    spec.shape = read_vec3(node.at("shape"), id, "shape");
    if ((spec.shape.array() <= 0.0).any())
        invalid(id, "shape", "extents must be positive");
    if (!node.contains("mass"))
        invalid(id, "mass", "is required");
    spec.mass = read_positive(node.at("mass"), id, "mass");

    spec.placeable = node.value("placeable", true);
    const std::string orientation = node.value("orientation", std::string("inherit"));
    if (orientation == "inherit")
        spec.orientation = OrientationMode::inherit;
    else if (orientation == "pointing")
        spec.orientation = OrientationMode::pointing;
    else
        invalid(id, "orientation", "must be inherit or pointing");

    std::set<std::string> face_ids;
    std::set<std::string> labels;
    for (const auto& f : node.value("faces", json::array())) {
        FaceSpec face;
        if (!f.contains("id") || !f.at("id").is_string())
            invalid(id, "faces", "every face needs an id");
        face.face_id = f.at("id").get<std::string>();
        face.label = f.value("label", std::string());
        face.local_center = read_vec3(f.at("center"), id, "faces." + face.face_id + ".center");
        face.local_normal = read_vec3(f.at("normal"), id, "faces." + face.face_id + ".normal");
        face.attachable = f.value("attachable", true);
        if (std::abs(face.local_normal.norm() - 1.0) > kUnitTolerance)
            invalid(id, "faces." + face.face_id + ".normal", "must be a unit vector");
        if (!face_ids.insert(face.face_id).second)
            invalid(id, "faces." + face.face_id, "duplicates a face id");
        if (!face.label.empty() && !labels.insert(face.label).second)
            invalid(id, "faces." + face.face_id + ".label", "duplicates a face label");
        check_face_geometry(spec, face);
        spec.faces.push_back(std::move(face));
    }

    if (node.contains("mount")) {
        const auto& m = node.at("mount");
        MountSpec mount;
        mount.local_center = read_vec3(m.at("center"), id, "mount.center");
        mount.local_normal = read_vec3(m.at("normal"), id, "mount.normal");
        if (std::abs(mount.local_normal.norm() - 1.0) > kUnitTolerance)
            invalid(id, "mount.normal", "must be a unit vector");
        if (m.contains("face")) {
            mount.face_id = m.at("face").get<std::string>();
            if (!face_ids.contains(*mount.face_id))
                invalid(id, "mount.face", "names a face the block does not have");
        }
        spec.mount = mount;
    }
    if (spec.orientation == OrientationMode::pointing && !spec.mount)
        invalid(id, "mount", "is required for pointing blocks");

    for (const auto& b : node.value("collision", json::array()))
        spec.collision.push_back(read_box(b, id, "collision"));
    for (const auto& b : node.value("heat_regions", json::array()))
        spec.heat_regions.push_back(read_box(b, id, "heat_regions"));
    if (node.contains("anchors")) {
        for (const auto& [name, value] : node.at("anchors").items())
            spec.anchors[name] = read_vec3(value, id, "anchors." + name);
    }

    const json physical = node.value("physical", json::object());
    if (!physical.is_object())
        invalid(id, "physical", "must be an object");
    spec.physical.wheel_rpm = optional_positive(physical, "wheel_rpm", id);
    spec.physical.recoil_force = optional_positive(physical, "recoil_force", id);
    spec.physical.steam_multiplier = optional_positive(physical, "steam_multiplier", id);
    spec.physical.heat_radius = optional_positive(physical, "heat_radius", id);
    if (physical.contains("heat_offsets")) {
        for (const auto& p : physical.at("heat_offsets"))
            spec.physical.heat_offsets.push_back(read_vec3(p, id, "physical.heat_offsets"));
    }
    if (physical.contains("connector_kind"))
        spec.physical.connector_kind = parse_connector_kind(physical.at("connector_kind").get<std::string>(), id);
    if (spec.physical.steam_multiplier && !spec.physical.recoil_force)
        invalid(id, "physical.steam_multiplier", "requires recoil_force");
    if (spec.physical.heat_radius && spec.physical.heat_offsets.empty())
        invalid(id, "physical.heat_offsets", "is required with heat_radius");

    std::set<std::string> actions;
    for (const auto& a : node.value("control_actions", json::array())) {
        auto name = a.get<std::string>();
        if (!actions.insert(name).second)
            invalid(id, "control_actions", "duplicates action '" + name + "'");
        spec.control_actions.push_back(std::move(name));
    }

    const std::string flip = node.value("flip", std::string("none"));
    if (flip == "none")
        spec.flip = FlipMode::none;
    else if (flip == "spin")
        spec.flip = FlipMode::spin;
    else if (flip == "rotate180")
        spec.flip = FlipMode::rotate180;
    else
        invalid(id, "flip", "must be none, spin or rotate180");

    if (node.contains("machine_file")) {
        const auto& mf = node.at("machine_file");
        spec.machine_file.id = mf.value("id", -1);
        spec.machine_file.verified = mf.value("verified", false);
    }
    spec.init_description = node.value("description", std::string());
    return spec;
}

json vec_json(const Vec3& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

json box_json(const LocalBox& b)
{
    return json{{"center", vec_json(b.center)}, {"half_extents", vec_json(b.half_extents)}};
}

json spec_json(const BlockSpec& spec)
{
    json node;
    node["type_id"] = spec.type_id;
    node["shape"] = vec_json(spec.shape);
    node["mass"] = spec.mass;
    node["placeable"] = spec.placeable;
    node["orientation"] = spec.orientation == OrientationMode::pointing ? "pointing" : "inherit";
    if (spec.mount) {
        json m{{"center", vec_json(spec.mount->local_center)}, {"normal", vec_json(spec.mount->local_normal)}};
        if (spec.mount->face_id)
            m["face"] = *spec.mount->face_id;
        node["mount"] = m;
    }
    node["faces"] = json::array();
    for (const auto& f : spec.faces) {
        node["faces"].push_back({{"id", f.face_id},
                                 {"label", f.label},
                                 {"center", vec_json(f.local_center)},
                                 {"normal", vec_json(f.local_normal)},
                                 {"attachable", f.attachable}});
    }
    node["collision"] = json::array();
    for (const auto& b : spec.collision)
        node["collision"].push_back(box_json(b));
    if (!spec.heat_regions.empty()) {
        node["heat_regions"] = json::array();
        for (const auto& b : spec.heat_regions)
            node["heat_regions"].push_back(box_json(b));
    }
    if (!spec.anchors.empty()) {
        node["anchors"] = json::object();
        for (const auto& [name, p] : spec.anchors)
            node["anchors"][name] = vec_json(p);
    }
    json physical = json::object();
    const auto& ph = spec.physical;
    if (ph.wheel_rpm)
        physical["wheel_rpm"] = *ph.wheel_rpm;
    if (ph.recoil_force)
        physical["recoil_force"] = *ph.recoil_force;
    if (ph.steam_multiplier)
        physical["steam_multiplier"] = *ph.steam_multiplier;
    if (ph.heat_radius)
        physical["heat_radius"] = *ph.heat_radius;
    if (!ph.heat_offsets.empty()) {
        physical["heat_offsets"] = json::array();
        for (const auto& p : ph.heat_offsets)
            physical["heat_offsets"].push_back(vec_json(p));
    }
    if (ph.connector_kind != ConnectorKind::none)
        physical["connector_kind"] = std::string(to_string(ph.connector_kind));
    node["physical"] = physical;
    node["control_actions"] = spec.control_actions;
    node["flip"] = spec.flip == FlipMode::spin ? "spin" : spec.flip == FlipMode::rotate180 ? "rotate180" : "none";
    node["machine_file"] = {{"id", spec.machine_file.id}, {"verified", spec.machine_file.verified}};
    node["description"] = spec.init_description;
    return node;
}

json catalog_json(int version, const std::map<std::string, BlockSpec, std::less<>>& blocks)
{
    json doc;
    doc["format"] = "buildarena.catalog";
    doc["version"] = version;
    doc["blocks"] = json::array();
    for (const auto& [id, spec] : blocks)
        doc["blocks"].push_back(spec_json(spec));
    return doc;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value)
{
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

}  // namespace

ValidationError::ValidationError(std::string type_id_, std::string field_, const std::string& what)
    : std::runtime_error(what), type_id(std::move(type_id_)), field(std::move(field_))
{
}

UnknownBlockType::UnknownBlockType(std::string type_id_)
    : std::runtime_error("unknown block type '" + type_id_ + "'"), type_id(std::move(type_id_))
{
}

bool BlockSpec::has_action(std::string_view action) const
{
    return std::find(control_actions.begin(), control_actions.end(), action) != control_actions.end();
}

const FaceSpec* BlockSpec::face(std::string_view face_id) const
{
    for (const auto& f : faces) {
        if (f.face_id == face_id)
            return &f;
    }
    return nullptr;
}

Catalog::Catalog(int version, std::map<std::string, BlockSpec, std::less<>> blocks)
    : version_(version), blocks_(std::move(blocks))
{
    hash_ = Hasher().str(catalog_json(version_, blocks_).dump()).hex();
}

const BlockSpec& Catalog::block_spec(std::string_view type_id) const
{
    auto it = blocks_.find(type_id);
    if (it == blocks_.end())
        throw UnknownBlockType(std::string(type_id));
    return it->second;
}

bool Catalog::contains(std::string_view type_id) const
{
    return blocks_.find(type_id) != blocks_.end();
}

std::vector<std::string> Catalog::type_ids() const
{
    std::vector<std::string> ids;
    for (const auto& [id, spec] : blocks_)
        ids.push_back(id);
    return ids;
}

bool operator==(const Catalog& a, const Catalog& b)
{
    return a.version_ == b.version_ && a.hash_ == b.hash_;
}

Catalog load_catalog(std::string_view document)
{
    json doc;
    try {
        doc = json::parse(document.begin(), document.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("catalog document does not parse: ") + e.what());
    }
    if (!doc.is_object())
        throw ParseError("catalog document must be an object");
    if (!doc.contains("version") || !doc.at("version").is_number_integer())
        throw ValidationError("", "version", "catalog document has no integer version field");
    const int version = doc.at("version").get<int>();
    if (version != kCatalogVersion)
        throw ValidationError("", "version", fmt::format("unsupported catalog version {}", version));
    if (doc.contains("format") && doc.at("format") != "buildarena.catalog")
        throw ValidationError("", "format", "not a buildarena catalog document");
    if (!doc.contains("blocks") || !doc.at("blocks").is_array())
        throw ValidationError("", "blocks", "catalog document has no blocks array");

    std::map<std::string, BlockSpec, std::less<>> blocks;
    try {
        for (const auto& node : doc.at("blocks")) {
            BlockSpec spec = parse_block(node);
            const std::string id = spec.type_id;
            if (!blocks.emplace(id, std::move(spec)).second)
                invalid(id, "type_id", "is defined twice");
        }
    } catch (const json::exception& e) {
        throw ValidationError("", "blocks", std::string("malformed block entry: ") + e.what());
    }
    for (auto required : kRequiredTypes) {
        if (!blocks.contains(std::string(required)))
            throw ValidationError(std::string(required), "type_id", "required block type missing from catalog");
    }
    const auto& start = blocks.at(std::string(kStartingBlock));
    if (start.placeable || start.is_connector())
        invalid(start.type_id, "placeable", "the starting block cannot be placeable");
    return Catalog(version, std::move(blocks));
}

Catalog load_catalog_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open catalog file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return load_catalog(buffer.str());
}

std::string serialize_catalog(const Catalog& catalog)
{
    return catalog_json(catalog.version(), catalog.blocks()).dump(2);
}

std::filesystem::path default_catalog_path()
{
    if (const char* env = std::getenv("BUILDARENA_CATALOG"); env && *env)
        return env;
    return asset_dir() / "catalog.json";
}

std::filesystem::path asset_dir()
{
    if (const char* env = std::getenv("BUILDARENA_ASSETS"); env && *env)
        return env;
    return BUILDARENA_ASSET_DIR;
}

std::shared_ptr<const Catalog> load_default_catalog()
{
    return std::make_shared<const Catalog>(load_catalog_file(default_catalog_path()));
}

std::string describe_block_type(const Catalog& catalog, std::string_view type_id)
{
    const BlockSpec& spec = catalog.block_spec(type_id);

    std::string faces;
    for (const auto& f : spec.faces) {
        if (!faces.empty())
            faces += ", ";
        faces += f.label.empty() ? f.face_id : fmt::format("{} ({})", f.face_id, f.label);
        if (!f.attachable)
            faces += " [not attachable]";
    }
    if (faces.empty())
        faces = "none";
    std::string controls;
    for (const auto& a : spec.control_actions)
        controls += (controls.empty() ? "" : ", ") + a;
    if (controls.empty())
        controls = "none";

    std::string text = spec.init_description;
    if (text.empty())
        text = "{type}: shape {shape}, mass {mass}. Faces: {faces}.";
    text = replace_all(text, "{type}", spec.type_id);
    text = replace_all(text, "{shape}", fmt::format("{} x {} x {}", num(spec.shape.x()), num(spec.shape.y()), num(spec.shape.z())));
    text = replace_all(text, "{mass}", num(spec.mass));
    text = replace_all(text, "{faces}", faces);
    text = replace_all(text, "{controls}", controls);
    const auto& ph = spec.physical;
    if (ph.wheel_rpm)
        text = replace_all(text, "{wheel_rpm}", num(*ph.wheel_rpm));
    if (ph.recoil_force)
        text = replace_all(text, "{recoil_force}", num(*ph.recoil_force));
    if (ph.steam_multiplier)
        text = replace_all(text, "{steam_multiplier}", num(*ph.steam_multiplier));
    if (ph.heat_radius)
        text = replace_all(text, "{heat_radius}", num(*ph.heat_radius));

    return fmt::format("{} (shape {} x {} x {}, mass {}): {}", spec.type_id, num(spec.shape.x()), num(spec.shape.y()),
                       num(spec.shape.z()), num(spec.mass), text);
}

std::string_view to_string(ConnectorKind kind)
{
    switch (kind) {
    case ConnectorKind::brace:
        return "brace";
    case ConnectorKind::winch:
        return "winch";
    case ConnectorKind::none:
        break;
    }
    return "none";
}

}  // namespace buildarena::catalog
