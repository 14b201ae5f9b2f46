// SPDX-License-Identifier: Apache-2.0
#include "buildarena/machine_file.hpp"

#include <cmath>

#include <fmt/format.h>

#include "buildarena/format.hpp"
#include "buildarena/hash.hpp"

namespace buildarena::io {

namespace {

std::string escape(std::string_view text)
{
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default:
            if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n' && c != '\r')
                out += fmt::format("&#x{:X};", static_cast<unsigned>(static_cast<unsigned char>(c)));
            else
                out += c;
        }
    }
    return out;
}

// Round-off residue such as 5.6e-17 becomes 0 so the markup stays readable.
std::string coord(double v) { return num(std::abs(v) < 1e-12 ? 0.0 : v); }

std::string xyz(const Vec3& v) { return fmt::format("x=\"{}\" y=\"{}\" z=\"{}\"", coord(v.x()), coord(v.y()), coord(v.z())); }

std::string xyzw(const Quat& q)
{
    return fmt::format("x=\"{}\" y=\"{}\" z=\"{}\" w=\"{}\"", coord(q.x()), coord(q.y()), coord(q.z()), coord(q.w()));
}

/// Deterministic GUID-shaped tag derived from the block's content.
std::string block_guid(const scene::PlacedBlock& b)
{
    Hasher h1, h2;
    h1.str("guid-a").i64(b.id).str(b.type_id).f64(b.pose.position.x()).f64(b.pose.position.y()).f64(b.pose.position.z());
    h2.str("guid-b").i64(b.id).str(b.note);
    const std::string a = to_hex(h1.value());
    const std::string c = to_hex(h2.value());
    return fmt::format("{}-{}-{}-{}-{}", a.substr(0, 8), a.substr(8, 4), a.substr(12, 4), c.substr(0, 4), c.substr(4, 12));
}

std::string face_tag(const scene::FaceRef& ref) { return fmt::format("{}:{}", ref.block, ref.face); }

}  // namespace

UnfinalizedScene::UnfinalizedScene() : std::runtime_error("UnfinalizedScene: finalize the scene before exporting a machine file") {}

Quat to_game_frame(const Quat& q)
{
    const Quat c = geometry::canonical(q);
    return geometry::canonical(Quat(c.w(), -c.x(), -c.z(), -c.y()));
}

Vec3 to_game_frame(const Vec3& v) { return {v.x(), v.z(), v.y()}; }

std::string export_machine_file(const scene::Scene& scene, std::string_view machine_name)
{
    if (scene.phase() != scene::Phase::finalized)
        throw UnfinalizedScene();

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n";
    out += fmt::format("<Machine version=\"1\" bsgVersion=\"1.3\" name=\"{}\" xmlns:ba=\"{}\">\n", escape(machine_name),
                       kExtensionNamespace);
    out += "  <Global>\n";
    out += "    <Position x=\"0\" y=\"0\" z=\"0\" />\n";
    out += "    <Rotation x=\"0\" y=\"0\" z=\"0\" w=\"1\" />\n";
    out += "  </Global>\n";
    out += "  <Data />\n";
    out += "  <Blocks>\n";
    for (const auto& [id, b] : scene.blocks()) {
        const auto& type = scene.spec_of(id).machine_file;
        out += fmt::format("    <Block id=\"{}\" guid=\"{}\"{}>\n", type.id, block_guid(b),
                           type.verified ? "" : " ba:idVerified=\"false\"");
        out += "      <Transform>\n";
        out += fmt::format("        <Position {} />\n", xyz(to_game_frame(b.pose.position)));
        out += fmt::format("        <Rotation {} />\n", xyzw(to_game_frame(b.pose.orientation)));
        out += "        <Scale x=\"1\" y=\"1\" z=\"1\" />\n";
        out += "      </Transform>\n";
        std::string data;
        if (b.reversed)
            data += "        <ba:Boolean key=\"flipped\">True</ba:Boolean>\n";
        for (const auto& binding : scene.control().bindings()) {
            if (binding.block_id == id)
                data += fmt::format("        <ba:KeyBinding action=\"{}\" key=\"{}\" />\n", escape(binding.action),
                                    escape(binding.key));
        }
        out += data.empty() ? "      <Data />\n" : "      <Data>\n" + data + "      </Data>\n";
        out += fmt::format("      <ba:Source type=\"{}\" sceneId=\"{}\" note=\"{}\" />\n", escape(b.type_id), id,
                           escape(b.note));
        out += "    </Block>\n";
    }
    out += "  </Blocks>\n";
    if (!scene.connectors().empty()) {
        out += "  <ba:Connectors>\n";
        for (const auto& [cid, c] : scene.connectors()) {
            const Vec3 pa = scene.face_frame(c.a.block, c.a.face).world_center;
            const Vec3 pb = scene.face_frame(c.b.block, c.b.face).world_center;
            out += fmt::format("    <ba:Connector id=\"{}\" type=\"{}\" a=\"{}\" b=\"{}\" note=\"{}\">\n", cid,
                               escape(c.type_id), escape(face_tag(c.a)), escape(face_tag(c.b)), escape(c.note));
            out += fmt::format("      <ba:Start {} />\n", xyz(to_game_frame(pa)));
            out += fmt::format("      <ba:End {} />\n", xyz(to_game_frame(pb)));
            out += "    </ba:Connector>\n";
        }
        out += "  </ba:Connectors>\n";
    }
    if (!scene.control().sequence().empty()) {
        out += "  <ba:ControlSequence>\n";
        for (const auto& e : scene.control().sequence()) {
            out += fmt::format("    <ba:Press time=\"{}\" key=\"{}\" holdFor=\"{}\" />\n", num(e.time), escape(e.key),
                               num(e.hold_for));
        }
        out += "  </ba:ControlSequence>\n";
    }
    out += "</Machine>\n";
    return out;
}

}  // namespace buildarena::io
