// SPDX-License-Identifier: Apache-2.0
//
// Every sentence the engine shows to an agent. Agents pattern-match on this wording,
// so edits here change the golden files under tests/golden.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "buildarena/describe.hpp"

namespace buildarena::describe {

namespace {

constexpr std::pair<std::string_view, std::string_view> kTemplates[] = {
    // errors
    {"error.OverlapConflict",
     "OverlapConflict: block {block} would overlap block {other}. Nothing was changed. Try a different face, "
     "twist or translate the block, or remove the obstacle first."},
    {"error.FaceOccupied",
     "FaceOccupied: the {face} face of block {block} is already used by {occupant}. Nothing was changed. "
     "Use get_free_faces to list the free faces."},
    {"error.InvalidFace", "InvalidFace: block {block} has no usable face '{face}'. {detail}"},
    {"error.ExcessConnection",
     "ExcessConnection: the {face} face of block {block} already holds {cap} connector(s), the per-face limit. "
     "Nothing was changed."},
    {"error.UnknownBlock", "UnknownBlock: no block matches '{ref}'.{candidates}"},
    {"error.UnknownBlockType", "UnknownBlockType: '{type}' is not a catalog block type. Known types: {types}."},
    {"error.StartingBlockProtected",
     "StartingBlockProtected: the starting block #0 cannot be {verb}. It stays at the base of every build."},
    {"error.ConnectorSpanExceeded",
     "ConnectorSpanExceeded: the connector would span {span} units, more than the limit of {max_span}. "
     "Nothing was changed."},
    {"error.PhaseViolation", "PhaseViolation: {operation} is not allowed {situation}."},
    {"error.MalformedArguments", "MalformedArguments: {detail}"},
    {"error.IllegalKey",
     "IllegalKey: '{key}' is not a legal key. Use UpArrow, DownArrow, LeftArrow, RightArrow, Alpha0-Alpha9 or "
     "Keypad0-Keypad9."},
    {"error.UnknownAction", "UnknownAction: block {block} has no action '{action}'. Available actions: {actions}."},
    {"error.DuplicateBinding", "DuplicateBinding: key {key} is already bound to {action} on block {block}."},
    {"error.UnboundKey", "UnboundKey: key {key} is not bound to any action. Bind it with bind_key first."},
    {"error.NonPositiveHold", "NonPositiveHold: hold_for must be greater than 0, got {value}."},
    {"error.NegativeTime", "NegativeTime: time must be 0 or later, got {value}."},

    // action results
    {"ok.start", "Starting block #0 placed at {position}{rotation}. It has 6 free faces: {faces}."},
    {"ok.attach", "Attached {block} to the {face} face of {parent}. Center {position}.{function}"},
    {"ok.connect",
     "Connected {kind} connector #{id} between the {face_a} face of {a} and the {face_b} face of {b}, "
     "span {span}."},
    {"ok.remove", "Removed {blocks}{connectors}. The machine now has {parts} part(s) besides the starting block."},
    {"ok.twist", "Twisted {block} {angle} degrees clockwise about the normal of its mounting face. Center {position}.{function}"},
    {"ok.translate", "Moved {block} by {shift}. Center {position}."},
    {"ok.flip", "Reversed {block}.{function}"},
    {"ok.reset", "The scene was reset. Call start to place a new starting block."},
    {"ok.phase", "Entered the {phase} phase."},
    {"ok.save", "Saved the finalized machine as substructure '{name}' ({parts} part(s) besides its starting block)."},
    {"ok.merge",
     "Merged substructure '{name}' onto the {face} face of {parent}: {count} block(s) added as {ids}."},
    {"ok.bind", "Key {key} now triggers {action} on {block}."},
    {"ok.sequence", "At t={time} s key {key} is pressed and held for {hold} s."},
    {"ok.sequence_beyond",
     "At t={time} s key {key} is pressed and held for {hold} s. Warning: this starts after the 30 s window "
     "and will be ignored."},
    {"ok.part_count", "Part count: {count} ({basis})."},

    // summaries
    {"summary.unstarted", "No machine yet. Call start to place the starting block."},
    {"summary.header", "Machine: {blocks} block(s), {connectors} connector(s), phase {phase}, total mass {mass}."},
    {"summary.block", "{ref} at {position}, {orientation}{mount}.{function}"},
    {"summary.connectors_none", "Connectors: none."},
    {"summary.connector", "- {kind} #{id}: {face_a} face of {a} <-> {face_b} face of {b}, span {span}"},
    {"summary.controls_none", "Controllable actions: none."},
    {"summary.controls", "Controllable actions: {actions}."},
    {"summary.control_state", "Control: {bindings} binding(s), {entries} sequence entr{plural}."},

    // block detail
    {"detail.header", "{ref}: center {position}, {orientation}{mount}."},
    {"detail.no_faces", "It has no attachable faces."},
    {"detail.face", "- {face} face: {status}"},
    {"detail.free", "free"},
    {"detail.attached", "attachment with {other}"},
    {"detail.connectors", "{count} connector(s) ({ids}), free for attachment: no"},
    {"detail.free_faces", "Free faces of {ref}: {faces}."},
    {"detail.free_faces_none", "{ref} has no free faces."},

    // functional phrases
    {"fn.wheel", " Wheel axis {axis}; spinning forward it rolls {roll}."},
    {"fn.wheel_flat", " Wheel axis {axis}; the wheel lies flat and cannot roll on the ground."},
    {"fn.cannon",
     " Water cannon jetting {jet}, pushing the machine {thrust_dir}; inlet {inlet}, outlet {outlet}; {mode}."},
    {"fn.cannon_water", "water mode, recoil {thrust}"},
    {"fn.cannon_steam", "heated, it fires steam instead of water in steam mode, recoil {thrust}"},
    {"fn.torch", " Torch pointing {dir}; heat sphere center {heat}, radius {radius}."},
};

}  // namespace

std::string_view template_text(std::string_view key)
{
    for (const auto& [k, v] : kTemplates) {
        if (k == key)
            return v;
    }
    throw std::out_of_range("no template " + std::string(key));
}

std::vector<std::string> template_keys()
{
    std::vector<std::string> out;
    for (const auto& [k, v] : kTemplates)
        out.emplace_back(k);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace buildarena::describe
