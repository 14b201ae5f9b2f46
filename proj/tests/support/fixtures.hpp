// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "buildarena/actions.hpp"
#include "buildarena/catalog.hpp"

namespace buildarena::testing {

inline std::shared_ptr<const catalog::Catalog> shared_catalog()
{
    static const auto catalog = catalog::load_default_catalog();
    return catalog;
}

/// Applies an action through the registry and aborts the fixture if it fails.
inline ActionResult must(actions::Workbench& bench, std::string name, nlohmann::json args = nlohmann::json::object())
{
    const auto category = actions::registered_category(name).value_or(ActionCategory::query);
    auto result = bench.apply(actions::make_action(category, name, std::move(args)));
    if (!result.ok)
        throw std::runtime_error("fixture action " + name + " failed: " + result.description);
    return result;
}

inline ActionResult act(actions::Workbench& bench, std::string name, nlohmann::json args = nlohmann::json::object())
{
    const auto category = actions::registered_category(name).value_or(ActionCategory::query);
    return bench.apply(actions::make_action(category, std::move(name), std::move(args)));
}

/// Starting block with a cannon on its east face jetting down and a torch on its top face.
/// With `heated` false the torch sits on the west face, out of reach of the cannon.
inline actions::Workbench minimal_engine(bool heated = true)
{
    actions::Workbench bench(shared_catalog());
    must(bench, "start", {{"note", "core"}});
    must(bench, "attach_block_to",
         {{"base_block", 0}, {"face", "east"}, {"new_block", "WaterCannon"}, {"note", "cannon"}, {"pointing", "down"}});
    if (heated)
        must(bench, "attach_block_to",
             {{"base_block", 0}, {"face", "top"}, {"new_block", "Torch"}, {"note", "torch"}, {"pointing", "east"}});
    else
        must(bench, "attach_block_to",
             {{"base_block", 0}, {"face", "west"}, {"new_block", "Torch"}, {"note", "torch"}, {"pointing", "up"}});
    return bench;
}

struct CarIds {
    int front_east = 0, front_west = 0, rear_east = 0, rear_west = 0;
};

/// Spine of four cubes along y with wheels on the outer cubes' east and west faces.
/// Wheel centres sit at (+-0.75, +-2, 0); the rims reach z = -1 while the spine stays above.
inline actions::Workbench four_wheel_car(CarIds* ids = nullptr)
{
    actions::Workbench bench(shared_catalog());
    must(bench, "start", {{"note", "chassis core"}});
    must(bench, "attach_block_to", {{"base_block", 0}, {"face", "north"}, {"new_block", "SmallWoodenBlock"}, {"note", "spine n1"}});
    must(bench, "attach_block_to", {{"base_block", 1}, {"face", "north"}, {"new_block", "SmallWoodenBlock"}, {"note", "spine n2"}});
    must(bench, "attach_block_to", {{"base_block", 0}, {"face", "south"}, {"new_block", "SmallWoodenBlock"}, {"note", "spine s1"}});
    must(bench, "attach_block_to", {{"base_block", 3}, {"face", "south"}, {"new_block", "SmallWoodenBlock"}, {"note", "spine s2"}});
    CarIds local;
    local.front_east = must(bench, "attach_block_to", {{"base_block", 2}, {"face", "east"}, {"new_block", "PoweredWheel"}, {"note", "front east wheel"}}).state_delta.created_blocks.at(0);
    local.front_west = must(bench, "attach_block_to", {{"base_block", 2}, {"face", "west"}, {"new_block", "PoweredWheel"}, {"note", "front west wheel"}}).state_delta.created_blocks.at(0);
    local.rear_east = must(bench, "attach_block_to", {{"base_block", 4}, {"face", "east"}, {"new_block", "PoweredWheel"}, {"note", "rear east wheel"}}).state_delta.created_blocks.at(0);
    local.rear_west = must(bench, "attach_block_to", {{"base_block", 4}, {"face", "west"}, {"new_block", "PoweredWheel"}, {"note", "rear west wheel"}}).state_delta.created_blocks.at(0);
    if (ids)
        *ids = local;
    return bench;
}

/// Car that drives straight: west wheels flipped so every wheel rolls the same way on Alpha1.
inline actions::Workbench straight_drive_car(double hold = 3.0)
{
    CarIds ids;
    auto bench = four_wheel_car(&ids);
    must(bench, "flip_block", {{"block", ids.front_west}});
    must(bench, "flip_block", {{"block", ids.rear_west}});
    for (int id : {ids.front_east, ids.front_west, ids.rear_east, ids.rear_west})
        must(bench, "bind_key", {{"key", "Alpha1"}, {"action", "spin_forward"}, {"block", id}});
    must(bench, "add_control_sequence", {{"time", 0.0}, {"key", "Alpha1"}, {"hold_for", hold}});
    return bench;
}

/// Unflipped car: east wheels roll south, west wheels roll north, so the machine spins in place.
inline actions::Workbench spinning_car(double hold = 3.0)
{
    CarIds ids;
    auto bench = four_wheel_car(&ids);
    for (int id : {ids.front_east, ids.front_west, ids.rear_east, ids.rear_west})
        must(bench, "bind_key", {{"key", "Alpha1"}, {"action", "spin_forward"}, {"block", id}});
    must(bench, "add_control_sequence", {{"time", 0.0}, {"key", "Alpha1"}, {"hold_for", hold}});
    return bench;
}

inline std::string tool_call(const std::string& name, const nlohmann::json& args)
{
    return "<tool_call>" + nlohmann::json{{"name", name}, {"arguments", args}}.dump() + "</tool_call>";
}

/// Scripted run for lift_lv1: plan, one draft approved at once, then start plus three
/// attachments, a summary query and completion. Every call reports (10 in, 5 out) tokens.
inline nlohmann::json four_block_script(bool heated = true)
{
    using nlohmann::json;
    const std::string torch_face = heated ? "top" : "west";
    const std::string torch_pointing = heated ? "east" : "up";
    return json{
        {"usage", {{"input", 10}, {"output", 5}}},
        {"planner", {"Plan follows.\n<building_plan>\n<overall_structure>one heated cannon under a core block</overall_structure>\n</building_plan>"}},
        {"drafter", {"1 - StartingBlock - core - origin\n2 - WaterCannon - cannon - east\n3 - Torch - heater - top\n4 - SmallWoodenBlock - ballast - west"}},
        {"reviewer", {"The placements are consistent. TERMINATE"}},
        {"guidance",
         {"Start the machine at the origin.", "Attach the water cannon to the east face pointing down.",
          "Attach the torch.", "Attach a small wooden block to the west face.", "Show me the machine summary.",
          "The structure matches the blueprint. TERMINATE"}},
        {"builder",
         {tool_call("start", {{"note", "core"}}),
          tool_call("attach_block_to", {{"base_block", 0}, {"face", "east"}, {"new_block", "WaterCannon"}, {"note", "cannon"}, {"pointing", "down"}}),
          tool_call("attach_block_to", {{"base_block", 0}, {"face", torch_face}, {"new_block", "Torch"}, {"note", "heater"}, {"pointing", torch_pointing}}),
          tool_call("attach_block_to", {{"base_block", 0}, {"face", "south"}, {"new_block", "SmallWoodenBlock"}, {"note", "ballast"}}),
          tool_call("get_machine_summary", json::object())}},
    };
}

}  // namespace buildarena::testing
