// SPDX-License-Identifier: Apache-2.0
#include "buildarena/control.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "buildarena/action_types.hpp"
#include "buildarena/format.hpp"

namespace buildarena::control {

bool is_legal_key(std::string_view key)
{
    if (key == "UpArrow" || key == "DownArrow" || key == "LeftArrow" || key == "RightArrow")
        return true;
    for (std::string_view prefix : {"Alpha", "Keypad"}) {
        if (key.size() == prefix.size() + 1 && key.substr(0, prefix.size()) == prefix) {
            const char digit = key.back();
            return digit >= '0' && digit <= '9';
        }
    }
    return false;
}

void ControlState::bind_key(std::string_view key, std::string_view action, BlockId block_id,
                            std::span<const std::string> available_actions)
{
    if (!is_legal_key(key))
        throw EngineError(ErrorCode::IllegalKey, {{"key", std::string(key)}});
    if (std::find(available_actions.begin(), available_actions.end(), action) == available_actions.end())
        throw EngineError(ErrorCode::UnknownAction, {{"action", std::string(action)}, {"block", block_id}});
    KeyBinding binding{std::string(key), std::string(action), block_id};
    if (std::find(bindings_.begin(), bindings_.end(), binding) != bindings_.end())
        throw EngineError(ErrorCode::DuplicateBinding,
                          {{"key", std::string(key)}, {"action", std::string(action)}, {"block", block_id}});
    bindings_.push_back(std::move(binding));
}

bool ControlState::add_control_sequence(double time, std::string_view key, double hold_for, std::string motion_note)
{
    if (!std::isfinite(time) || time < 0.0)
        throw EngineError(ErrorCode::NegativeTime, {{"value", num(time)}});
    if (!std::isfinite(hold_for) || hold_for <= 0.0)
        throw EngineError(ErrorCode::NonPositiveHold, {{"value", num(hold_for)}});
    if (!is_bound(key))
        throw EngineError(ErrorCode::UnboundKey, {{"key", std::string(key)}});

    ControlSequenceEntry entry{time, std::string(key), hold_for, std::move(motion_note)};
    // stable: equal start times keep insertion order
    auto pos = std::upper_bound(sequence_.begin(), sequence_.end(), time,
                                [](double t, const ControlSequenceEntry& e) { return t < e.time; });
    const bool beyond = entry.beyond_window();
    sequence_.insert(pos, std::move(entry));
    return beyond;
}

std::set<ActiveAction> ControlState::active_actions_at(double t) const
{
    std::set<ActiveAction> out;
    if (t < 0.0 || t >= kControlWindow)
        return out;
    for (const auto& entry : sequence_) {
        if (entry.time > t)
            break;
        const double end = std::min(entry.time + entry.hold_for, kControlWindow);
        if (t >= end)
            continue;
        for (const auto& b : bindings_) {
            if (b.key == entry.key)
                out.emplace(b.block_id, b.action);
        }
    }
    return out;
}

std::vector<double> ControlState::breakpoints() const
{
    std::vector<double> out;
    for (const auto& entry : sequence_) {
        if (entry.beyond_window())
            continue;
        out.push_back(entry.time);
        out.push_back(std::min(entry.time + entry.hold_for, kControlWindow));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void ControlState::forget_block(BlockId block_id)
{
    std::erase_if(bindings_, [&](const KeyBinding& b) { return b.block_id == block_id; });
    std::erase_if(sequence_, [&](const ControlSequenceEntry& e) { return !is_bound(e.key); });
}

void ControlState::remap_blocks(const std::vector<std::pair<BlockId, BlockId>>& mapping)
{
    for (auto& b : bindings_) {
        for (const auto& [from, to] : mapping) {
            if (b.block_id == from) {
                b.block_id = to;
                break;
            }
        }
    }
}

bool ControlState::is_bound(std::string_view key) const
{
    return std::any_of(bindings_.begin(), bindings_.end(), [&](const KeyBinding& b) { return b.key == key; });
}

void ControlState::clear()
{
    bindings_.clear();
    sequence_.clear();
}

std::string review_control_config(const ControlState& state)
{
    std::string out;
    if (state.bindings().empty()) {
        out += "Control configuration: no bindings.\n";
    } else {
        out += fmt::format("Control configuration: {} binding(s).\n", state.bindings().size());
        for (const auto& b : state.bindings())
            out += fmt::format("- key {} -> {} on block #{}\n", b.key, b.action, b.block_id);
    }
    if (state.sequence().empty()) {
        out += "Control sequence: no entries.\n";
    } else {
        out += fmt::format("Control sequence: {} entr{} (window {} s).\n", state.sequence().size(),
                           state.sequence().size() == 1 ? "y" : "ies", num(kControlWindow));
        for (const auto& e : state.sequence()) {
            out += fmt::format("- t={} s press {} for {} s", num(e.time), e.key, num(e.hold_for));
            if (e.beyond_window())
                out += " [beyond the 30 s window, ignored]";
            else if (e.time + e.hold_for > kControlWindow)
                out += fmt::format(" [released at {} s by the window end]", num(kControlWindow));
            if (!e.motion_note.empty())
                out += fmt::format(": {}", e.motion_note);
            out += "\n";
        }
    }
    return out;
}

}  // namespace buildarena::control
