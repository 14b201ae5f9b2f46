// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "buildarena/math.hpp"

namespace buildarena::control {

inline constexpr double kControlWindow = 30.0;

/// UpArrow, DownArrow, LeftArrow, RightArrow, Alpha0..Alpha9, Keypad0..Keypad9.
bool is_legal_key(std::string_view key);

struct KeyBinding {
    std::string key;
    std::string action;
    BlockId block_id = 0;

    friend bool operator==(const KeyBinding&, const KeyBinding&) = default;
};

struct ControlSequenceEntry {
    double time = 0.0;
    std::string key;
    double hold_for = 0.0;
    std::string motion_note;

    /// Starts at or after the window end; kept for the record but never active.
    bool beyond_window() const { return time >= kControlWindow; }

    friend bool operator==(const ControlSequenceEntry&, const ControlSequenceEntry&) = default;
};

using ActiveAction = std::pair<BlockId, std::string>;

/// Bindings plus the time-sorted open-loop sequence. Errors are raised as EngineError.
class ControlState {
public:
    /// `available_actions` is the control set of the target block type.
    void bind_key(std::string_view key, std::string_view action, BlockId block_id,
                  std::span<const std::string> available_actions);

    /// Returns true when the entry starts beyond the window (accepted, inert).
    bool add_control_sequence(double time, std::string_view key, double hold_for, std::string motion_note = {});

    /// Actions whose key is held at t: time <= t < min(time + hold_for, window).
    std::set<ActiveAction> active_actions_at(double t) const;

    /// Entry boundaries clipped to the window, sorted and unique.
    std::vector<double> breakpoints() const;

    /// Drops bindings of a removed block and sequence entries left without a binding.
    void forget_block(BlockId block_id);
    void remap_blocks(const std::vector<std::pair<BlockId, BlockId>>& mapping);

    bool is_bound(std::string_view key) const;
    bool empty() const { return bindings_.empty() && sequence_.empty(); }
    void clear();

    const std::vector<KeyBinding>& bindings() const { return bindings_; }
    const std::vector<ControlSequenceEntry>& sequence() const { return sequence_; }

    friend bool operator==(const ControlState&, const ControlState&) = default;

private:
    std::vector<KeyBinding> bindings_;
    std::vector<ControlSequenceEntry> sequence_;
};

/// Deterministic listing of bindings and timeline.
std::string review_control_config(const ControlState& state);

}  // namespace buildarena::control
