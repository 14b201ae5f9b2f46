// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "buildarena/control.hpp"
#include "buildarena/scene.hpp"

/// Desk-scale surrogate evaluators. None of these reproduce a full rigid-body engine;
/// each one keeps the indicator-plus-threshold decision structure of its task.
namespace buildarena::evaluate {

// ---------------------------------------------------------------------------
// Functional facts shared with the describe module

struct WheelInfo {
    BlockId id = 0;
    Vec3 center = Vec3::Zero();
    /// Spin axis including the flip sign.
    Vec3 axis = Vec3::UnitZ();
    /// Ground travel direction for spin_forward; zero when the wheel lies flat.
    Vec3 roll_direction = Vec3::Zero();
    double radius = 0.0;
    double thickness = 0.0;
    double rim_speed = 0.0;
};

struct CannonInfo {
    BlockId id = 0;
    Vec3 jet_direction = Vec3::UnitX();
    Vec3 inlet = Vec3::Zero();
    Vec3 outlet = Vec3::Zero();
    bool heated = false;
    double thrust = 0.0;
};

WheelInfo wheel_info(const scene::Scene& scene, BlockId id);
CannonInfo cannon_info(const scene::Scene& scene, BlockId id, const std::set<BlockId>& heated);
/// World centres of a heater's heat spheres.
std::vector<Vec3> heat_centers(const scene::Scene& scene, BlockId id);

double total_mass(const scene::Scene& scene);
std::set<BlockId> heated_cannons(const scene::Scene& scene);

struct ThrustReport {
    Vec3 net_thrust = Vec3::Zero();
    double total_mass = 0.0;
    double twr = 0.0;
    std::vector<CannonInfo> cannons;
};

/// `firing` restricts the sum to these cannons; all cannons fire when absent.
ThrustReport thrust_and_twr(const scene::Scene& scene, const std::optional<std::set<BlockId>>& firing = std::nullopt);

// ---------------------------------------------------------------------------
// Trajectories

struct TrajectorySample {
    double t = 0.0;
    Vec3 position = Vec3::Zero();
    double heading = 0.0;
};

struct Trajectory {
    double period = 0.04;
    std::vector<TrajectorySample> samples;
};

enum class TransportStatus { ok, no_controls, no_ground_wheels };
std::string_view to_string(TransportStatus status);

enum class TransportSubject { machine, cargo };

struct TransportOptions {
    double duration = control::kControlWindow;
    double dt = 0.04;
    Vec3 start = Vec3::Zero();
    TransportSubject subject = TransportSubject::machine;
    double contact_tolerance = 1e-6;
    double max_axis_tilt_degrees = 5.0;
};

struct TransportResult {
    TransportStatus status = TransportStatus::ok;
    Trajectory trajectory;
    double max_displacement = 0.0;
    int ground_wheels = 0;
    bool cargo_carried = false;
};

TransportResult simulate_transport(const scene::Scene& scene, const control::ControlState& controls,
                                   const TransportOptions& options = {});

struct SupportOptions {
    double gap_width = 5.0;
    double terrain_height = 5.0;
    double cargo_width = 2.5;
    double cargo_depth = 2.5;
    double min_bearing = 0.5;
    double attachment_strength = 10.0;
    double brace_strength = 5.0;
    double block_strength = 10.0;
};

struct SupportResult {
    bool spans = false;
    double load_capacity = 0.0;
    std::vector<BlockId> north_contacts;
    std::vector<BlockId> south_contacts;
    std::vector<BlockId> deck_blocks;
    std::string reason;
};

SupportResult evaluate_support(const scene::Scene& scene, const SupportOptions& options = {});

struct LiftOptions {
    double duration = control::kControlWindow;
    double dt = 0.04;
    double gravity = 9.81;
};

struct LiftResult {
    Trajectory trajectory;
    double max_height = 0.0;
    double max_lateral_drift = 0.0;
    double mean_lateral_deviation = 0.0;
    double max_speed = 0.0;
    double twr = 0.0;
};

/// Cannons fire for the whole window; with bindings present only bound `fire` cannons fire.
LiftResult simulate_lift(const scene::Scene& scene, const control::ControlState& controls,
                         const LiftOptions& options = {});

// ---------------------------------------------------------------------------
// Metrics

struct CostCounters {
    long long input_tokens = 0;
    long long output_tokens = 0;
    long long llm_requests = 0;

    CostCounters& operator+=(const CostCounters& other)
    {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        llm_requests += other.llm_requests;
        return *this;
    }
    friend bool operator==(const CostCounters&, const CostCounters&) = default;
};

struct MetricsRecord {
    std::string task_id;
    int level = 1;
    int sample = 0;
    int parts = 0;
    bool success = false;
    double indicator = 0.0;
    CostCounters cost;
    std::string failure_reason;
};

struct Summary {
    std::string task_id;
    int level = 1;
    int n = 0;
    int successes = 0;
    /// Percent.
    double success_rate = 0.0;
    double mean_parts = 0.0;
    double mean_indicator = 0.0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
    double mean_requests = 0.0;
};

struct EmptyInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Throws EmptyInput for no records, std::invalid_argument for mixed tasks.
Summary aggregate(std::span<const MetricsRecord> records);

enum class Comparison { gt, ge };
bool meets_threshold(double indicator, Comparison comparison, double threshold);

std::string records_csv(std::span<const MetricsRecord> records);
std::string summary_csv(const Summary& summary);
std::string summary_json(const Summary& summary, std::span<const MetricsRecord> records);

}  // namespace buildarena::evaluate
