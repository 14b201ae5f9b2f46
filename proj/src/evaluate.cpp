// SPDX-License-Identifier: Apache-2.0
#include "buildarena/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>
#include <json.hpp>

#include "buildarena/format.hpp"

namespace buildarena::evaluate {

namespace {

using scene::Scene;

struct Aabb {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void add(const Vec3& p)
    {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
};

Aabb block_aabb(const Scene& scene, BlockId id)
{
    Aabb box;
    for (const auto& obb : scene.world_boxes(id)) {
        for (const auto& c : obb.corners())
            box.add(c);
    }
    return box;
}

// Lowest point of a block; wheels are treated as discs rather than boxes.
double lowest_point(const Scene& scene, BlockId id)
{
    const auto& spec = scene.spec_of(id);
    if (spec.is_wheel()) {
        const auto w = wheel_info(scene, id);
        const double az = std::min(1.0, std::abs(w.axis.z()));
        return w.center.z() - w.radius * std::sqrt(1.0 - az * az) - 0.5 * w.thickness * az;
    }
    return block_aabb(scene, id).lo.z();
}

double wrap_heading(double a)
{
    return std::atan2(std::sin(a), std::cos(a));
}

}  // namespace

WheelInfo wheel_info(const Scene& scene, BlockId id)
{
    const auto& b = scene.block(id);
    const auto& spec = scene.catalog().block_spec(b.type_id);
    WheelInfo w;
    w.id = id;
    w.center = b.pose.position;
    w.axis = b.pose.rotate(Vec3::UnitZ()) * (b.reversed ? -1.0 : 1.0);
    w.radius = spec.shape.x() / 2.0;
    w.thickness = spec.shape.z();
    w.rim_speed = spec.physical.wheel_rpm.value_or(0.0) * std::numbers::pi * spec.shape.x() / 60.0;
    const Vec3 roll = w.axis.cross(Vec3::UnitZ());
    if (roll.norm() > 1e-9)
        w.roll_direction = roll.normalized();
    return w;
}

std::vector<Vec3> heat_centers(const Scene& scene, BlockId id)
{
    const auto& b = scene.block(id);
    std::vector<Vec3> out;
    for (const auto& offset : scene.catalog().block_spec(b.type_id).physical.heat_offsets)
        out.push_back(b.pose.apply(offset));
    return out;
}

std::set<BlockId> heated_cannons(const Scene& scene)
{
    std::vector<std::pair<Vec3, double>> spheres;
    for (const auto& [id, b] : scene.blocks()) {
        const auto& spec = scene.catalog().block_spec(b.type_id);
        if (!spec.is_heater())
            continue;
        for (const auto& c : heat_centers(scene, id))
            spheres.emplace_back(c, *spec.physical.heat_radius);
    }
    std::set<BlockId> out;
    for (const auto& [id, b] : scene.blocks()) {
        const auto& spec = scene.catalog().block_spec(b.type_id);
        if (!spec.is_cannon())
            continue;
        for (const auto& region : spec.heat_regions) {
            const auto box = geometry::world_box(b.pose, region);
            for (const auto& [center, radius] : spheres) {
                if (geometry::sphere_obb_intersects(center, radius, box))
                    out.insert(id);
            }
        }
    }
    return out;
}

CannonInfo cannon_info(const Scene& scene, BlockId id, const std::set<BlockId>& heated)
{
    const auto& b = scene.block(id);
    const auto& spec = scene.catalog().block_spec(b.type_id);
    CannonInfo c;
    c.id = id;
    c.jet_direction = b.pose.rotate(Vec3::UnitX()).normalized();
    if (auto it = spec.anchors.find("inlet"); it != spec.anchors.end())
        c.inlet = b.pose.apply(it->second);
    if (auto it = spec.anchors.find("outlet"); it != spec.anchors.end())
        c.outlet = b.pose.apply(it->second);
    c.heated = heated.count(id) > 0;
    c.thrust = spec.physical.recoil_force.value_or(0.0);
    if (c.heated)
        c.thrust *= spec.physical.steam_multiplier.value_or(1.0);
    return c;
}

double total_mass(const Scene& scene)
{
    double m = 0.0;
    for (const auto& [id, b] : scene.blocks())
        m += scene.catalog().block_spec(b.type_id).mass;
    for (const auto& [id, c] : scene.connectors())
        m += scene.catalog().block_spec(c.type_id).mass;
    return m;
}

ThrustReport thrust_and_twr(const Scene& scene, const std::optional<std::set<BlockId>>& firing)
{
    ThrustReport report;
    const auto heated = heated_cannons(scene);
    for (const auto& [id, b] : scene.blocks()) {
        if (!scene.catalog().block_spec(b.type_id).is_cannon())
            continue;
        if (firing && !firing->count(id))
            continue;
        auto info = cannon_info(scene, id, heated);
        report.net_thrust += -info.jet_direction * info.thrust;
        report.cannons.push_back(std::move(info));
    }
    report.total_mass = total_mass(scene);
    // thrust pointing at the ground cannot lift the machine
    if (report.total_mass > 0.0)
        report.twr = std::max(0.0, report.net_thrust.z()) / report.total_mass;
    return report;
}

std::string_view to_string(TransportStatus status)
{
    switch (status) {
    case TransportStatus::ok: return "ok";
    case TransportStatus::no_controls: return "NoControls";
    case TransportStatus::no_ground_wheels: return "NoGroundWheels";
    }
    return "unknown";
}

TransportResult simulate_transport(const Scene& scene, const control::ControlState& controls,
                                   const TransportOptions& options)
{
    TransportResult result;
    result.trajectory.period = options.dt;
    const double duration = std::min(options.duration, control::kControlWindow);

    const bool has_entries = std::any_of(controls.sequence().begin(), controls.sequence().end(),
                                         [](const auto& e) { return !e.beyond_window(); });
    if (controls.bindings().empty() || !has_entries || !scene.started()) {
        result.status = TransportStatus::no_controls;
        return result;
    }

    // Machine frame: starting block at the protocol start, lowest point on z = 0.
    const Vec3 ref = scene.block(scene::kStartBlockId).pose.position;
    double ground = std::numeric_limits<double>::infinity();
    for (const auto& [id, b] : scene.blocks())
        ground = std::min(ground, lowest_point(scene, id));

    struct Contact {
        BlockId id;
        Eigen::Vector2d r;      // contact point relative to the reference, body frame
        Eigen::Vector2d roll;   // forward direction
        double rim_speed;
    };
    std::vector<Contact> contacts;
    const double max_tilt = std::sin(options.max_axis_tilt_degrees * std::numbers::pi / 180.0);
    for (const auto& [id, b] : scene.blocks()) {
        if (!scene.catalog().block_spec(b.type_id).is_wheel())
            continue;
        const auto w = wheel_info(scene, id);
        if (std::abs(w.axis.z()) > max_tilt || w.roll_direction.isZero())
            continue;
        if (lowest_point(scene, id) - ground > options.contact_tolerance)
            continue;
        const Vec3 rel = w.center - ref;
        contacts.push_back({id, {rel.x(), rel.y()}, {w.roll_direction.x(), w.roll_direction.y()}, w.rim_speed});
    }
    result.ground_wheels = static_cast<int>(contacts.size());

    const Vec3 origin(options.start.x(), options.start.y(), ref.z() - ground);
    // The cargo is dropped over the start point; it rides along when the machine covers that point.
    Eigen::Vector2d cargo_body(0.0, 0.0);
    for (const auto& [id, b] : scene.blocks()) {
        const auto box = block_aabb(scene, id);
        if (box.lo.x() - 1e-9 <= ref.x() && ref.x() <= box.hi.x() + 1e-9 && box.lo.y() - 1e-9 <= ref.y() &&
            ref.y() <= box.hi.y() + 1e-9)
            result.cargo_carried = true;
    }

    const bool track_cargo = options.subject == TransportSubject::cargo;
    auto subject_position = [&](double x, double y, double th) {
        if (track_cargo && !result.cargo_carried)
            return Vec3(origin.x(), origin.y(), 0.0);
        const double c = std::cos(th), s = std::sin(th);
        const Eigen::Vector2d p = Eigen::Vector2d(x, y) + Eigen::Matrix2d{{c, -s}, {s, c}} * cargo_body;
        return Vec3(p.x(), p.y(), track_cargo ? 0.0 : origin.z());
    };

    double x = origin.x(), y = origin.y(), th = 0.0;
    const int steps = static_cast<int>(std::llround(duration / options.dt));
    result.trajectory.samples.push_back({0.0, subject_position(x, y, th), th});
    if (contacts.empty()) {
        result.status = TransportStatus::no_ground_wheels;
        return result;
    }

    std::map<std::set<control::ActiveAction>, Eigen::Vector3d> cache;
    auto body_twist = [&](const std::set<control::ActiveAction>& active) -> Eigen::Vector3d {
        if (auto it = cache.find(active); it != cache.end())
            return it->second;
        Eigen::MatrixXd a(2 * contacts.size(), 3);
        Eigen::VectorXd rhs(2 * contacts.size());
        for (std::size_t i = 0; i < contacts.size(); ++i) {
            const auto& c = contacts[i];
            double command = 0.0;
            if (active.count({c.id, "spin_forward"}))
                command += 1.0;
            if (active.count({c.id, "spin_backward"}))
                command -= 1.0;
            command = std::clamp(command, -1.0, 1.0);
            const Eigen::Vector2d lat(-c.roll.y(), c.roll.x());
            const Eigen::Vector2d perp_r(-c.r.y(), c.r.x());
            a.row(2 * i) << c.roll.x(), c.roll.y(), c.roll.dot(perp_r);
            rhs(2 * i) = command * c.rim_speed;
            a.row(2 * i + 1) << lat.x(), lat.y(), lat.dot(perp_r);
            rhs(2 * i + 1) = 0.0;
        }
        Eigen::Vector3d twist = a.completeOrthogonalDecomposition().solve(rhs);
        cache.emplace(active, twist);
        return twist;
    };

    const Eigen::Vector2d start_xy = subject_position(x, y, th).head<2>();
    for (int k = 0; k < steps; ++k) {
        const double tm = (k + 0.5) * options.dt;
        const Eigen::Vector3d tw = body_twist(controls.active_actions_at(tm));
        const double w = tw.z();
        const double dth = w * options.dt;
        Eigen::Vector2d local;
        if (std::abs(dth) < 1e-12) {
            local = tw.head<2>() * options.dt;
        } else {
            const double sa = std::sin(dth) / w, ca = (1.0 - std::cos(dth)) / w;
            local = Eigen::Matrix2d{{sa, -ca}, {ca, sa}} * tw.head<2>();
        }
        const double c = std::cos(th), s = std::sin(th);
        x += c * local.x() - s * local.y();
        y += s * local.x() + c * local.y();
        th = wrap_heading(th + dth);
        const Vec3 p = subject_position(x, y, th);
        result.trajectory.samples.push_back({(k + 1) * options.dt, p, th});
        result.max_displacement = std::max(result.max_displacement, (p.head<2>() - start_xy).norm());
    }
    return result;
}

SupportResult evaluate_support(const Scene& scene, const SupportOptions& options)
{
    SupportResult result;
    if (!scene.started()) {
        result.reason = "no structure";
        return result;
    }
    // Recentre on the starting block; the drop height does not change footprints.
    const Vec3 ref = scene.block(scene::kStartBlockId).pose.position;
    const double edge = options.gap_width / 2.0;

    struct Footprint {
        BlockId id;
        Aabb box;
    };
    std::vector<Footprint> prints;
    for (const auto& [id, b] : scene.blocks()) {
        if (scene.catalog().block_spec(b.type_id).collision.empty())
            continue;
        Aabb box = block_aabb(scene, id);
        box.lo -= Vec3(ref.x(), ref.y(), 0.0);
        box.hi -= Vec3(ref.x(), ref.y(), 0.0);
        prints.push_back({id, box});
    }

    auto contacts_on = [&](int side) {
        std::vector<const Footprint*> bearing;
        for (const auto& f : prints) {
            const double overlap = side > 0 ? f.box.hi.y() - edge : -edge - f.box.lo.y();
            if (overlap >= options.min_bearing - 1e-9)
                bearing.push_back(&f);
        }
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto* f : bearing)
            lowest = std::min(lowest, f->box.lo.z());
        std::vector<BlockId> out;
        for (const auto* f : bearing) {
            if (f->box.lo.z() - lowest <= 1e-6)
                out.push_back(f->id);
        }
        return out;
    };
    result.north_contacts = contacts_on(+1);
    result.south_contacts = contacts_on(-1);

    const double cw = options.cargo_width / 2.0, cd = options.cargo_depth / 2.0;
    for (const auto& f : prints) {
        if (std::min(f.box.hi.x(), cw) - std::max(f.box.lo.x(), -cw) > 1e-9 &&
            std::min(f.box.hi.y(), cd) - std::max(f.box.lo.y(), -cd) > 1e-9)
            result.deck_blocks.push_back(f.id);
    }

    if (result.north_contacts.empty() || result.south_contacts.empty()) {
        result.reason = "the structure does not rest on both terrains";
        return result;
    }
    if (result.deck_blocks.empty()) {
        result.reason = "nothing under the cargo";
        return result;
    }

    // Undirected capacity graph over blocks plus a source (1) and sink (0) offset.
    std::map<BlockId, int> index;
    for (const auto& [id, b] : scene.blocks())
        index.emplace(id, static_cast<int>(index.size()) + 2);
    const int n = static_cast<int>(index.size()) + 2;
    std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
    auto link = [&](int u, int v, double c) {
        cap[u][v] += c;
        cap[v][u] += c;
    };
    for (const auto& [id, b] : scene.blocks()) {
        if (b.mounted_on && index.count(b.mounted_on->parent))
            link(index.at(id), index.at(b.mounted_on->parent), options.attachment_strength);
    }
    for (const auto& [cid, c] : scene.connectors())
        link(index.at(c.a.block), index.at(c.b.block), options.brace_strength);

    // connectivity: a deck block must reach both sides
    auto reachable = [&](int from) {
        std::vector<bool> seen(n, false);
        std::deque<int> queue{from};
        seen[from] = true;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 2; v < n; ++v) {
                if (!seen[v] && cap[u][v] > 0.0) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        return seen;
    };
    bool connected = false;
    for (BlockId d : result.deck_blocks) {
        const auto seen = reachable(index.at(d));
        const bool north = std::any_of(result.north_contacts.begin(), result.north_contacts.end(),
                                       [&](BlockId id) { return seen[index.at(id)]; });
        const bool south = std::any_of(result.south_contacts.begin(), result.south_contacts.end(),
                                       [&](BlockId id) { return seen[index.at(id)]; });
        connected = connected || (north && south);
    }
    if (!connected) {
        result.reason = "no connected path crosses the gap under the cargo";
        return result;
    }
    result.spans = true;

    const double inf = std::numeric_limits<double>::infinity();
    double capacity = 0.0;
    std::set<BlockId> south(result.south_contacts.begin(), result.south_contacts.end());
    for (BlockId id : result.north_contacts) {
        if (south.count(id)) {
            capacity += options.block_strength;
            continue;
        }
        cap[1][index.at(id)] = inf;
    }
    std::set<BlockId> north(result.north_contacts.begin(), result.north_contacts.end());
    for (BlockId id : result.south_contacts) {
        if (!north.count(id))
            cap[index.at(id)][0] = inf;
    }
    // Edmonds-Karp
    while (true) {
        std::vector<int> parent(n, -1);
        parent[1] = 1;
        std::deque<int> queue{1};
        while (!queue.empty() && parent[0] < 0) {
            const int u = queue.front();
            queue.pop_front();
            for (int v = 0; v < n; ++v) {
                if (parent[v] < 0 && cap[u][v] > 1e-12) {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if (parent[0] < 0)
            break;
        double push = inf;
        for (int v = 0; v != 1; v = parent[v])
            push = std::min(push, cap[parent[v]][v]);
        if (!std::isfinite(push))
            break;
        for (int v = 0; v != 1; v = parent[v]) {
            cap[parent[v]][v] -= push;
            cap[v][parent[v]] += push;
        }
        capacity += push;
    }
    result.load_capacity = capacity;
    return result;
}

LiftResult simulate_lift(const Scene& scene, const control::ControlState& controls, const LiftOptions& options)
{
    LiftResult result;
    result.trajectory.period = options.dt;
    if (!scene.started())
        return result;

    std::optional<std::set<BlockId>> firing;
    if (!controls.bindings().empty()) {
        firing.emplace();
        for (const auto& kb : controls.bindings()) {
            if (kb.action == "fire")
                firing->insert(kb.block_id);
        }
    }
    const auto report = thrust_and_twr(scene, firing);
    result.twr = report.twr;
    const double mass = report.total_mass;
    const Vec3 accel = mass > 0.0 ? Vec3(options.gravity * report.net_thrust / mass - options.gravity * Vec3::UnitZ())
                                  : Vec3::Zero();

    const double duration = std::min(options.duration, control::kControlWindow);
    const int steps = static_cast<int>(std::llround(duration / options.dt));
    Vec3 p = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    // Resting on the ground with no net upward force, friction holds it in place.
    const bool held = accel.z() <= 0.0;
    result.trajectory.samples.push_back({0.0, p, 0.0});
    double lateral_sum = 0.0;
    for (int k = 0; k < steps; ++k) {
        if (!held) {
            p += v * options.dt + 0.5 * accel * options.dt * options.dt;
            v += accel * options.dt;
        }
        result.trajectory.samples.push_back({(k + 1) * options.dt, p, 0.0});
        result.max_height = std::max(result.max_height, p.z());
        const double lateral = p.head<2>().norm();
        result.max_lateral_drift = std::max(result.max_lateral_drift, lateral);
        lateral_sum += lateral;
        result.max_speed = std::max(result.max_speed, v.norm());
    }
    if (steps > 0)
        result.mean_lateral_deviation = lateral_sum / steps;
    return result;
}

bool meets_threshold(double indicator, Comparison comparison, double threshold)
{
    return comparison == Comparison::gt ? indicator > threshold : indicator >= threshold;
}

Summary aggregate(std::span<const MetricsRecord> records)
{
    if (records.empty())
        throw EmptyInput("aggregate needs at least one record");
    Summary s;
    s.task_id = records.front().task_id;
    s.level = records.front().level;
    s.n = static_cast<int>(records.size());
    for (const auto& r : records) {
        if (r.task_id != s.task_id || r.level != s.level)
            throw std::invalid_argument("aggregate expects records of one task and level");
        s.successes += r.success ? 1 : 0;
        s.mean_parts += r.parts;
        s.mean_indicator += r.indicator;
        s.mean_input_tokens += static_cast<double>(r.cost.input_tokens);
        s.mean_output_tokens += static_cast<double>(r.cost.output_tokens);
        s.mean_requests += static_cast<double>(r.cost.llm_requests);
    }
    const double n = s.n;
    s.success_rate = 100.0 * s.successes / n;
    s.mean_parts /= n;
    s.mean_indicator /= n;
    s.mean_input_tokens /= n;
    s.mean_output_tokens /= n;
    s.mean_requests /= n;
    return s;
}

std::string records_csv(std::span<const MetricsRecord> records)
{
    std::string out = "task,level,sample,parts,success,indicator,input_tokens,output_tokens,requests,failure_reason\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.task_id, r.level, r.sample, r.parts, r.success ? 1 : 0,
                           num(r.indicator), r.cost.input_tokens, r.cost.output_tokens, r.cost.llm_requests,
                           r.failure_reason);
    }
    return out;
}

std::string summary_csv(const Summary& s)
{
    return fmt::format(
        "task,level,n,successes,success_rate,mean_parts,mean_indicator,mean_input_tokens,mean_output_tokens,mean_requests\n"
        "{},{},{},{},{},{},{},{},{},{}\n",
        s.task_id, s.level, s.n, s.successes, num(s.success_rate), num(s.mean_parts), num(s.mean_indicator),
        num(s.mean_input_tokens), num(s.mean_output_tokens), num(s.mean_requests));
}

std::string summary_json(const Summary& s, std::span<const MetricsRecord> records)
{
    nlohmann::ordered_json doc;
    doc["format"] = "buildarena.report";
    doc["version"] = 1;
    doc["summary"] = {
        {"task", s.task_id},
        {"level", s.level},
        {"n", s.n},
        {"successes", s.successes},
        {"success_rate", s.success_rate},
        {"mean_parts", s.mean_parts},
        {"mean_indicator", s.mean_indicator},
        {"mean_input_tokens", s.mean_input_tokens},
        {"mean_output_tokens", s.mean_output_tokens},
        {"mean_requests", s.mean_requests},
    };
    auto& rows = doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        rows.push_back({{"sample", r.sample},
                        {"parts", r.parts},
                        {"success", r.success},
                        {"indicator", r.indicator},
                        {"input_tokens", r.cost.input_tokens},
                        {"output_tokens", r.cost.output_tokens},
                        {"requests", r.cost.llm_requests},
                        {"failure_reason", r.failure_reason}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace buildarena::evaluate
