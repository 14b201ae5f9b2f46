// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations and random generators shared by the unit tests and
// the acceptance binary.
#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "buildarena/geometry.hpp"
#include "fixtures.hpp"

namespace buildarena::testing {

/// Exact fraction over 64-bit integers; enough for the catalog's short decimals.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d)
    {
        if (den == 0)
            throw std::domain_error("zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const auto g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    /// Parses "-12.375" style text exactly.
    static Rational from_decimal(const std::string& text)
    {
        std::int64_t n = 0, d = 1;
        bool negative = false, fraction = false;
        for (char c : text) {
            if (c == '-' && n == 0 && !fraction)
                negative = true;
            else if (c == '.')
                fraction = true;
            else if (c >= '0' && c <= '9') {
                n = n * 10 + (c - '0');
                if (fraction)
                    d *= 10;
            } else
                throw std::invalid_argument("not a plain decimal: " + text);
        }
        return {negative ? -n : n, d};
    }

    friend Rational operator+(const Rational& a, const Rational& b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
    friend Rational operator*(const Rational& a, const Rational& b) { return {a.num * b.num, a.den * b.den}; }
    friend Rational operator/(const Rational& a, const Rational& b) { return {a.num * b.den, a.den * b.num}; }
    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
};

inline Quat random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Quat q(n(rng), n(rng), n(rng), n(rng));
    q.normalize();
    return q;
}

inline std::pair<geometry::Obb, geometry::Obb> random_obb_pair(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> extent(0.2, 1.0);
    std::uniform_real_distribution<double> offset(-1.8, 1.8);
    geometry::Obb a, b;
    a.center = Vec3::Zero();
    a.half_extents = Vec3(extent(rng), extent(rng), extent(rng));
    a.orientation = random_rotation(rng);
    b.center = Vec3(offset(rng), offset(rng), offset(rng));
    b.half_extents = Vec3(extent(rng), extent(rng), extent(rng));
    b.orientation = random_rotation(rng);
    return {a, b};
}

/// Largest normalized gap over the fifteen candidate axes: positive means separated by at
/// least that much, negative means every axis overlaps by at least its magnitude.
inline double sat_signed_separation(const geometry::Obb& a, const geometry::Obb& b)
{
    const Eigen::Matrix3d ra = a.orientation.toRotationMatrix();
    const Eigen::Matrix3d rb = b.orientation.toRotationMatrix();
    std::vector<Vec3> axes;
    for (int i = 0; i < 3; ++i) {
        axes.push_back(ra.col(i));
        axes.push_back(rb.col(i));
        for (int j = 0; j < 3; ++j)
            axes.push_back(ra.col(i).cross(rb.col(j)));
    }
    const Vec3 t = b.center - a.center;
    double best = -1e300;
    for (Vec3 axis : axes) {
        const double len = axis.norm();
        if (len < 1e-9)
            continue;
        axis /= len;
        double radius = 0.0;
        for (int k = 0; k < 3; ++k)
            radius += a.half_extents[k] * std::abs(ra.col(k).dot(axis)) + b.half_extents[k] * std::abs(rb.col(k).dot(axis));
        best = std::max(best, std::abs(t.dot(axis)) - radius);
    }
    return best;
}

/// Point-membership estimate: samples inside box `a`, restricted to the part of it that can
/// hold points of `b`, and reports whether any sample lies strictly inside both.
inline bool monte_carlo_overlap(const geometry::Obb& a, const geometry::Obb& b, int samples, std::mt19937_64& rng)
{
    const Eigen::Matrix3d ra = a.orientation.toRotationMatrix();
    const Eigen::Matrix3d rb = b.orientation.toRotationMatrix();
    // AABB of b in a's frame.
    const Vec3 c = ra.transpose() * (b.center - a.center);
    const Eigen::Matrix3d m = (ra.transpose() * rb).cwiseAbs();
    const Vec3 r = m * b.half_extents;
    Vec3 lo = (c - r).cwiseMax(-a.half_extents);
    Vec3 hi = (c + r).cwiseMin(a.half_extents);
    if ((hi - lo).minCoeff() <= 0.0)
        return false;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Matrix3d to_b = rb.transpose() * ra;
    const Vec3 shift = rb.transpose() * (a.center - b.center);
    for (int i = 0; i < samples; ++i) {
        const Vec3 p(lo.x() + (hi.x() - lo.x()) * u(rng), lo.y() + (hi.y() - lo.y()) * u(rng),
                     lo.z() + (hi.z() - lo.z()) * u(rng));
        const Vec3 q = to_b * p + shift;
        if (std::abs(q.x()) < b.half_extents.x() && std::abs(q.y()) < b.half_extents.y() && std::abs(q.z()) < b.half_extents.z())
            return true;
    }
    return false;
}

inline const std::vector<std::string>& compass_words()
{
    static const std::vector<std::string> words{"up", "down", "north", "south", "east", "west"};
    return words;
}

/// Random action against the current state of `scene`: mostly plausible, sometimes invalid.
inline Action random_action(const scene::Scene& scene, std::mt19937_64& rng)
{
    using nlohmann::json;
    const auto pick = [&](auto const& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
    std::vector<int> ids;
    for (const auto& [id, b] : scene.blocks())
        ids.push_back(id);
    if (ids.empty())
        return actions::make_action(ActionCategory::build, "start", {{"note", "root"}});
    const auto face_of = [&](int id) {
        const auto& spec = scene.spec_of(id);
        if (spec.faces.empty())
            return std::string("top");
        return pick(spec.faces).face_id;
    };
    static const std::vector<std::string> types{"SmallWoodenBlock", "SmallWoodenBlock", "PoweredWheel", "WaterCannon", "Torch"};
    const int roll = std::uniform_int_distribution<int>(0, 99)(rng);
    if (roll < 50) {
        const int base = pick(ids);
        json args{{"base_block", base}, {"face", face_of(base)}, {"new_block", pick(types)},
                  {"note", "part " + std::to_string(scene.next_block_id())}};
        if (rng() % 2)
            args["pointing"] = pick(compass_words());
        return actions::make_action(ActionCategory::build, "attach_block_to", args);
    }
    if (roll < 60) {
        const int a = pick(ids), b = pick(ids);
        return actions::make_action(ActionCategory::build, "connect_blocks",
                                    {{"block_a", a}, {"face_a", face_of(a)}, {"block_b", b}, {"face_b", face_of(b)},
                                     {"connector", rng() % 3 ? "Brace" : "Winch"}});
    }
    if (roll < 70) {
        static const std::vector<double> angles{90.0, -90.0, 45.0, 180.0, 30.0, 360.0};
        return actions::make_action(ActionCategory::refine, "twist_block", {{"block", pick(ids)}, {"angle", pick(angles)}});
    }
    if (roll < 78) {
        static const std::vector<double> steps{-0.5, 0.0, 0.25, 0.5};
        return actions::make_action(ActionCategory::refine, "translate_block",
                                    {{"block", pick(ids)}, {"shift", {pick(steps), pick(steps), pick(steps)}}});
    }
    if (roll < 85)
        return actions::make_action(ActionCategory::refine, "flip_block", {{"block", pick(ids)}});
    if (roll < 94)
        return actions::make_action(ActionCategory::build, "remove_block", {{"block", pick(ids)}});
    if (roll < 97) {
        static const std::vector<std::string> keys{"Alpha1", "UpArrow", "Keypad3"};
        static const std::vector<std::string> acts{"spin_forward", "spin_backward", "fire"};
        return actions::make_action(ActionCategory::control, "bind_key",
                                    {{"key", pick(keys)}, {"action", pick(acts)}, {"block", pick(ids)}});
    }
    static const std::vector<std::string> keys{"Alpha1", "UpArrow", "Keypad3"};
    return actions::make_action(ActionCategory::control, "add_control_sequence",
                                {{"time", static_cast<double>(rng() % 40)}, {"key", pick(keys)}, {"hold_for", 1.5}});
}

/// Workbench after `accepted` successful random mutations (rejected attempts stay in the log).
inline actions::Workbench random_trajectory(std::uint64_t seed, int accepted)
{
    std::mt19937_64 rng(seed);
    actions::Workbench bench(shared_catalog());
    std::uniform_int_distribution<int> quarter(0, 3);
    must(bench, "start",
         {{"note", "root"}, {"init_shift", {0, 0, static_cast<double>(seed % 5)}},
          {"init_rotation", {0, 0, 90.0 * quarter(rng)}}});
    int ok = 1;
    for (int attempt = 0; ok < accepted && attempt < accepted * 50; ++attempt)
        ok += bench.apply(random_action(bench.scene(), rng)).ok;
    return bench;
}

/// Mixed stream of valid, invalid and garbage request lines for the tool server.
inline std::vector<std::string> fuzz_requests(std::mt19937_64& rng, int count)
{
    using nlohmann::json;
    std::vector<std::string> lines;
    const std::vector<std::string> sessions{"alpha", "beta"};
    for (const auto& s : sessions)
        lines.push_back(json{{"id", "init-" + s}, {"session", s}, {"name", "start"}, {"arguments", {{"note", s}}}}.dump());
    // Shadow scenes track each session so generated actions stay plausible.
    std::map<std::string, actions::Workbench> shadow;
    for (const auto& s : sessions) {
        shadow.emplace(s, actions::Workbench(shared_catalog()));
        must(shadow.at(s), "start", {{"note", s}});
    }
    std::uniform_int_distribution<int> percent(0, 99);
    for (int i = static_cast<int>(lines.size()); i < count; ++i) {
        const std::string& s = sessions[rng() % sessions.size()];
        const int roll = percent(rng);
        json id = (i % 3 == 0) ? json(i) : json("req-" + std::to_string(i));
        if (roll < 45) {
            auto action = random_action(shadow.at(s).scene(), rng);
            shadow.at(s).apply(action);
            json req{{"id", id}, {"session", s}, {"name", action.name}, {"arguments", action.arguments}};
            if (rng() % 2)
                req["category"] = to_string(action.category);
            lines.push_back(req.dump());
        } else if (roll < 60) {
            std::string garbage;
            const int len = 1 + static_cast<int>(rng() % 40);
            for (int k = 0; k < len; ++k) {
                char c = static_cast<char>(rng() % 256);
                garbage += (c == '\n' || c == '\r') ? '?' : c;
            }
            lines.push_back(rng() % 4 ? garbage : std::string("\xc2\xa1\xc2\xa1\xc2\xa1"));
        } else if (roll < 70) {
            const std::string full = json{{"id", id}, {"session", s}, {"name", "attach_block_to"},
                                          {"arguments", {{"base_block", 0}, {"face", "top"}, {"new_block", "Torch"}}}}.dump();
            lines.push_back(full.substr(0, 1 + rng() % (full.size() - 1)));
        } else if (roll < 80) {
            static const std::vector<json> broken{
                json{{"name", 42}},
                json{{"name", "attach_block_to"}, {"arguments", "top"}},
                json{{"name", "start"}, {"category", "teleport"}},
                json{{"name", "twist_block"}, {"arguments", {{"block", "#999"}, {"angle", "ninety"}}}},
                json{{"name", "translate_block"}, {"arguments", {{"block", 1}, {"shift", {1, 2}}}}},
                json{{"name", "connect_blocks"}, {"category", "query"}, {"arguments", json::object()}},
                json::array({1, 2, 3}),
                json{{"session", 7}, {"name", "start"}},
                json{{"method", 3}},
                json{{"name", "bind_key"}, {"arguments", {{"key", "Space"}, {"action", "fire"}, {"block", 1}}}},
            };
            json req = broken[rng() % broken.size()];
            if (req.is_object())
                req["id"] = id;
            lines.push_back(req.dump());
        } else if (roll < 88) {
            static const std::vector<std::string> names{"teleport", "explode", "", "get_machine_summary", "get_block_detail",
                                                        "get_free_faces", "describe_block_type", "get_part_count",
                                                        "review_control_config"};
            lines.push_back(json{{"id", id}, {"session", s}, {"name", names[rng() % names.size()]},
                                 {"arguments", {{"block", rng() % 6}, {"type", "Torch"}}}}
                                .dump());
        } else if (roll < 96) {
            static const std::vector<std::string> methods{"state_hash", "check_invariants", "list_actions", "export", "warp"};
            lines.push_back(json{{"id", id}, {"session", s}, {"method", methods[rng() % methods.size()]}}.dump());
        } else {
            static const std::vector<std::string> phases{"begin_refine", "begin_assemble", "reset", "start"};
            const std::string name = phases[rng() % phases.size()];
            shadow.at(s).apply(actions::make_action(actions::registered_category(name).value(), name));
            lines.push_back(json{{"id", id}, {"session", s}, {"name", name}}.dump());
        }
    }
    return lines;
}

}  // namespace buildarena::testing
