// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "buildarena/catalog.hpp"
#include "buildarena/math.hpp"

/// Pose algebra and the collision kernel. All functions are pure.
namespace buildarena::geometry {

/// Faces closer than this are in contact, not overlapping.
inline constexpr double kDefaultContactTolerance = 1e-6;

/// World frame: +x east, +y north, +z up.
struct Pose {
    Vec3 position = Vec3::Zero();
    Quat orientation = Quat::Identity();

    static Pose identity() { return {}; }
    static Pose translation(const Vec3& offset) { return {offset, Quat::Identity()}; }
    static Pose rotation(const Quat& q) { return {Vec3::Zero(), q}; }

    Vec3 apply(const Vec3& local_point) const { return position + orientation * local_point; }
    Vec3 rotate(const Vec3& local_dir) const { return orientation * local_dir; }
};

/// parent ∘ child: the child pose expressed in the parent's frame, mapped to the world.
Pose compose(const Pose& parent, const Pose& child_relative);
Pose inverse(const Pose& pose);
bool is_valid(const Pose& pose, double tolerance = 1e-9);
bool approx_equal(const Pose& a, const Pose& b, double tolerance);

/// Unit quaternion with w >= 0 (q and -q are the same rotation).
Quat canonical(const Quat& q);

/// Rotation from Euler angles in degrees, applied about x, then y, then z (extrinsic).
Quat from_euler_degrees(const Vec3& degrees);

/// Shortest-arc rotation taking unit vector `from` onto unit vector `to`.
Quat rotation_between(const Vec3& from, const Vec3& to);

struct Obb {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Constant(0.5);
    Quat orientation = Quat::Identity();

    Vec3 axis(int i) const { return orientation * Vec3::Unit(i); }
    bool contains(const Vec3& point, double margin = 0.0) const;
    std::vector<Vec3> corners() const;
};

Obb world_box(const Pose& pose, const catalog::LocalBox& box);

struct FaceFrame {
    Vec3 world_center = Vec3::Zero();
    Vec3 world_normal = Vec3::UnitZ();
    std::string face_id;
};

FaceFrame face_world_frame(const Pose& block_pose, const catalog::FaceSpec& spec);

/// True iff the interiors intersect after shrinking every half-extent by the tolerance
/// (separating-axis test over the 15 candidate axes). Touching boxes do not overlap.
bool obb_overlap(const Obb& a, const Obb& b, double contact_tolerance = kDefaultContactTolerance);

double point_obb_distance(const Vec3& point, const Obb& box);

/// True iff the distance from the centre to the box is at most the radius.
bool sphere_obb_intersects(const Vec3& center, double radius, const Obb& box);

/// Compass words: east/west/north/south/up/down (top/bottom as aliases for up/down).
std::optional<Vec3> compass_direction(std::string_view word);
/// Name of an axis direction, or nothing when the vector is not axis-aligned.
std::optional<std::string> compass_word(const Vec3& direction, double tolerance = 1e-6);
/// Face-style name: top/bottom for vertical, compass words otherwise.
std::optional<std::string> face_word(const Vec3& direction, double tolerance = 1e-6);

/// True when the rotation maps every axis onto an axis.
bool is_axis_aligned(const Quat& q, double tolerance = 1e-6);

}  // namespace buildarena::geometry
