// SPDX-License-Identifier: Apache-2.0
#include "buildarena/geometry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>

namespace buildarena::geometry {

Pose compose(const Pose& parent, const Pose& child_relative)
{
    Pose out;
    out.position = parent.position + parent.orientation * child_relative.position;
    out.orientation = (parent.orientation * child_relative.orientation).normalized();
    return out;
}

Pose inverse(const Pose& pose)
{
    Pose out;
    out.orientation = pose.orientation.conjugate();
    out.position = -(out.orientation * pose.position);
    return out;
}

bool is_valid(const Pose& pose, double tolerance)
{
    return pose.position.allFinite() && std::abs(pose.orientation.norm() - 1.0) <= tolerance;
}

bool approx_equal(const Pose& a, const Pose& b, double tolerance)
{
    if ((a.position - b.position).cwiseAbs().maxCoeff() > tolerance)
        return false;
    // q and -q are the same rotation
    return std::abs(std::abs(a.orientation.dot(b.orientation)) - 1.0) <= tolerance;
}

Quat canonical(const Quat& q)
{
    // Renormalising an already unit quaternion can move the last bit, which would make this
    // non-idempotent and break hash equality after a save/load cycle.
    Quat n = q;
    if (std::abs(n.squaredNorm() - 1.0) > 1e-12)
        n.normalize();
    if (n.w() < 0.0 || (n.w() == 0.0 && (n.x() < 0.0 || (n.x() == 0.0 && (n.y() < 0.0 || (n.y() == 0.0 && n.z() < 0.0))))))
        n.coeffs() = -n.coeffs();
    return n;
}

Quat from_euler_degrees(const Vec3& degrees)
{
    const Vec3 rad = degrees * (std::numbers::pi / 180.0);
    const Quat q = Eigen::AngleAxisd(rad.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(rad.y(), Vec3::UnitY()) *
                   Eigen::AngleAxisd(rad.x(), Vec3::UnitX());
    return canonical(q);
}

Quat rotation_between(const Vec3& from, const Vec3& to)
{
    const Vec3 a = from.normalized();
    const Vec3 b = to.normalized();
    if (a.dot(b) < -1.0 + 1e-12) {
        // antiparallel: half turn about any perpendicular axis, chosen deterministically
        Vec3 axis = a.cross(Vec3::UnitX());
        if (axis.norm() < 1e-6)
            axis = a.cross(Vec3::UnitY());
        return Quat(Eigen::AngleAxisd(std::numbers::pi, axis.normalized()));
    }
    return Quat::FromTwoVectors(a, b).normalized();
}

bool Obb::contains(const Vec3& point, double margin) const
{
    const Vec3 local = orientation.conjugate() * (point - center);
    return (local.cwiseAbs().array() <= half_extents.array() + margin).all();
}

std::vector<Vec3> Obb::corners() const
{
    std::vector<Vec3> out;
    out.reserve(8);
    for (int i = 0; i < 8; ++i) {
        const Vec3 sign((i & 1) ? 1.0 : -1.0, (i & 2) ? 1.0 : -1.0, (i & 4) ? 1.0 : -1.0);
        out.push_back(center + orientation * sign.cwiseProduct(half_extents));
    }
    return out;
}

Obb world_box(const Pose& pose, const catalog::LocalBox& box)
{
    return Obb{pose.apply(box.center), box.half_extents, pose.orientation};
}

FaceFrame face_world_frame(const Pose& block_pose, const catalog::FaceSpec& spec)
{
    return FaceFrame{block_pose.apply(spec.local_center), block_pose.rotate(spec.local_normal).normalized(), spec.face_id};
}

bool obb_overlap(const Obb& a, const Obb& b, double contact_tolerance)
{
    const Vec3 ha = (a.half_extents.array() - contact_tolerance).max(0.0);
    const Vec3 hb = (b.half_extents.array() - contact_tolerance).max(0.0);
    if ((ha.array() <= 0.0).any() || (hb.array() <= 0.0).any())
        return false;

    const std::array<Vec3, 3> A{a.axis(0), a.axis(1), a.axis(2)};
    const std::array<Vec3, 3> B{b.axis(0), b.axis(1), b.axis(2)};
    const Vec3 t = b.center - a.center;

    auto separated_along = [&](const Vec3& axis) {
        double ra = 0.0;
        double rb = 0.0;
        for (int i = 0; i < 3; ++i) {
            ra += ha[i] * std::abs(A[i].dot(axis));
            rb += hb[i] * std::abs(B[i].dot(axis));
        }
        return std::abs(t.dot(axis)) >= ra + rb;
    };

    for (int i = 0; i < 3; ++i) {
        if (separated_along(A[i]) || separated_along(B[i]))
            return false;
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Vec3 axis = A[i].cross(B[j]);
            const double len = axis.norm();
            // parallel edge pairs are already covered by the face axes
            if (len < 1e-9)
                continue;
            if (separated_along(axis / len))
                return false;
        }
    }
    return true;
}

double point_obb_distance(const Vec3& point, const Obb& box)
{
    const Vec3 local = box.orientation.conjugate() * (point - box.center);
    const Vec3 clamped = local.cwiseMax(-box.half_extents).cwiseMin(box.half_extents);
    return (local - clamped).norm();
}

bool sphere_obb_intersects(const Vec3& center, double radius, const Obb& box)
{
    return point_obb_distance(center, box) <= radius;
}

std::optional<Vec3> compass_direction(std::string_view word)
{
    std::string w(word);
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (w == "east" || w == "+x")
        return Vec3::UnitX();
    if (w == "west" || w == "-x")
        return -Vec3::UnitX();
    if (w == "north" || w == "+y")
        return Vec3::UnitY();
    if (w == "south" || w == "-y")
        return -Vec3::UnitY();
    if (w == "up" || w == "top" || w == "upward" || w == "upwards" || w == "+z")
        return Vec3::UnitZ();
    if (w == "down" || w == "bottom" || w == "downward" || w == "downwards" || w == "-z")
        return -Vec3::UnitZ();
    return std::nullopt;
}

std::optional<std::string> compass_word(const Vec3& direction, double tolerance)
{
    static constexpr std::array<std::pair<const char*, int>, 6> kWords{
        {{"east", 0}, {"west", 0}, {"north", 1}, {"south", 1}, {"up", 2}, {"down", 2}}};
    const Vec3 d = direction.normalized();
    for (std::size_t k = 0; k < kWords.size(); ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        const Vec3 axis = sign * Vec3::Unit(kWords[k].second);
        if ((d - axis).cwiseAbs().maxCoeff() <= tolerance)
            return std::string(kWords[k].first);
    }
    return std::nullopt;
}

std::optional<std::string> face_word(const Vec3& direction, double tolerance)
{
    auto word = compass_word(direction, tolerance);
    if (word == "up")
        return std::string("top");
    if (word == "down")
        return std::string("bottom");
    return word;
}

bool is_axis_aligned(const Quat& q, double tolerance)
{
    const Eigen::Matrix3d r = q.toRotationMatrix();
    for (int i = 0; i < 3; ++i) {
        if (std::abs(r.col(i).cwiseAbs().maxCoeff() - 1.0) > tolerance)
            return false;
    }
    return true;
}

}  // namespace buildarena::geometry
