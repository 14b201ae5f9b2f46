// SPDX-License-Identifier: Apache-2.0
#include "buildarena/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "buildarena/action_types.hpp"
#include "buildarena/hash.hpp"

namespace buildarena::scene {

namespace {

using catalog::BlockSpec;
using catalog::OrientationMode;
using geometry::Obb;

constexpr double kAlignTolerance = 1e-6;

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

double bounding_radius(const Obb& box) { return box.half_extents.norm(); }

Quat axis_angle(const Vec3& axis, double degrees)
{
    return Quat(Eigen::AngleAxisd(degrees * std::numbers::pi / 180.0, axis.normalized()));
}

// Run `fn` against a copy and adopt it only if nothing threw.
template <typename Fn>
auto transact(Scene& scene, Fn&& fn)
{
    Scene next(scene);
    if constexpr (std::is_void_v<decltype(fn(next))>) {
        fn(next);
        scene = std::move(next);
    } else {
        auto out = fn(next);
        scene = std::move(next);
        return out;
    }
}

}  // namespace

std::string_view to_string(Phase phase)
{
    switch (phase) {
    case Phase::unstarted: return "unstarted";
    case Phase::build: return "build";
    case Phase::refine: return "refine";
    case Phase::assemble: return "assemble";
    case Phase::finalized: return "finalized";
    }
    return "unknown";
}

std::optional<Phase> phase_from_string(std::string_view name)
{
    for (Phase p : {Phase::unstarted, Phase::build, Phase::refine, Phase::assemble, Phase::finalized}) {
        if (to_string(p) == name)
            return p;
    }
    return std::nullopt;
}

Scene::Scene(std::shared_ptr<const catalog::Catalog> catalog, SceneConfig config)
    : catalog_(std::move(catalog)), config_(config)
{
}

void Scene::start(const Vec3& init_shift, const Vec3& init_rotation_degrees, std::string note)
{
    if (started())
        throw EngineError(ErrorCode::PhaseViolation, {{"operation", "start"}, {"phase", to_string(phase_)}});
    if (!init_shift.allFinite() || !init_rotation_degrees.allFinite())
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", "start offsets must be finite numbers"}});
    reset();
    PlacedBlock start;
    start.id = kStartBlockId;
    start.type_id = std::string(catalog::kStartingBlock);
    start.pose = Pose{init_shift, geometry::from_euler_degrees(init_rotation_degrees)};
    start.note = std::move(note);
    blocks_.emplace(start.id, std::move(start));
    next_block_id_ = 1;
    phase_ = Phase::build;
    rebuild_ledger();
}

void Scene::reset()
{
    phase_ = Phase::unstarted;
    blocks_.clear();
    connectors_.clear();
    ledger_.clear();
    control_.clear();
    next_block_id_ = 0;
    next_connector_id_ = 0;
}

const PlacedBlock* Scene::find_block(BlockId id) const
{
    auto it = blocks_.find(id);
    return it == blocks_.end() ? nullptr : &it->second;
}

const PlacedBlock& Scene::block(BlockId id) const
{
    if (const auto* b = find_block(id))
        return *b;
    throw EngineError(ErrorCode::UnknownBlock, {{"block", id}});
}

const catalog::BlockSpec& Scene::spec_of(BlockId id) const { return catalog_->block_spec(block(id).type_id); }

std::vector<BlockId> Scene::find_by_note(std::string_view fragment) const
{
    std::vector<BlockId> out;
    if (fragment.empty())
        return out;
    for (const auto& [id, b] : blocks_) {
        if (b.note.find(fragment) != std::string::npos)
            out.push_back(id);
    }
    return out;
}

std::optional<std::string> Scene::resolve_face(BlockId id, std::string_view word) const
{
    const PlacedBlock& b = block(id);
    const BlockSpec& spec = catalog_->block_spec(b.type_id);
    const std::string w = lower(word);

    if (auto dir = geometry::compass_direction(w); dir && geometry::is_axis_aligned(b.pose.orientation)) {
        for (const auto& f : spec.faces) {
            if ((b.pose.rotate(f.local_normal) - *dir).cwiseAbs().maxCoeff() <= kAlignTolerance)
                return f.face_id;
        }
    }
    for (const auto& f : spec.faces) {
        if (f.face_id == word || lower(f.face_id) == w)
            return f.face_id;
    }
    for (const auto& f : spec.faces) {
        if (!f.label.empty() && lower(f.label) == w)
            return f.face_id;
    }
    return std::nullopt;
}

geometry::FaceFrame Scene::face_frame(BlockId id, std::string_view face_id) const
{
    const PlacedBlock& b = block(id);
    const auto* face = catalog_->block_spec(b.type_id).face(face_id);
    if (!face)
        throw EngineError(ErrorCode::InvalidFace, {{"block", id}, {"face", std::string(face_id)}});
    return geometry::face_world_frame(b.pose, *face);
}

std::vector<geometry::Obb> Scene::world_boxes(BlockId id) const
{
    const PlacedBlock& b = block(id);
    std::vector<Obb> out;
    for (const auto& box : catalog_->block_spec(b.type_id).collision)
        out.push_back(geometry::world_box(b.pose, box));
    return out;
}

const FaceOccupancy* Scene::occupancy(const FaceRef& ref) const
{
    auto it = ledger_.find(ref);
    return it == ledger_.end() ? nullptr : &it->second;
}

std::vector<std::string> Scene::free_faces(BlockId id) const
{
    const auto& spec = spec_of(id);
    std::vector<std::string> out;
    for (const auto& f : spec.faces) {
        if (!f.attachable)
            continue;
        const auto* occ = occupancy({id, f.face_id});
        if (!occ || (!occ->attachment && static_cast<int>(occ->connectors.size()) < config_.max_connectors_per_face))
            out.push_back(f.face_id);
    }
    return out;
}

std::vector<BlockId> Scene::children(BlockId id) const
{
    std::vector<BlockId> out;
    for (const auto& [bid, b] : blocks_) {
        if (b.mounted_on && b.mounted_on->parent == id)
            out.push_back(bid);
    }
    return out;
}

std::vector<BlockId> Scene::subtree(BlockId id) const
{
    std::vector<BlockId> out{id};
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (BlockId c : children(out[i]))
            out.push_back(c);
    }
    return out;
}

int Scene::part_count(bool include_start) const
{
    int n = static_cast<int>(blocks_.size() + connectors_.size());
    if (!include_start && blocks_.count(kStartBlockId))
        --n;
    return n;
}

std::string Scene::state_hash() const
{
    Hasher h;
    h.str("scene").str(to_string(phase_));
    h.u64(blocks_.size());
    for (const auto& [id, b] : blocks_) {
        const Quat q = geometry::canonical(b.pose.orientation);
        h.i64(id).str(b.type_id).str(b.note);
        h.f64(b.pose.position.x()).f64(b.pose.position.y()).f64(b.pose.position.z());
        h.f64(q.w()).f64(q.x()).f64(q.y()).f64(q.z());
        h.flag(b.reversed).flag(b.mounted_on.has_value());
        if (b.mounted_on) {
            const auto& m = *b.mounted_on;
            h.i64(m.parent).str(m.parent_face).str(m.child_face.value_or(""));
            h.f64(m.offset.x()).f64(m.offset.y()).f64(m.offset.z());
        }
    }
    h.u64(connectors_.size());
    for (const auto& [id, c] : connectors_) {
        h.i64(id).str(c.type_id).i64(c.a.block).str(c.a.face).i64(c.b.block).str(c.b.face).str(c.note);
    }
    h.u64(control_.bindings().size());
    for (const auto& kb : control_.bindings())
        h.str(kb.key).str(kb.action).i64(kb.block_id);
    h.u64(control_.sequence().size());
    for (const auto& e : control_.sequence())
        h.f64(e.time).str(e.key).f64(e.hold_for).str(e.motion_note);
    return h.hex();
}

void Scene::rebuild_ledger()
{
    ledger_.clear();
    for (const auto& [id, b] : blocks_) {
        if (!b.mounted_on)
            continue;
        ledger_[{b.mounted_on->parent, b.mounted_on->parent_face}].attachment = id;
        if (b.mounted_on->child_face)
            ledger_[{id, *b.mounted_on->child_face}].attachment = b.mounted_on->parent;
    }
    for (const auto& [cid, c] : connectors_) {
        ledger_[c.a].connectors.push_back(cid);
        ledger_[c.b].connectors.push_back(cid);
    }
}

void Scene::require_free_for_attachment(const FaceRef& ref) const
{
    if (const auto* occ = occupancy(ref)) {
        if (occ->attachment)
            throw EngineError(ErrorCode::FaceOccupied,
                              {{"block", ref.block}, {"face", ref.face}, {"other_block", *occ->attachment}});
        if (!occ->connectors.empty())
            throw EngineError(ErrorCode::FaceOccupied,
                              {{"block", ref.block}, {"face", ref.face}, {"connector", occ->connectors.front()}});
    }
}

std::optional<std::pair<BlockId, BlockId>> Scene::find_overlap(const std::set<BlockId>& moved) const
{
    for (BlockId m : moved) {
        const auto boxes_m = world_boxes(m);
        for (const auto& [oid, other] : blocks_) {
            if (moved.count(oid))
                continue;
            for (const auto& a : boxes_m) {
                for (const auto& b : world_boxes(oid)) {
                    if ((a.center - b.center).norm() >= bounding_radius(a) + bounding_radius(b))
                        continue;
                    if (geometry::obb_overlap(a, b, config_.contact_tolerance))
                        return std::make_pair(m, oid);
                }
            }
        }
    }
    return std::nullopt;
}

void Scene::check_spans(const std::set<BlockId>& moved) const
{
    for (const auto& [cid, c] : connectors_) {
        if (!moved.empty() && !moved.count(c.a.block) && !moved.count(c.b.block))
            continue;
        const double span = (face_frame(c.a.block, c.a.face).world_center - face_frame(c.b.block, c.b.face).world_center).norm();
        if (span > config_.max_connector_span + 1e-9)
            throw EngineError(ErrorCode::ConnectorSpanExceeded,
                              {{"connector", cid}, {"span", span}, {"max_span", config_.max_connector_span}});
    }
}

Pose Scene::attach_pose(const PlacedBlock& base, const geometry::FaceFrame& frame, const BlockSpec& spec,
                        const std::optional<Vec3>& pointing, std::optional<std::string>& child_face) const
{
    const Vec3 n = frame.world_normal;
    if (spec.orientation == OrientationMode::pointing) {
        Vec3 p;
        if (pointing) {
            p = pointing->normalized();
            if (std::abs(p.dot(n)) > kAlignTolerance)
                throw EngineError(ErrorCode::MalformedArguments,
                                  {{"detail", "the pointing direction must be perpendicular to the face normal"}});
        } else {
            const Vec3 preferred = std::abs(n.z()) > 0.5 ? Vec3::UnitY() : Vec3::UnitZ();
            p = (preferred - preferred.dot(n) * n).normalized();
        }
        Eigen::Matrix3d r;
        r.col(0) = p;
        r.col(1) = n.cross(p);
        r.col(2) = n;
        const Quat q = geometry::canonical(Quat(r));
        child_face = spec.mount->face_id;
        return Pose{frame.world_center - q * spec.mount->local_center, q};
    }

    // inherit: keep the parent's orientation and mate whichever face looks back at the parent
    Quat q = base.pose.orientation;
    const catalog::FaceSpec* mate = nullptr;
    for (const auto& f : spec.faces) {
        if ((q * f.local_normal + n).cwiseAbs().maxCoeff() <= kAlignTolerance) {
            mate = &f;
            break;
        }
    }
    if (!mate) {
        q = geometry::rotation_between(-Vec3::UnitZ(), -n);
        for (const auto& f : spec.faces) {
            if ((q * f.local_normal + n).cwiseAbs().maxCoeff() <= kAlignTolerance) {
                mate = &f;
                break;
            }
        }
    }
    q = geometry::canonical(q);
    if (mate) {
        child_face = mate->face_id;
        return Pose{frame.world_center - q * mate->local_center, q};
    }
    child_face.reset();
    return Pose{frame.world_center + n * spec.shape.z() / 2.0, q};
}

BlockId Scene::attach(BlockId base, std::string_view face_id, std::string_view type_id, std::string note,
                      std::optional<Vec3> pointing)
{
    const PlacedBlock& parent = block(base);
    if (!catalog_->contains(type_id))
        throw EngineError(ErrorCode::UnknownBlockType, {{"type", std::string(type_id)}});
    const BlockSpec& spec = catalog_->block_spec(type_id);
    if (!spec.placeable)
        throw EngineError(ErrorCode::MalformedArguments,
                          {{"detail", fmt::format("{} cannot be attached as a new block", type_id)}});
    const auto* face = catalog_->block_spec(parent.type_id).face(face_id);
    if (!face || !face->attachable)
        throw EngineError(ErrorCode::InvalidFace, {{"block", base}, {"face", std::string(face_id)}});
    require_free_for_attachment({base, face->face_id});

    const auto frame = geometry::face_world_frame(parent.pose, *face);
    PlacedBlock child;
    child.id = next_block_id_;
    child.type_id = spec.type_id;
    child.note = std::move(note);
    std::optional<std::string> child_face;
    child.pose = attach_pose(parent, frame, spec, pointing, child_face);
    child.mounted_on = MountRecord{base, face->face_id, child_face, Vec3::Zero()};

    return transact(*this, [&](Scene& s) {
        s.blocks_.emplace(child.id, child);
        s.next_block_id_ = child.id + 1;
        if (auto hit = s.find_overlap({child.id}))
            throw EngineError(ErrorCode::OverlapConflict, {{"block", hit->first}, {"other_block", hit->second}});
        s.rebuild_ledger();
        return child.id;
    });
}

ConnectorId Scene::connect(const FaceRef& a, const FaceRef& b, std::string_view type_id, std::string note)
{
    if (!catalog_->contains(type_id))
        throw EngineError(ErrorCode::UnknownBlockType, {{"type", std::string(type_id)}});
    const BlockSpec& spec = catalog_->block_spec(type_id);
    if (!spec.is_connector())
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", fmt::format("{} is not a connector", type_id)}});
    for (const FaceRef* ref : {&a, &b}) {
        const auto* face = spec_of(ref->block).face(ref->face);
        if (!face || !face->attachable)
            throw EngineError(ErrorCode::InvalidFace, {{"block", ref->block}, {"face", ref->face}});
    }
    if (a == b)
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", "both connector endpoints name the same face"}});
    for (const FaceRef* ref : {&a, &b}) {
        if (const auto* occ = occupancy(*ref)) {
            if (occ->attachment)
                throw EngineError(ErrorCode::FaceOccupied,
                                  {{"block", ref->block}, {"face", ref->face}, {"other_block", *occ->attachment}});
            if (static_cast<int>(occ->connectors.size()) >= config_.max_connectors_per_face)
                throw EngineError(ErrorCode::ExcessConnection,
                                  {{"block", ref->block}, {"face", ref->face}, {"cap", config_.max_connectors_per_face}});
        }
    }
    const double span = (face_frame(a.block, a.face).world_center - face_frame(b.block, b.face).world_center).norm();
    if (span > config_.max_connector_span + 1e-9)
        throw EngineError(ErrorCode::ConnectorSpanExceeded, {{"span", span}, {"max_span", config_.max_connector_span}});

    Connector c{next_connector_id_, spec.type_id, spec.physical.connector_kind, a, b, std::move(note)};
    connectors_.emplace(c.id, c);
    ++next_connector_id_;
    rebuild_ledger();
    return c.id;
}

std::pair<std::vector<BlockId>, std::vector<ConnectorId>> Scene::remove(BlockId id)
{
    block(id);
    if (id == kStartBlockId)
        throw EngineError(ErrorCode::StartingBlockProtected, {{"block", id}, {"operation", "remove"}});
    const auto kids = children(id);
    if (!kids.empty() && !config_.remove_cascade)
        throw EngineError(ErrorCode::PhaseViolation,
                          {{"operation", "remove"}, {"block", id}, {"dependents", kids}});

    std::vector<BlockId> gone = subtree(id);
    std::sort(gone.begin(), gone.end());
    std::vector<ConnectorId> cut;
    for (const auto& [cid, c] : connectors_) {
        if (std::binary_search(gone.begin(), gone.end(), c.a.block) || std::binary_search(gone.begin(), gone.end(), c.b.block))
            cut.push_back(cid);
    }
    for (ConnectorId cid : cut)
        connectors_.erase(cid);
    for (BlockId bid : gone) {
        blocks_.erase(bid);
        control_.forget_block(bid);
    }
    rebuild_ledger();
    return {gone, cut};
}

void Scene::move_rigidly(const std::vector<BlockId>& ids, const Quat& rotation, const Vec3& pivot, const Vec3& shift)
{
    for (BlockId bid : ids) {
        Pose& pose = blocks_.at(bid).pose;
        pose.position = pivot + rotation * (pose.position - pivot) + shift;
        pose.orientation = geometry::canonical(rotation * pose.orientation);
    }
}

void Scene::check_moved(const std::vector<BlockId>& ids) const
{
    const std::set<BlockId> moved(ids.begin(), ids.end());
    if (auto hit = find_overlap(moved))
        throw EngineError(ErrorCode::OverlapConflict, {{"block", hit->first}, {"other_block", hit->second}});
    check_spans(moved);
}

void Scene::twist(BlockId id, double degrees)
{
    const PlacedBlock& b = block(id);
    if (!b.mounted_on)
        throw EngineError(ErrorCode::InvalidFace, {{"block", id}, {"detail", "the block is not mounted on a face"}});
    if (!std::isfinite(degrees))
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", "angle must be a finite number"}});
    const auto frame = face_frame(b.mounted_on->parent, b.mounted_on->parent_face);
    const Vec3 pivot = frame.world_center + b.mounted_on->offset;
    const Quat r = axis_angle(frame.world_normal, degrees);
    transact(*this, [&](Scene& s) {
        const auto ids = s.subtree(id);
        s.move_rigidly(ids, r, pivot, Vec3::Zero());
        s.check_moved(ids);
    });
}

void Scene::translate(BlockId id, const Vec3& shift)
{
    block(id);
    if (id == kStartBlockId && config_.start_immovable)
        throw EngineError(ErrorCode::StartingBlockProtected, {{"block", id}, {"operation", "translate"}});
    if (!shift.allFinite())
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", "shift must be three finite numbers"}});
    transact(*this, [&](Scene& s) {
        const auto ids = s.subtree(id);
        s.move_rigidly(ids, Quat::Identity(), Vec3::Zero(), shift);
        if (auto& m = s.blocks_.at(id).mounted_on)
            m->offset += shift;
        s.check_moved(ids);
    });
}

void Scene::flip(BlockId id)
{
    const PlacedBlock& b = block(id);
    const BlockSpec& spec = catalog_->block_spec(b.type_id);
    switch (spec.flip) {
    case catalog::FlipMode::spin:
        blocks_.at(id).reversed = !b.reversed;
        return;
    case catalog::FlipMode::rotate180: {
        const Vec3 pivot = b.pose.apply(spec.mount->local_center);
        const Quat r = axis_angle(b.pose.rotate(spec.mount->local_normal), 180.0);
        transact(*this, [&](Scene& s) {
            const auto ids = s.subtree(id);
            s.move_rigidly(ids, r, pivot, Vec3::Zero());
            s.check_moved(ids);
        });
        return;
    }
    case catalog::FlipMode::none:
        break;
    }
    throw EngineError(ErrorCode::InvalidFace,
                      {{"block", id}, {"detail", fmt::format("{} has no reversible functional axis", b.type_id)}});
}

std::vector<BlockId> Scene::merge(const Scene& sub, BlockId base, std::string_view base_face, BlockId anchor,
                                  std::string_view anchor_face)
{
    if (sub.phase() != Phase::finalized)
        throw EngineError(ErrorCode::PhaseViolation, {{"operation", "merge"}, {"phase", to_string(sub.phase())}});
    if (sub.catalog().content_hash() != catalog_->content_hash())
        throw EngineError(ErrorCode::MalformedArguments, {{"detail", "the substructure uses a different catalog"}});
    const PlacedBlock& parent = block(base);
    const auto* face = catalog_->block_spec(parent.type_id).face(base_face);
    if (!face || !face->attachable)
        throw EngineError(ErrorCode::InvalidFace, {{"block", base}, {"face", std::string(base_face)}});
    require_free_for_attachment({base, face->face_id});

    const PlacedBlock* sub_anchor = sub.find_block(anchor);
    if (!sub_anchor)
        throw EngineError(ErrorCode::UnknownBlock, {{"block", anchor}, {"detail", "in the substructure"}});
    const auto* aface = catalog_->block_spec(sub_anchor->type_id).face(anchor_face);
    if (!aface || !aface->attachable)
        throw EngineError(ErrorCode::InvalidFace, {{"block", anchor}, {"face", std::string(anchor_face)}});
    if (const auto* occ = sub.occupancy({anchor, aface->face_id}); occ && (occ->attachment || !occ->connectors.empty()))
        throw EngineError(ErrorCode::FaceOccupied, {{"block", anchor}, {"face", aface->face_id}, {"detail", "in the substructure"}});

    const auto target = geometry::face_world_frame(parent.pose, *face);
    const auto source = geometry::face_world_frame(sub_anchor->pose, *aface);
    const Quat r = geometry::rotation_between(source.world_normal, -target.world_normal);

    std::map<BlockId, BlockId> ids;
    BlockId next = next_block_id_;
    for (const auto& [sid, sb] : sub.blocks())
        ids[sid] = next++;

    // re-root the sub tree at the anchor by reversing every link on the anchor's path to its root
    std::map<BlockId, std::optional<MountRecord>> mounts;
    for (const auto& [sid, sb] : sub.blocks())
        mounts[sid] = sb.mounted_on;
    {
        BlockId child = anchor;
        std::optional<MountRecord> link = mounts[anchor];
        mounts[anchor] = MountRecord{base, face->face_id, aface->face_id, Vec3::Zero()};
        while (link) {
            const BlockId up = link->parent;
            std::optional<MountRecord> next_link = mounts[up];
            if (!link->child_face)
                throw EngineError(ErrorCode::InvalidFace, {{"block", child}, {"detail", "cannot re-root the substructure here"}});
            mounts[up] = MountRecord{child, *link->child_face, link->parent_face, -link->offset};
            child = up;
            link = next_link;
        }
    }

    return transact(*this, [&](Scene& s) {
        std::vector<BlockId> created;
        for (const auto& [sid, sb] : sub.blocks()) {
            PlacedBlock nb = sb;
            nb.id = ids.at(sid);
            nb.pose.position = target.world_center + r * (sb.pose.position - source.world_center);
            nb.pose.orientation = geometry::canonical(r * sb.pose.orientation);
            nb.mounted_on = mounts.at(sid);
            if (nb.mounted_on && sid != anchor)
                nb.mounted_on->parent = ids.at(nb.mounted_on->parent);
            s.blocks_.emplace(nb.id, std::move(nb));
            created.push_back(ids.at(sid));
        }
        s.next_block_id_ = next;
        for (const auto& [cid, c] : sub.connectors()) {
            Connector nc = c;
            nc.id = s.next_connector_id_++;
            nc.a.block = ids.at(c.a.block);
            nc.b.block = ids.at(c.b.block);
            s.connectors_.emplace(nc.id, std::move(nc));
        }
        std::vector<std::pair<BlockId, BlockId>> remap(ids.begin(), ids.end());
        control::ControlState imported = sub.control();
        imported.remap_blocks(remap);
        for (const auto& kb : imported.bindings()) {
            if (std::find(s.control_.bindings().begin(), s.control_.bindings().end(), kb) == s.control_.bindings().end()) {
                const auto& actions = s.catalog_->block_spec(s.blocks_.at(kb.block_id).type_id).control_actions;
                s.control_.bind_key(kb.key, kb.action, kb.block_id, actions);
            }
        }
        for (const auto& e : imported.sequence())
            s.control_.add_control_sequence(e.time, e.key, e.hold_for, e.motion_note);

        if (auto hit = s.find_overlap({created.begin(), created.end()}))
            throw EngineError(ErrorCode::OverlapConflict, {{"block", hit->first}, {"other_block", hit->second}});
        s.rebuild_ledger();
        return created;
    });
}

void Scene::restore_block(PlacedBlock b)
{
    b.pose.orientation = geometry::canonical(b.pose.orientation);
    const BlockId id = b.id;
    blocks_[id] = std::move(b);
    next_block_id_ = std::max(next_block_id_, id + 1);
}

void Scene::restore_connector(Connector c)
{
    const ConnectorId id = c.id;
    connectors_[id] = std::move(c);
    next_connector_id_ = std::max(next_connector_id_, id + 1);
}

void Scene::restore_counters(BlockId next_block, ConnectorId next_connector)
{
    next_block_id_ = next_block;
    next_connector_id_ = next_connector;
}

std::vector<std::string> Scene::check_invariants() const
{
    std::vector<std::string> problems;
    if (!started()) {
        if (!blocks_.empty())
            problems.push_back("unstarted scene holds blocks");
        return problems;
    }
    const PlacedBlock* start = find_block(kStartBlockId);
    if (!start || start->type_id != catalog::kStartingBlock || start->mounted_on)
        problems.push_back("block #0 is not an unmounted starting block");

    std::map<FaceRef, int> attachments;
    std::map<FaceRef, int> connector_use;
    for (const auto& [id, b] : blocks_) {
        if (!geometry::is_valid(b.pose, 1e-9))
            problems.push_back(fmt::format("block #{} has an invalid pose", id));
        if (!catalog_->contains(b.type_id)) {
            problems.push_back(fmt::format("block #{} has unknown type {}", id, b.type_id));
            continue;
        }
        if (b.mounted_on) {
            const auto* parent = find_block(b.mounted_on->parent);
            if (!parent)
                problems.push_back(fmt::format("block #{} is mounted on missing block #{}", id, b.mounted_on->parent));
            else if (!catalog_->block_spec(parent->type_id).face(b.mounted_on->parent_face))
                problems.push_back(fmt::format("block #{} is mounted on a missing face", id));
            ++attachments[{b.mounted_on->parent, b.mounted_on->parent_face}];
            if (b.mounted_on->child_face)
                ++attachments[{id, *b.mounted_on->child_face}];
        }
    }
    for (const auto& [cid, c] : connectors_) {
        for (const FaceRef* ref : {&c.a, &c.b}) {
            const auto* b = find_block(ref->block);
            if (!b || !catalog_->block_spec(b->type_id).face(ref->face))
                problems.push_back(fmt::format("connector #{} has a dangling endpoint", cid));
            ++connector_use[*ref];
        }
        if (c.a == c.b)
            problems.push_back(fmt::format("connector #{} joins a face to itself", cid));
        else if (find_block(c.a.block) && find_block(c.b.block)) {
            try {
                const double span = (face_frame(c.a.block, c.a.face).world_center - face_frame(c.b.block, c.b.face).world_center).norm();
                if (span > config_.max_connector_span + 1e-9)
                    problems.push_back(fmt::format("connector #{} spans {}", cid, span));
            } catch (const EngineError&) {
            }
        }
    }
    for (const auto& [ref, count] : attachments) {
        if (count != 1)
            problems.push_back(fmt::format("face {} of #{} holds {} attachments", ref.face, ref.block, count));
        if (connector_use.count(ref))
            problems.push_back(fmt::format("face {} of #{} holds an attachment and a connector", ref.face, ref.block));
    }
    for (const auto& [ref, count] : connector_use) {
        if (count > config_.max_connectors_per_face)
            problems.push_back(fmt::format("face {} of #{} holds {} connectors", ref.face, ref.block, count));
    }

    std::vector<std::pair<BlockId, std::vector<Obb>>> boxes;
    for (const auto& [id, b] : blocks_) {
        if (catalog_->contains(b.type_id))
            boxes.emplace_back(id, world_boxes(id));
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            bool hit = false;
            for (const auto& a : boxes[i].second) {
                for (const auto& b : boxes[j].second)
                    hit = hit || geometry::obb_overlap(a, b, config_.contact_tolerance);
            }
            if (hit)
                problems.push_back(fmt::format("blocks #{} and #{} overlap", boxes[i].first, boxes[j].first));
        }
    }

    auto copy = *this;
    copy.rebuild_ledger();
    if (copy.ledger_.size() != ledger_.size())
        problems.push_back("face ledger is stale");
    return problems;
}

}  // namespace buildarena::scene
