// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "buildarena/catalog.hpp"
#include "buildarena/control.hpp"
#include "buildarena/geometry.hpp"
#include "buildarena/math.hpp"

namespace buildarena::scene {

using geometry::Pose;

inline constexpr BlockId kStartBlockId = 0;

struct FaceRef {
    BlockId block = 0;
    std::string face;

    friend auto operator<=>(const FaceRef&, const FaceRef&) = default;
};

/// Parent link of an attached block. `offset` accumulates translate_block shifts.
struct MountRecord {
    BlockId parent = 0;
    std::string parent_face;
    std::optional<std::string> child_face;
    Vec3 offset = Vec3::Zero();
};

struct PlacedBlock {
    BlockId id = 0;
    std::string type_id;
    Pose pose;
    std::string note;
    std::optional<MountRecord> mounted_on;
    /// Wheel spin sign toggled by flip_block.
    bool reversed = false;
};

struct Connector {
    ConnectorId id = 0;
    std::string type_id;
    catalog::ConnectorKind kind = catalog::ConnectorKind::brace;
    FaceRef a;
    FaceRef b;
    std::string note;
};

struct FaceOccupancy {
    std::optional<BlockId> attachment;
    std::vector<ConnectorId> connectors;
};

enum class Phase { unstarted, build, refine, assemble, finalized };

std::string_view to_string(Phase phase);
std::optional<Phase> phase_from_string(std::string_view name);

struct SceneConfig {
    double contact_tolerance = geometry::kDefaultContactTolerance;
    int max_connectors_per_face = 1;
    double max_connector_span = 10.0;
    bool remove_cascade = false;
    bool start_immovable = true;
};

/// Construction state: blocks with poses, connectors, the face ledger and the control state.
///
/// Mutators validate first and either commit completely or throw EngineError with the
/// scene untouched.
class Scene {
public:
    explicit Scene(std::shared_ptr<const catalog::Catalog> catalog, SceneConfig config = {});

    void start(const Vec3& init_shift, const Vec3& init_rotation_degrees, std::string note);
    /// Back to the unstarted state; id counters restart.
    void reset();

    Phase phase() const { return phase_; }
    void set_phase(Phase phase) { phase_ = phase; }
    bool started() const { return phase_ != Phase::unstarted; }

    const catalog::Catalog& catalog() const { return *catalog_; }
    const std::shared_ptr<const catalog::Catalog>& catalog_ptr() const { return catalog_; }
    const SceneConfig& config() const { return config_; }

    const std::map<BlockId, PlacedBlock>& blocks() const { return blocks_; }
    const std::map<ConnectorId, Connector>& connectors() const { return connectors_; }
    const std::map<FaceRef, FaceOccupancy>& ledger() const { return ledger_; }
    const control::ControlState& control() const { return control_; }
    control::ControlState& control() { return control_; }

    /// Throws EngineError(UnknownBlock).
    const PlacedBlock& block(BlockId id) const;
    const PlacedBlock* find_block(BlockId id) const;
    const catalog::BlockSpec& spec_of(BlockId id) const;
    /// Blocks whose note contains `fragment`.
    std::vector<BlockId> find_by_note(std::string_view fragment) const;

    /// Face id for a compass word, label or local id; nothing if the block has no such face.
    std::optional<std::string> resolve_face(BlockId id, std::string_view word) const;
    geometry::FaceFrame face_frame(BlockId id, std::string_view face_id) const;
    std::vector<geometry::Obb> world_boxes(BlockId id) const;
    const FaceOccupancy* occupancy(const FaceRef& ref) const;
    std::vector<std::string> free_faces(BlockId id) const;
    std::vector<BlockId> children(BlockId id) const;
    /// The block and everything mounted on it, directly or transitively.
    std::vector<BlockId> subtree(BlockId id) const;

    int part_count(bool include_start = false) const;
    /// Digest over final content; excludes id counters.
    std::string state_hash() const;

    BlockId attach(BlockId base, std::string_view face_id, std::string_view type_id, std::string note,
                   std::optional<Vec3> pointing = std::nullopt);
    ConnectorId connect(const FaceRef& a, const FaceRef& b, std::string_view type_id, std::string note);
    /// Removed block ids (the whole subtree when cascading) and removed connector ids.
    std::pair<std::vector<BlockId>, std::vector<ConnectorId>> remove(BlockId id);
    void twist(BlockId id, double degrees);
    void translate(BlockId id, const Vec3& shift);
    void flip(BlockId id);
    /// Copies a finalized scene onto a free face; returns the new ids in the sub's id order.
    std::vector<BlockId> merge(const Scene& sub, BlockId base, std::string_view base_face, BlockId anchor,
                               std::string_view anchor_face);

    /// Problems found by recomputing every invariant from scratch; empty when sound.
    std::vector<std::string> check_invariants() const;

    /// First overlapping pair between `moved` and the rest of the scene.
    std::optional<std::pair<BlockId, BlockId>> find_overlap(const std::set<BlockId>& moved) const;

    /// Restore a block or connector verbatim (document import). Ids are kept.
    void restore_block(PlacedBlock block);
    void restore_connector(Connector connector);
    void restore_counters(BlockId next_block, ConnectorId next_connector);
    BlockId next_block_id() const { return next_block_id_; }
    ConnectorId next_connector_id() const { return next_connector_id_; }
    void rebuild_ledger();

private:
    Pose attach_pose(const PlacedBlock& base, const geometry::FaceFrame& frame, const catalog::BlockSpec& spec,
                     const std::optional<Vec3>& pointing, std::optional<std::string>& child_face) const;
    void require_free_for_attachment(const FaceRef& ref) const;
    void check_spans(const std::set<BlockId>& moved) const;
    void move_rigidly(const std::vector<BlockId>& ids, const Quat& rotation, const Vec3& pivot, const Vec3& shift);
    void check_moved(const std::vector<BlockId>& ids) const;

    std::shared_ptr<const catalog::Catalog> catalog_;
    SceneConfig config_;
    Phase phase_ = Phase::unstarted;
    std::map<BlockId, PlacedBlock> blocks_;
    std::map<ConnectorId, Connector> connectors_;
    std::map<FaceRef, FaceOccupancy> ledger_;
    control::ControlState control_;
    BlockId next_block_id_ = 0;
    ConnectorId next_connector_id_ = 0;
};

}  // namespace buildarena::scene
