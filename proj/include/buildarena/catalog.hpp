// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "buildarena/math.hpp"

namespace buildarena::catalog {

inline constexpr int kCatalogVersion = 1;

/// Type ids every catalog must provide.
inline constexpr std::string_view kStartingBlock = "StartingBlock";
inline constexpr std::string_view kRequiredTypes[] = {
    "StartingBlock", "SmallWoodenBlock", "PoweredWheel", "WaterCannon", "Torch", "Brace", "Winch",
};

struct FaceSpec {
    std::string face_id;
    std::string label;
    Vec3 local_center = Vec3::Zero();
    Vec3 local_normal = Vec3::UnitZ();
    bool attachable = true;
};

enum class ConnectorKind { none, brace, winch };

struct PhysicalParams {
    std::optional<double> wheel_rpm;
    std::optional<double> recoil_force;
    std::optional<double> steam_multiplier;
    std::optional<double> heat_radius;
    std::vector<Vec3> heat_offsets;
    ConnectorKind connector_kind = ConnectorKind::none;
};

/// Axis-aligned box in a block's local frame.
struct LocalBox {
    Vec3 center = Vec3::Zero();
    Vec3 half_extents = Vec3::Zero();
};

/// How a block is oriented when attached.
///  inherit:  keeps the parent's orientation (symmetric cubes)
///  pointing: local -z faces the parent, local +x follows the requested pointing direction
enum class OrientationMode { inherit, pointing };

enum class FlipMode { none, spin, rotate180 };

struct MountSpec {
    Vec3 local_center = Vec3::Zero();
    Vec3 local_normal = -Vec3::UnitZ();
    std::optional<std::string> face_id;
};

struct MachineFileInfo {
    int id = -1;
    bool verified = false;
};

struct BlockSpec {
    std::string type_id;
    Vec3 shape = Vec3::Ones();
    double mass = 0.0;
    bool placeable = true;
    OrientationMode orientation = OrientationMode::inherit;
    std::optional<MountSpec> mount;
    std::vector<FaceSpec> faces;
    std::vector<LocalBox> collision;
    std::vector<LocalBox> heat_regions;
    std::map<std::string, Vec3> anchors;
    PhysicalParams physical;
    std::vector<std::string> control_actions;
    FlipMode flip = FlipMode::none;
    MachineFileInfo machine_file;
    std::string init_description;

    bool is_connector() const { return physical.connector_kind != ConnectorKind::none; }
    bool is_wheel() const { return physical.wheel_rpm.has_value(); }
    bool is_cannon() const { return physical.recoil_force.has_value(); }
    bool is_heater() const { return physical.heat_radius.has_value(); }
    bool has_action(std::string_view action) const;
    const FaceSpec* face(std::string_view face_id) const;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    ValidationError(std::string type_id, std::string field, const std::string& what);
    std::string type_id;
    std::string field;
};

struct UnknownBlockType : std::runtime_error {
    explicit UnknownBlockType(std::string type_id);
    std::string type_id;
};

/// Immutable module catalog keyed by type id. Safe to share between threads.
class Catalog {
public:
    Catalog(int version, std::map<std::string, BlockSpec, std::less<>> blocks);

    int version() const { return version_; }
    const BlockSpec& block_spec(std::string_view type_id) const;
    bool contains(std::string_view type_id) const;
    std::vector<std::string> type_ids() const;
    const std::map<std::string, BlockSpec, std::less<>>& blocks() const { return blocks_; }

    /// Digest of the parsed content; identical documents (modulo whitespace) hash equally.
    const std::string& content_hash() const { return hash_; }

    friend bool operator==(const Catalog& a, const Catalog& b);

private:
    int version_;
    std::map<std::string, BlockSpec, std::less<>> blocks_;
    std::string hash_;
};

Catalog load_catalog(std::string_view document);
Catalog load_catalog_file(const std::filesystem::path& path);
std::string serialize_catalog(const Catalog& catalog);

/// Catalog path: $BUILDARENA_CATALOG when set, the source tree asset otherwise.
std::filesystem::path default_catalog_path();
/// Root of the shipped data files; BUILDARENA_ASSETS overrides the build-time location.
std::filesystem::path asset_dir();
std::shared_ptr<const Catalog> load_default_catalog();

/// Deterministic natural-language summary of a block type (shape, mass, faces, constants).
std::string describe_block_type(const Catalog& catalog, std::string_view type_id);

std::string_view to_string(ConnectorKind kind);

}  // namespace buildarena::catalog
