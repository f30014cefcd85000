#pragma once

// Triangle-mesh and CAD-surface data model.
//
// Conventions:
// - Triangles only. Faces are 0-based vertex-index triples.
// - Part labels live beside the geometry (one per face) and are optional so
//   unlabeled inference meshes share the same type.
// - Surface grids are pre-discretized CAD patches: a rows x cols lattice of points.

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aeroseg {

using Vec3 = Eigen::Vector3d;
using Face = std::array<std::uint32_t, 3>;

/// The closed set of aircraft parts. Values are the on-disk label ids.
enum class PartLabel : std::uint8_t { fuselage = 0, wing = 1, stabilizer = 2, engine = 3 };

inline constexpr std::size_t kNumParts = 4;
inline constexpr std::array<PartLabel, kNumParts> kAllParts{
    PartLabel::fuselage, PartLabel::wing, PartLabel::stabilizer, PartLabel::engine};

std::string_view to_string(PartLabel label) noexcept;
/// Accepts a name ("wing") or an id ("1"). Throws ValidationError otherwise.
PartLabel parse_part_label(std::string_view text);
/// Throws ValidationError when `id` is outside 0..3.
PartLabel part_label_from_id(long id);
inline std::size_t index_of(PartLabel label) noexcept { return static_cast<std::size_t>(label); }

struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::optional<std::vector<PartLabel>> face_labels;

  std::size_t vertex_count() const noexcept { return vertices.size(); }
  std::size_t face_count() const noexcept { return faces.size(); }
  bool labeled() const noexcept { return face_labels.has_value(); }

  /// Throws ValidationError on out-of-range indices, degenerate faces,
  /// label-count mismatch or non-finite coordinates.
  void validate() const;
};

struct SurfaceGrid {
  int surface_id = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Vec3> points;  // row-major, rows * cols entries
  std::optional<PartLabel> true_label;

  const Vec3& at(std::size_t r, std::size_t c) const { return points[r * cols + c]; }
  void validate() const;
};

/// Undirected vertex graph of a mesh. Edges are stored once as (lo, hi), sorted.
struct MeshGraph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  std::vector<Face> faces;
};

/// Compressed neighbor lists with every node listed as its own first neighbor.
struct Neighborhoods {
  std::vector<std::size_t> offsets;  // node_count + 1 entries
  std::vector<std::uint32_t> indices;

  std::size_t node_count() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }
};

MeshGraph build_graph(const LabeledMesh& mesh);
Neighborhoods self_loop_neighborhoods(const MeshGraph& graph);

std::vector<Vec3> face_centroids(const LabeledMesh& mesh);

struct BoundingBox {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
};

/// Throws ValidationError on an empty point list.
BoundingBox bounding_box(const std::vector<Vec3>& points);

/// normalized = (original - center) * scale; original = normalized / scale + center.
struct NormalizationRecord {
  Vec3 center = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return (p - center) * scale; }
  Vec3 invert(const Vec3& p) const { return p / scale + center; }
};

struct NormalizedMesh {
  LabeledMesh mesh;
  NormalizationRecord record;
};

/// Centers the bounding box at the origin and scales its longest edge to 1.
/// Throws ValidationError when the bounding box has zero extent.
NormalizedMesh normalize(const LabeledMesh& mesh);

/// Returns a copy with every vertex mapped through `record.invert`.
LabeledMesh denormalize(const LabeledMesh& mesh, const NormalizationRecord& record);

/// Number of faces incident to each undirected edge, keyed like MeshGraph::edges.
std::vector<std::size_t> edge_face_counts(const LabeledMesh& mesh, const MeshGraph& graph);

/// True when every edge is shared by exactly two faces.
bool is_closed_surface(const LabeledMesh& mesh);

}  // namespace aeroseg
