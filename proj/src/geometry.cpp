#include "aeroseg/geometry.hpp"

#include "aeroseg/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

namespace aeroseg {

namespace {

constexpr std::array<std::string_view, kNumParts> kPartNames{"fuselage", "wing", "stabilizer",
                                                             "engine"};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

}  // namespace

std::string_view to_string(PartLabel label) noexcept { return kPartNames[index_of(label)]; }

PartLabel part_label_from_id(long id) {
  if (id < 0 || id >= static_cast<long>(kNumParts))
    throw ValidationError("part label id " + std::to_string(id) + " outside 0.." +
                          std::to_string(kNumParts - 1));
  return static_cast<PartLabel>(id);
}

PartLabel parse_part_label(std::string_view text) {
  for (std::size_t i = 0; i < kNumParts; ++i)
    if (text == kPartNames[i]) return static_cast<PartLabel>(i);
  long id = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), id);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError("unknown part label '" + std::string(text) + "'");
  return part_label_from_id(id);
}

void LabeledMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    if (!vertices[i].allFinite())
      throw ValidationError("vertex " + std::to_string(i) + " has a non-finite coordinate");
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    for (auto idx : face)
      if (idx >= n)
        throw ValidationError("face " + std::to_string(f) + " references vertex " +
                              std::to_string(idx) + " but the mesh has " + std::to_string(n) +
                              " vertices");
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2])
      throw ValidationError("face " + std::to_string(f) + " is degenerate (repeated vertex)");
  }
  if (face_labels && face_labels->size() != faces.size())
    throw ValidationError("label count " + std::to_string(face_labels->size()) +
                          " does not match face count " + std::to_string(faces.size()));
}

void SurfaceGrid::validate() const {
  if (rows == 0 || cols == 0 || points.empty())
    throw ValidationError("surface " + std::to_string(surface_id) + " has an empty grid");
  if (points.size() != rows * cols)
    throw ValidationError("surface " + std::to_string(surface_id) + " declares " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " but holds " +
                          std::to_string(points.size()) + " points");
  for (const auto& p : points)
    if (!p.allFinite())
      throw ValidationError("surface " + std::to_string(surface_id) + " has a non-finite point");
}

MeshGraph build_graph(const LabeledMesh& mesh) {
  std::vector<std::uint64_t> keys;
  keys.reserve(mesh.faces.size() * 3);
  for (const auto& f : mesh.faces) {
    keys.push_back(edge_key(f[0], f[1]));
    keys.push_back(edge_key(f[1], f[2]));
    keys.push_back(edge_key(f[2], f[0]));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  MeshGraph graph;
  graph.node_count = mesh.vertices.size();
  graph.faces = mesh.faces;
  graph.edges.reserve(keys.size());
  for (auto k : keys)
    graph.edges.emplace_back(static_cast<std::uint32_t>(k >> 32),
                             static_cast<std::uint32_t>(k & 0xffffffffu));
  return graph;
}

Neighborhoods self_loop_neighborhoods(const MeshGraph& graph) {
  const auto n = graph.node_count;
  std::vector<std::size_t> degree(n, 1);
  for (const auto& [a, b] : graph.edges) {
    ++degree[a];
    ++degree[b];
  }
  Neighborhoods nb;
  nb.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) nb.offsets[i + 1] = nb.offsets[i] + degree[i];
  nb.indices.resize(nb.offsets[n]);
  std::vector<std::size_t> cursor(nb.offsets.begin(), nb.offsets.end() - 1);
  for (std::size_t i = 0; i < n; ++i) nb.indices[cursor[i]++] = static_cast<std::uint32_t>(i);
  for (const auto& [a, b] : graph.edges) {
    nb.indices[cursor[a]++] = b;
    nb.indices[cursor[b]++] = a;
  }
  return nb;
}

std::vector<Vec3> face_centroids(const LabeledMesh& mesh) {
  std::vector<Vec3> out;
  out.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces)
    out.push_back((mesh.vertices[f[0]] + mesh.vertices[f[1]] + mesh.vertices[f[2]]) / 3.0);
  return out;
}

BoundingBox bounding_box(const std::vector<Vec3>& points) {
  if (points.empty()) throw ValidationError("bounding box of an empty point set");
  BoundingBox box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

NormalizedMesh normalize(const LabeledMesh& mesh) {
  const auto box = bounding_box(mesh.vertices);
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) throw ValidationError("cannot normalize: bounding box has zero extent");

  NormalizedMesh out{mesh, {box.center(), 1.0 / longest}};
  for (auto& v : out.mesh.vertices) v = out.record.apply(v);
  return out;
}

LabeledMesh denormalize(const LabeledMesh& mesh, const NormalizationRecord& record) {
  LabeledMesh out = mesh;
  for (auto& v : out.vertices) v = record.invert(v);
  return out;
}

std::vector<std::size_t> edge_face_counts(const LabeledMesh& mesh, const MeshGraph& graph) {
  std::map<std::uint64_t, std::size_t> slot;
  for (std::size_t i = 0; i < graph.edges.size(); ++i)
    slot.emplace(edge_key(graph.edges[i].first, graph.edges[i].second), i);
  std::vector<std::size_t> counts(graph.edges.size(), 0);
  for (const auto& f : mesh.faces)
    for (int k = 0; k < 3; ++k) ++counts[slot.at(edge_key(f[k], f[(k + 1) % 3]))];
  return counts;
}

bool is_closed_surface(const LabeledMesh& mesh) {
  const auto counts = edge_face_counts(mesh, build_graph(mesh));
  return std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 2; });
}

}  // namespace aeroseg
