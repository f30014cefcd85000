#pragma once

// Small meshes shared by the unit tests.

#include "aeroseg/geometry.hpp"

namespace aeroseg::fixtures {

// Regular tetrahedron-ish closed shell, one label per face.
inline LabeledMesh tetra() {
  LabeledMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
  m.face_labels = std::vector<PartLabel>{PartLabel::fuselage, PartLabel::wing,
                                         PartLabel::stabilizer, PartLabel::engine};
  return m;
}

// Octahedron: 6 vertices, 12 edges, 8 faces, closed.
inline LabeledMesh octa() {
  LabeledMesh m;
  m.vertices = {Vec3(1, 0, 0),  Vec3(-1, 0, 0), Vec3(0, 1, 0),
                Vec3(0, -1, 0), Vec3(0, 0, 1),  Vec3(0, 0, -1)};
  m.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
             {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  std::vector<PartLabel> labels;
  for (std::size_t i = 0; i < m.faces.size(); ++i) labels.push_back(kAllParts[i % kNumParts]);
  m.face_labels = labels;
  return m;
}

}  // namespace aeroseg::fixtures
