#pragma once

// Mesh-to-CAD projection: each face centroid goes to the surface grid holding its
// nearest point, then faces vote on their surface with their conformal label sets.

#include "aeroseg/conformal.hpp"
#include "aeroseg/geometry.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace aeroseg {

struct SurfaceAssignment {
  std::size_t face = 0;
  int surface_id = 0;
  double distance = 0.0;
};

/// Total order over parts by required mesh refinement, most refined first.
class RefinementPriority {
 public:
  /// wing > stabilizer > engine > fuselage.
  RefinementPriority();
  /// Throws ValidationError unless `order` is a permutation of all parts.
  explicit RefinementPriority(std::vector<PartLabel> order);

  /// 0 = most refined.
  std::size_t rank(PartLabel l) const { return rank_[index_of(l)]; }
  bool more_refined(PartLabel a, PartLabel b) const { return rank(a) < rank(b); }
  const std::vector<PartLabel>& order() const { return order_; }

 private:
  std::vector<PartLabel> order_;
  std::array<std::size_t, kNumParts> rank_{};
};

enum class DecisionMode { majority, conservative_tiebreak };
std::string_view to_string(DecisionMode mode);
DecisionMode parse_decision_mode(std::string_view text);

struct SurfaceClassification {
  int surface_id = 0;
  PartLabel label = PartLabel::fuselage;
  std::array<std::size_t, kNumParts> votes{};
  std::size_t face_count = 0;
  DecisionMode mode = DecisionMode::majority;
};

/// min over grid points of |centroid - point|. Grid must be non-empty.
double face_surface_distance(const Vec3& centroid, const SurfaceGrid& grid);

/// Nearest surface per face; equal distances go to the lowest surface id.
/// Surfaces are visited in id order and skipped when their bounding box is already
/// farther than the best match, so the result equals the exhaustive scan.
std::vector<SurfaceAssignment> assign_faces(std::span<const Vec3> centroids,
                                            std::span<const SurfaceGrid> grids);

/// Votes of the faces assigned to one surface. A class wins outright when it holds
/// more votes than half the voting faces (ties among several such classes go to
/// the higher-priority one). Otherwise the two classes with most votes are taken,
/// vote ties broken toward priority, and the more refined of the two wins.
/// Throws ValidationError when `face_sets` is empty.
SurfaceClassification classify_surface(int surface_id, std::span<const LabelSet> face_sets,
                                       const RefinementPriority& priority = {});

/// Groups faces by assignment and classifies every surface that received faces.
/// Surfaces without faces are skipped. Output is ordered by surface id.
std::vector<SurfaceClassification> classify_surfaces(
    std::span<const SurfaceAssignment> assignments, std::span<const LabelSet> face_sets,
    const RefinementPriority& priority = {});

struct SurfaceReport {
  std::size_t total = 0;
  std::size_t incorrect = 0;
  std::size_t under_refined = 0;
  std::size_t over_refined = 0;
  double accuracy = 0.0;
};

/// `truths` maps surface id to its true part. Classifications without a truth are
/// ignored.
SurfaceReport evaluate_surfaces(std::span<const SurfaceClassification> classifications,
                                const std::map<int, PartLabel>& truths,
                                const RefinementPriority& priority = {});

/// CSV `surface_id,label,mode,votes_fuselage,votes_wing,votes_stabilizer,votes_engine`.
std::string format_classifications(std::span<const SurfaceClassification> classifications);
std::vector<SurfaceClassification> parse_classifications(const std::string& text,
                                                         const std::string& source = "<csv>");

/// Uniform rows x cols sampling of a parametric patch f(u, v), u, v in [0, 1].
template <class Patch>
SurfaceGrid sample_patch(int surface_id, const Patch& patch, std::size_t rows = 16,
                         std::size_t cols = 16) {
  SurfaceGrid g;
  g.surface_id = surface_id;
  g.rows = rows;
  g.cols = cols;
  g.points.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double u = rows > 1 ? static_cast<double>(r) / static_cast<double>(rows - 1) : 0.5;
      const double v = cols > 1 ? static_cast<double>(c) / static_cast<double>(cols - 1) : 0.5;
      g.points.push_back(patch(u, v));
    }
  return g;
}

}  // namespace aeroseg
