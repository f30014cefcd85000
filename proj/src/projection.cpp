#include "aeroseg/projection.hpp"

#include "aeroseg/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace aeroseg {

namespace {

double squared_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

// Lower bound of the squared distance from p to any point inside the box.
double squared_box_distance(const Vec3& p, const BoundingBox& box) {
  double acc = 0.0;
  for (int a = 0; a < 3; ++a) {
    double gap = 0.0;
    if (p[a] < box.min[a])
      gap = box.min[a] - p[a];
    else if (p[a] > box.max[a])
      gap = p[a] - box.max[a];
    acc += gap * gap;
  }
  return acc;
}

}  // namespace

RefinementPriority::RefinementPriority()
    : RefinementPriority({PartLabel::wing, PartLabel::stabilizer, PartLabel::engine,
                          PartLabel::fuselage}) {}

RefinementPriority::RefinementPriority(std::vector<PartLabel> order) : order_(std::move(order)) {
  if (order_.size() != kNumParts)
    throw ValidationError("refinement priority must list all " + std::to_string(kNumParts) +
                          " parts");
  std::array<bool, kNumParts> seen{};
  for (std::size_t i = 0; i < order_.size(); ++i) {
    const auto idx = index_of(order_[i]);
    if (seen[idx]) throw ValidationError("refinement priority lists a part twice");
    seen[idx] = true;
    rank_[idx] = i;
  }
}

std::string_view to_string(DecisionMode mode) {
  return mode == DecisionMode::majority ? "majority" : "conservative-tiebreak";
}

DecisionMode parse_decision_mode(std::string_view text) {
  if (text == "majority") return DecisionMode::majority;
  if (text == "conservative-tiebreak") return DecisionMode::conservative_tiebreak;
  throw ValidationError("unknown decision mode '" + std::string(text) + "'");
}

double face_surface_distance(const Vec3& centroid, const SurfaceGrid& grid) {
  if (grid.points.empty()) throw ValidationError("distance to an empty surface grid");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : grid.points) best = std::min(best, squared_distance(centroid, p));
  return std::sqrt(best);
}

std::vector<SurfaceAssignment> assign_faces(std::span<const Vec3> centroids,
                                            std::span<const SurfaceGrid> grids) {
  if (grids.empty()) throw ValidationError("no surfaces to assign faces to");
  std::vector<std::size_t> by_id(grids.size());
  for (std::size_t i = 0; i < grids.size(); ++i) {
    by_id[i] = i;
    if (grids[i].points.empty())
      throw ValidationError("surface " + std::to_string(grids[i].surface_id) + " is empty");
  }
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
    return grids[a].surface_id < grids[b].surface_id;
  });
  std::vector<BoundingBox> boxes;
  boxes.reserve(grids.size());
  for (const auto& g : grids) boxes.push_back(bounding_box(g.points));

  std::vector<SurfaceAssignment> out;
  out.reserve(centroids.size());
  for (std::size_t f = 0; f < centroids.size(); ++f) {
    const Vec3& c = centroids[f];
    double best = std::numeric_limits<double>::infinity();
    int best_id = 0;
    for (auto gi : by_id) {
      // Strictly farther boxes cannot win, equal ones could only tie a lower id.
      if (std::sqrt(squared_box_distance(c, boxes[gi])) > best) continue;
      const double d = face_surface_distance(c, grids[gi]);
      if (d < best) {
        best = d;
        best_id = grids[gi].surface_id;
      }
    }
    out.push_back({f, best_id, best});
  }
  return out;
}

SurfaceClassification classify_surface(int surface_id, std::span<const LabelSet> face_sets,
                                       const RefinementPriority& priority) {
  if (face_sets.empty())
    throw ValidationError("surface " + std::to_string(surface_id) + " has no assigned faces");
  SurfaceClassification out;
  out.surface_id = surface_id;
  out.face_count = face_sets.size();
  for (const auto& set : face_sets)
    for (auto l : set.labels()) ++out.votes[index_of(l)];

  // Rank classes by votes, then by priority.
  std::array<PartLabel, kNumParts> ranked = kAllParts;
  std::sort(ranked.begin(), ranked.end(), [&](PartLabel a, PartLabel b) {
    const auto va = out.votes[index_of(a)], vb = out.votes[index_of(b)];
    if (va != vb) return va > vb;
    return priority.more_refined(a, b);
  });

  const auto top_votes = out.votes[index_of(ranked[0])];
  if (2 * top_votes > out.face_count) {
    out.label = ranked[0];
    out.mode = DecisionMode::majority;
  } else {
    out.label = priority.more_refined(ranked[0], ranked[1]) ? ranked[0] : ranked[1];
    out.mode = DecisionMode::conservative_tiebreak;
  }
  return out;
}

std::vector<SurfaceClassification> classify_surfaces(
    std::span<const SurfaceAssignment> assignments, std::span<const LabelSet> face_sets,
    const RefinementPriority& priority) {
  std::map<int, std::vector<LabelSet>> grouped;
  for (const auto& a : assignments) {
    if (a.face >= face_sets.size())
      throw ValidationError("face " + std::to_string(a.face) + " has no prediction set");
    grouped[a.surface_id].push_back(face_sets[a.face]);
  }
  std::vector<SurfaceClassification> out;
  out.reserve(grouped.size());
  for (const auto& [id, sets] : grouped) out.push_back(classify_surface(id, sets, priority));
  return out;
}

SurfaceReport evaluate_surfaces(std::span<const SurfaceClassification> classifications,
                                const std::map<int, PartLabel>& truths,
                                const RefinementPriority& priority) {
  SurfaceReport r;
  for (const auto& c : classifications) {
    const auto it = truths.find(c.surface_id);
    if (it == truths.end()) continue;
    ++r.total;
    if (c.label == it->second) continue;
    ++r.incorrect;
    if (priority.more_refined(it->second, c.label))
      ++r.under_refined;
    else
      ++r.over_refined;
  }
  r.accuracy = r.total ? static_cast<double>(r.total - r.incorrect) / r.total : 0.0;
  return r;
}

std::string format_classifications(std::span<const SurfaceClassification> classifications) {
  std::string out = "surface_id,label,mode,votes_fuselage,votes_wing,votes_stabilizer,votes_engine\n";
  for (const auto& c : classifications) {
    out += std::to_string(c.surface_id);
    out += ',';
    out += to_string(c.label);
    out += ',';
    out += to_string(c.mode);
    for (auto v : c.votes) out += ',' + std::to_string(v);
    out += '\n';
  }
  return out;
}

std::vector<SurfaceClassification> parse_classifications(const std::string& text,
                                                         const std::string& source) {
  std::vector<SurfaceClassification> out;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.rfind("surface_id", 0) == 0) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 3 + kNumParts)
      throw ParseError(source, line_no, "expected " + std::to_string(3 + kNumParts) + " columns");
    SurfaceClassification c;
    auto number = [&](std::string_view tok, auto& value) {
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(source, line_no, "bad number '" + std::string(tok) + "'");
    };
    number(cells[0], c.surface_id);
    try {
      c.label = parse_part_label(cells[1]);
      c.mode = parse_decision_mode(cells[2]);
    } catch (const ValidationError& e) {
      throw ParseError(source, line_no, e.what());
    }
    for (std::size_t k = 0; k < kNumParts; ++k) number(cells[3 + k], c.votes[k]);
    out.push_back(c);
  }
  return out;
}

}  // namespace aeroseg
