#include "aeroseg/pipeline.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <nlohmann/json.hpp>

namespace aeroseg {

nn::ModelInput prepare_input(const LabeledMesh& mesh) {
  const auto normalized = normalize(mesh).mesh;
  return nn::make_input(build_graph(normalized), normalized.vertices);
}

std::vector<ClassProbs> predict_probs(nn::SegmentationModel& model, const LabeledMesh& mesh) {
  const nn::Matrix p = model.predict(prepare_input(mesh));
  if (p.cols() != static_cast<Eigen::Index>(kNumParts))
    throw ValidationError("model predicts " + std::to_string(p.cols()) + " classes, expected " +
                          std::to_string(kNumParts));
  std::vector<ClassProbs> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (std::size_t c = 0; c < kNumParts; ++c)
      out[static_cast<std::size_t>(i)][c] = p(i, static_cast<Eigen::Index>(c));
  return out;
}

PartLabel argmax(const ClassProbs& probs) {
  return static_cast<PartLabel>(ranking(probs)[0]);
}

std::vector<LabelSet> conformal_sets(const ConformalCalibrator& calibrator,
                                     const std::vector<ClassProbs>& probs) {
  std::vector<LabelSet> out;
  out.reserve(probs.size());
  for (const auto& p : probs) out.push_back(predict_set(calibrator, p));
  return out;
}

std::vector<LabelSet> top1_sets(const std::vector<ClassProbs>& probs) {
  std::vector<LabelSet> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i].insert(argmax(probs[i]));
  return out;
}

std::vector<SurfaceClassification> classify_mesh_surfaces(const LabeledMesh& mesh,
                                                          const std::vector<SurfaceGrid>& surfaces,
                                                          const std::vector<LabelSet>& sets,
                                                          const RefinementPriority& priority) {
  if (sets.size() != mesh.face_count())
    throw ValidationError("got " + std::to_string(sets.size()) + " prediction sets for " +
                          std::to_string(mesh.face_count()) + " faces");
  const auto centroids = face_centroids(mesh);
  const auto assignments = assign_faces(centroids, surfaces);
  return classify_surfaces(assignments, sets, priority);
}

std::map<int, PartLabel> surface_truths(const std::vector<SurfaceGrid>& surfaces) {
  std::map<int, PartLabel> out;
  for (const auto& g : surfaces)
    if (g.true_label) out[g.surface_id] = *g.true_label;
  return out;
}

std::vector<DatasetEntry> load_dataset_dir(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(manifest_path.string(), 0, e.what());
  }
  if (!manifest.contains("samples") || !manifest["samples"].is_array())
    throw ValidationError(manifest_path.string() + ": no 'samples' array");
  std::vector<DatasetEntry> out;
  for (const auto& s : manifest["samples"]) {
    DatasetEntry e;
    e.name = s.at("name").get<std::string>();
    e.mesh = load_mesh(dir / (e.name + ".mesh"), dir / (e.name + ".labels.csv"));
    e.surfaces = load_surfaces(dir / (e.name + ".surfaces"));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace aeroseg
