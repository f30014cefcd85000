#pragma once

// Glue between the trained network, the conformal layer and CAD projection.

#include "aeroseg/conformal.hpp"
#include "aeroseg/model.hpp"
#include "aeroseg/projection.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace aeroseg {

/// Normalizes the mesh exactly as training does and builds the network input.
nn::ModelInput prepare_input(const LabeledMesh& mesh);

/// Inference-mode class probabilities, one row per face.
std::vector<ClassProbs> predict_probs(nn::SegmentationModel& model, const LabeledMesh& mesh);

PartLabel argmax(const ClassProbs& probs);

std::vector<LabelSet> conformal_sets(const ConformalCalibrator& calibrator,
                                     const std::vector<ClassProbs>& probs);
/// Singleton {argmax} per face: plain majority voting without conformal sets.
std::vector<LabelSet> top1_sets(const std::vector<ClassProbs>& probs);

/// Assigns the mesh's faces (original coordinates) to surfaces and votes.
std::vector<SurfaceClassification> classify_mesh_surfaces(const LabeledMesh& mesh,
                                                          const std::vector<SurfaceGrid>& surfaces,
                                                          const std::vector<LabelSet>& sets,
                                                          const RefinementPriority& priority = {});

/// surface id -> true label for every grid that carries one.
std::map<int, PartLabel> surface_truths(const std::vector<SurfaceGrid>& surfaces);

struct DatasetEntry {
  std::string name;
  LabeledMesh mesh;  // labeled
  std::vector<SurfaceGrid> surfaces;
};

/// Reads every sample named in <dir>/manifest.json. Throws on missing files.
std::vector<DatasetEntry> load_dataset_dir(const std::filesystem::path& dir);

}  // namespace aeroseg
