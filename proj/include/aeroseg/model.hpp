#pragma once

// Hybrid point/graph segmentation network.
//
//   priming   ResP(3->64) T-Net, ResP(64->64) T-Net
//   graph     4 x [GAT(8 heads x 64) -> relu -> T-Net]   (first GAT projects 64->512)
//   post      ResP(512->256) T-Net, ResP(256->128) T-Net
//   faces     [min | mean | max] over each triangle's vertices -> 384
//   head      Linear(384->64) relu Linear(64->4) softmax
//
// Every T-Net multiplies the features by its predicted transform (x <- x A) and
// the transforms of the last forward pass are returned for the orthogonality loss.

#include "aeroseg/layers.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <vector>

namespace aeroseg::nn {

struct ModelConfig {
  int input_width = 3;
  std::vector<int> priming_widths{64, 64};
  int gat_layers = 4;
  int gat_heads = 8;
  int gat_head_width = 64;
  double attention_dropout = 0.1;
  std::vector<int> post_widths{256, 128};
  int classifier_hidden = 64;
  int tnet_hidden = 8;
  int num_classes = static_cast<int>(kNumParts);

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Graph, faces and input features of one mesh, ready for the network.
struct ModelInput {
  Neighborhoods neighborhoods;
  std::vector<Face> faces;
  Matrix features;  // nodes x input_width
};

/// One row per vertex: x y z.
Matrix position_features(const std::vector<Vec3>& positions);
ModelInput make_input(const MeshGraph& graph, const std::vector<Vec3>& positions);

struct ForwardResult {
  Var probs;                    // faces x num_classes, rows sum to 1
  std::vector<Var> transforms;  // every T-Net matrix, in network order
};

class SegmentationModel {
 public:
  explicit SegmentationModel(const ModelConfig& config, std::uint64_t seed = 0);

  /// `dropout_rng` non-null means training mode (attention dropout active).
  /// Throws NonFiniteError naming the first stage that produced NaN/Inf.
  ForwardResult forward(Tape& tape, const ModelInput& input, Rng* dropout_rng = nullptr);

  /// Inference-mode face probabilities.
  Matrix predict(const ModelInput& input);

  const ModelConfig& config() const { return config_; }
  /// Stable order: priming, graph, post, classifier.
  std::vector<Parameter*> parameters();
  std::size_t parameter_count();
  void zero_grad();

 private:
  ModelConfig config_;
  std::vector<ResPBlock> priming_;
  std::vector<TNet> priming_tnets_;
  std::vector<GatLayer> gat_;
  std::vector<TNet> gat_tnets_;
  std::vector<ResPBlock> post_;
  std::vector<TNet> post_tnets_;
  std::vector<Linear> classifier_;
};

}  // namespace aeroseg::nn
