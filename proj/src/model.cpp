#include "aeroseg/model.hpp"

#include "aeroseg/error.hpp"

namespace aeroseg::nn {

void ModelConfig::validate() const {
  auto positive = [](int v) { return v > 0; };
  if (input_width <= 0 || gat_layers < 0 || gat_heads <= 0 || gat_head_width <= 0 ||
      classifier_hidden <= 0 || tnet_hidden <= 0 || num_classes < 2)
    throw ValidationError("model config: widths and counts must be positive");
  if (priming_widths.empty() || post_widths.empty())
    throw ValidationError("model config: priming and post stages need at least one block");
  for (const auto& list : {priming_widths, post_widths})
    for (int w : list)
      if (!positive(w)) throw ValidationError("model config: widths must be positive");
  if (!(attention_dropout >= 0.0 && attention_dropout < 1.0))
    throw ValidationError("model config: attention dropout must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"input_width", c.input_width},
                     {"priming_widths", c.priming_widths},
                     {"gat_layers", c.gat_layers},
                     {"gat_heads", c.gat_heads},
                     {"gat_head_width", c.gat_head_width},
                     {"attention_dropout", c.attention_dropout},
                     {"post_widths", c.post_widths},
                     {"classifier_hidden", c.classifier_hidden},
                     {"tnet_hidden", c.tnet_hidden},
                     {"num_classes", c.num_classes}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.input_width = j.value("input_width", d.input_width);
  c.priming_widths = j.value("priming_widths", d.priming_widths);
  c.gat_layers = j.value("gat_layers", d.gat_layers);
  c.gat_heads = j.value("gat_heads", d.gat_heads);
  c.gat_head_width = j.value("gat_head_width", d.gat_head_width);
  c.attention_dropout = j.value("attention_dropout", d.attention_dropout);
  c.post_widths = j.value("post_widths", d.post_widths);
  c.classifier_hidden = j.value("classifier_hidden", d.classifier_hidden);
  c.tnet_hidden = j.value("tnet_hidden", d.tnet_hidden);
  c.num_classes = j.value("num_classes", d.num_classes);
}

Matrix position_features(const std::vector<Vec3>& positions) {
  Matrix out(static_cast<Eigen::Index>(positions.size()), 3);
  for (std::size_t i = 0; i < positions.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = positions[i].transpose();
  return out;
}

ModelInput make_input(const MeshGraph& graph, const std::vector<Vec3>& positions) {
  if (positions.size() != graph.node_count)
    throw ValidationError("position count does not match graph nodes");
  ModelInput in;
  in.neighborhoods = self_loop_neighborhoods(graph);
  in.faces = graph.faces;
  in.features = position_features(positions);
  return in;
}

SegmentationModel::SegmentationModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  Rng rng(seed);
  int width = config_.input_width;
  for (std::size_t i = 0; i < config_.priming_widths.size(); ++i) {
    const auto name = "priming." + std::to_string(i);
    priming_.emplace_back(width, config_.priming_widths[i], name, rng);
    width = config_.priming_widths[i];
    priming_tnets_.emplace_back(width, config_.tnet_hidden, name + ".tnet", rng);
  }
  for (int i = 0; i < config_.gat_layers; ++i) {
    const auto name = "graph." + std::to_string(i);
    gat_.emplace_back(width, config_.gat_heads, config_.gat_head_width, config_.attention_dropout,
                      name, rng);
    width = gat_.back().out_width();
    gat_tnets_.emplace_back(width, config_.tnet_hidden, name + ".tnet", rng);
  }
  for (std::size_t i = 0; i < config_.post_widths.size(); ++i) {
    const auto name = "post." + std::to_string(i);
    post_.emplace_back(width, config_.post_widths[i], name, rng);
    width = config_.post_widths[i];
    post_tnets_.emplace_back(width, config_.tnet_hidden, name + ".tnet", rng);
  }
  classifier_.emplace_back(3 * width, config_.classifier_hidden, "classifier.0", rng);
  classifier_.emplace_back(config_.classifier_hidden, config_.num_classes, "classifier.1", rng);
}

ForwardResult SegmentationModel::forward(Tape& tape, const ModelInput& input, Rng* dropout_rng) {
  if (input.features.cols() != config_.input_width)
    throw ValidationError("input feature width does not match the model");
  ForwardResult result;
  int layer = 0;
  auto transform = [&](TNet& tnet, Var x) {
    auto a = tnet.transform(tape, x);
    result.transforms.push_back(a);
    auto y = matmul(x, a);
    require_finite(y, layer, "t-net");
    return y;
  };

  Var x = tape.constant(input.features);
  for (std::size_t i = 0; i < priming_.size(); ++i, ++layer) {
    x = priming_[i].forward(tape, x);
    require_finite(x, layer, "priming resp");
    x = transform(priming_tnets_[i], x);
  }
  for (std::size_t i = 0; i < gat_.size(); ++i, ++layer) {
    x = relu(gat_[i].forward(tape, x, input.neighborhoods, dropout_rng));
    require_finite(x, layer, "graph attention");
    x = transform(gat_tnets_[i], x);
  }
  for (std::size_t i = 0; i < post_.size(); ++i, ++layer) {
    x = post_[i].forward(tape, x);
    require_finite(x, layer, "post resp");
    x = transform(post_tnets_[i], x);
  }
  x = face_pool(x, input.faces);
  x = relu(classifier_[0].forward(tape, x));
  x = classifier_[1].forward(tape, x);
  require_finite(x, layer, "classifier");
  result.probs = softmax_rows(x);
  return result;
}

Matrix SegmentationModel::predict(const ModelInput& input) {
  Tape tape;
  return forward(tape, input).probs.value();
}

std::vector<Parameter*> SegmentationModel::parameters() {
  std::vector<Parameter*> out;
  for (std::size_t i = 0; i < priming_.size(); ++i) {
    priming_[i].collect(out);
    priming_tnets_[i].collect(out);
  }
  for (std::size_t i = 0; i < gat_.size(); ++i) {
    gat_[i].collect(out);
    gat_tnets_[i].collect(out);
  }
  for (std::size_t i = 0; i < post_.size(); ++i) {
    post_[i].collect(out);
    post_tnets_[i].collect(out);
  }
  for (auto& l : classifier_) l.collect(out);
  return out;
}

std::size_t SegmentationModel::parameter_count() {
  std::size_t n = 0;
  for (auto* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void SegmentationModel::zero_grad() {
  for (auto* p : parameters()) p->grad.setZero();
}

}  // namespace aeroseg::nn
