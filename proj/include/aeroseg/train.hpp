#pragma once

#include "aeroseg/augment.hpp"
#include "aeroseg/error.hpp"
#include "aeroseg/loss.hpp"
#include "aeroseg/model.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace aeroseg::nn {

/// Step decay: `decays` drops by `factor` at equal intervals over the run, so the
/// last of the (decays + 1) intervals trains at base * factor^decays.
struct LearningRateSchedule {
  double base = 1e-4;
  int decays = 15;
  double factor = 0.65;

  double at(int epoch, int total_epochs) const;
};

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config = {});

  /// Applies one update from the accumulated gradients, then zeroes them.
  void step(double learning_rate);
  std::size_t steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
  std::size_t steps_ = 0;
};

struct TrainConfig {
  int epochs = 200;  // also the augmentation schedule length tau
  LearningRateSchedule learning_rate;
  AdamConfig adam;
  double gamma = kDefaultGamma;
  AugmentationParams augmentation;
  bool augment = true;
  std::uint64_t seed = 0;
};

/// One mesh prepared for training: normalized geometry, labels and graph input.
struct Sample {
  std::string name;
  LabeledMesh mesh;  // normalized
  ModelInput input;
};

/// Normalizes `mesh` and builds its graph input. Throws if the mesh is unlabeled.
Sample make_sample(const LabeledMesh& mesh, std::string name = {});

struct Accuracy {
  double pooled = 0.0;         // correct faces / all faces
  double mean_per_mesh = 0.0;  // average of per-mesh accuracies
  std::size_t faces = 0;
  std::size_t correct = 0;
};

Accuracy evaluate_accuracy(SegmentationModel& model, std::span<const Sample> samples);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double cls_loss = 0.0;
  double treg_loss = 0.0;
  Accuracy validation;
  std::array<double, 5> xi{};
  double learning_rate = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = -1;
  double best_accuracy = -1.0;
};

struct TrainCallbacks {
  std::function<void(const EpochRecord&)> on_epoch;
  /// Called after the model reached a new best validation accuracy.
  std::function<void(const EpochRecord&, SegmentationModel&)> on_best;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int epoch, std::size_t step, const std::string& why)
      : Error("training diverged at epoch " + std::to_string(epoch) + ", step " +
              std::to_string(step) + ": " + why) {}
};

/// One gradient step on a single mesh. Returns (total, cls, treg) before the update.
std::array<double, 3> train_step(SegmentationModel& model, Adam& optimizer, const ModelInput& input,
                                 std::span<const PartLabel> labels, double gamma,
                                 double learning_rate, Rng* dropout_rng);

/// Per epoch: shuffle, augment every mesh at the scheduled intensity, one Adam step per
/// mesh, then measure validation accuracy. The best-scoring parameters are restored
/// into `model` before returning (the last epoch's when `validation` is empty).
TrainResult train(SegmentationModel& model, std::span<const Sample> training,
                  std::span<const Sample> validation, const TrainConfig& config,
                  const TrainCallbacks& callbacks = {});

}  // namespace aeroseg::nn
