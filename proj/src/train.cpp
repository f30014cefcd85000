#include "aeroseg/train.hpp"

#include "aeroseg/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aeroseg::nn {

double LearningRateSchedule::at(int epoch, int total_epochs) const {
  if (total_epochs <= 0) throw ValidationError("learning-rate schedule needs a positive length");
  const long interval = static_cast<long>(epoch) * (decays + 1) / total_epochs;
  const long drops = std::clamp<long>(interval, 0, decays);
  return base * std::pow(factor, static_cast<double>(drops));
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  for (auto* p : params_) {
    first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(double learning_rate) {
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.eps;
  // One fused pass per tensor; the optimizer state dominates memory traffic.
  for (std::size_t k = 0; k < params_.size(); ++k) {
    double* g = params_[k]->grad.data();
    double* w = params_[k]->value.data();
    double* m = first_[k].data();
    double* v = second_[k].data();
    const auto size = params_[k]->value.size();
    for (Eigen::Index i = 0; i < size; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      w[i] -= learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
      g[i] = 0.0;
    }
  }
}

Sample make_sample(const LabeledMesh& mesh, std::string name) {
  if (!mesh.labeled()) throw ValidationError("training sample '" + name + "' has no labels");
  Sample s;
  s.name = std::move(name);
  s.mesh = normalize(mesh).mesh;
  s.input = make_input(build_graph(s.mesh), s.mesh.vertices);
  return s;
}

Accuracy evaluate_accuracy(SegmentationModel& model, std::span<const Sample> samples) {
  Accuracy acc;
  double per_mesh = 0.0;
  for (const auto& s : samples) {
    const Matrix probs = model.predict(s.input);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
      Eigen::Index best = 0;
      probs.row(i).maxCoeff(&best);
      if (static_cast<std::size_t>(best) == index_of((*s.mesh.face_labels)[i])) ++correct;
    }
    acc.correct += correct;
    acc.faces += static_cast<std::size_t>(probs.rows());
    per_mesh += probs.rows() ? static_cast<double>(correct) / probs.rows() : 0.0;
  }
  if (acc.faces) acc.pooled = static_cast<double>(acc.correct) / acc.faces;
  if (!samples.empty()) acc.mean_per_mesh = per_mesh / samples.size();
  return acc;
}

std::array<double, 3> train_step(SegmentationModel& model, Adam& optimizer, const ModelInput& input,
                                 std::span<const PartLabel> labels, double gamma,
                                 double learning_rate, Rng* dropout_rng) {
  Tape tape;
  const auto out = model.forward(tape, input, dropout_rng);
  const auto loss = total_loss(out.probs, labels, out.transforms, gamma);
  const std::array<double, 3> values{loss.total.scalar(), loss.classification.scalar(),
                                     loss.regularization.scalar()};
  if (!std::isfinite(values[0])) return values;
  tape.backward(loss.total);
  optimizer.step(learning_rate);
  return values;
}

TrainResult train(SegmentationModel& model, std::span<const Sample> training,
                  std::span<const Sample> validation, const TrainConfig& config,
                  const TrainCallbacks& callbacks) {
  if (config.epochs < 1) throw ValidationError("training needs at least one epoch");
  if (training.empty()) throw ValidationError("training set is empty");

  Rng rng(config.seed);
  Adam optimizer(model.parameters(), config.adam);
  TrainResult result;
  std::vector<Matrix> best;
  std::vector<std::size_t> order(training.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    AugmentationParams aug = config.augmentation;
    aug.epoch = epoch;
    aug.tau = config.epochs;
    aug.validate();

    EpochRecord record;
    record.epoch = epoch;
    record.xi = config.augment ? aug.scheduled() : std::array<double, 5>{};
    record.learning_rate = config.learning_rate.at(epoch, config.epochs);

    std::shuffle(order.begin(), order.end(), rng);
    for (auto idx : order) {
      const Sample& s = training[idx];
      const ModelInput* input = &s.input;
      ModelInput augmented;
      if (config.augment) {
        const auto mesh = augment(s.mesh, aug, rng);
        augmented.neighborhoods = s.input.neighborhoods;
        augmented.faces = mesh.faces;
        augmented.features = position_features(mesh.vertices);
        input = &augmented;
      }
      std::array<double, 3> losses{};
      try {
        losses = train_step(model, optimizer, *input, *s.mesh.face_labels, config.gamma,
                            record.learning_rate, &rng);
      } catch (const NonFiniteError& e) {
        throw TrainingDiverged(epoch, step, e.what());
      }
      if (!std::isfinite(losses[0])) throw TrainingDiverged(epoch, step, "non-finite loss");
      record.train_loss += losses[0];
      record.cls_loss += losses[1];
      record.treg_loss += losses[2];
      ++step;
    }
    const double n = static_cast<double>(training.size());
    record.train_loss /= n;
    record.cls_loss /= n;
    record.treg_loss /= n;

    record.validation = evaluate_accuracy(model, validation);
    result.history.push_back(record);
    if (callbacks.on_epoch) callbacks.on_epoch(record);

    const bool improved =
        validation.empty() || record.validation.pooled > result.best_accuracy;
    if (improved) {
      result.best_epoch = epoch;
      result.best_accuracy = validation.empty() ? -1.0 : record.validation.pooled;
      best.clear();
      for (auto* p : model.parameters()) best.push_back(p->value);
      if (callbacks.on_best) callbacks.on_best(record, model);
    }
  }

  auto params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) params[k]->value = best[k];
  return result;
}

}  // namespace aeroseg::nn
