#include "aeroseg/checkpoint.hpp"
#include "aeroseg/dataset.hpp"
#include "aeroseg/train.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aeroseg;
using namespace aeroseg::nn;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.priming_widths = {8, 8};
  c.gat_layers = 2;
  c.gat_heads = 2;
  c.gat_head_width = 4;
  c.post_widths = {8, 6};
  c.classifier_hidden = 8;
  c.tnet_hidden = 3;
  return c;
}

std::vector<Sample> tiny_set() {
  std::vector<Sample> out;
  for (const auto& s : plan_dataset(2, 1, 1, 5)) out.push_back(make_sample(generate_aircraft(s.params).mesh, s.name));
  return out;
}

}  // namespace

TEST(LearningRate, StepDecayIntervals) {
  LearningRateSchedule lr;
  EXPECT_DOUBLE_EQ(lr.at(0, 160), 1e-4);
  EXPECT_DOUBLE_EQ(lr.at(9, 160), 1e-4);
  EXPECT_DOUBLE_EQ(lr.at(10, 160), 1e-4 * 0.65);
  EXPECT_NEAR(lr.at(159, 160), 1e-4 * std::pow(0.65, 15), 1e-20);
  EXPECT_NEAR(lr.at(159, 160), 1.56e-7, 0.005e-7);
  // Never more than `decays` drops, even when epochs do not divide evenly.
  EXPECT_NEAR(lr.at(49, 50), 1e-4 * std::pow(0.65, 15), 1e-20);
  for (int e = 1; e < 50; ++e) EXPECT_LE(lr.at(e, 50), lr.at(e - 1, 50));
}

TEST(Adam, MatchesHandComputedUpdates) {
  Parameter p("p", Matrix::Constant(1, 2, 1.0));
  Adam adam({&p});
  double m = 0.0, v = 0.0, x = 1.0;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8, lr = 0.01;
  for (int t = 1; t <= 5; ++t) {
    const double g = 2.0 * x;  // d/dx x^2
    p.grad.setConstant(g);
    adam.step(lr);
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    const double mhat = m / (1 - std::pow(b1, t));
    const double vhat = v / (1 - std::pow(b2, t));
    x -= lr * mhat / (std::sqrt(vhat) + eps);
    EXPECT_NEAR(p.value(0, 0), x, 1e-15);
    EXPECT_EQ(p.grad(0, 0), 0.0);
  }
  EXPECT_EQ(adam.steps(), 5u);
}

TEST(Train, OneStepAtTauOneLowersLoss) {
  auto data = tiny_set();
  SegmentationModel m(tiny(), 2);
  const auto& s = data[0];
  const auto loss_before = [&] {
    Tape t;
    const auto out = m.forward(t, s.input);
    return total_loss(out.probs, *s.mesh.face_labels, out.transforms).total.scalar();
  };
  const double l0 = loss_before();
  Adam opt(m.parameters());
  train_step(m, opt, s.input, *s.mesh.face_labels, kDefaultGamma, 1e-4, nullptr);
  EXPECT_LT(loss_before(), l0);

  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.seed = 1;
  SegmentationModel m2(tiny(), 2);
  const auto r = train(m2, std::span<const Sample>(data.data(), 1), {}, cfg);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_TRUE(std::isfinite(r.history[0].train_loss));
}

TEST(Train, FixedSeedGivesIdenticalCheckpoints) {
  auto data = tiny_set();
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 42;
  auto run = [&] {
    SegmentationModel m(tiny(), 42);
    train(m, data, data, cfg);
    return fnv1a64(serialize_checkpoint(m, CheckpointFormat::binary));
  };
  EXPECT_EQ(run(), run());
}

TEST(Train, RecordsScheduleAndRestoresBest) {
  auto data = tiny_set();
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 3;
  SegmentationModel m(tiny(), 3);
  std::vector<EpochRecord> seen;
  int best_calls = 0;
  TrainCallbacks cb;
  cb.on_epoch = [&](const EpochRecord& r) { seen.push_back(r); };
  cb.on_best = [&](const EpochRecord&, SegmentationModel&) { ++best_calls; };
  const auto r = train(m, data, data, cfg, cb);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_EQ(seen[0].xi[0], 0.0);
  EXPECT_GE(best_calls, 1);
  EXPECT_DOUBLE_EQ(evaluate_accuracy(m, data).pooled, r.best_accuracy);
}

TEST(Train, RejectsEmptyInputs) {
  SegmentationModel m(tiny(), 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(train(m, {}, {}, cfg), ValidationError);
  cfg.epochs = 0;
  auto data = tiny_set();
  EXPECT_THROW(train(m, data, {}, cfg), ValidationError);
}

TEST(Sample, UnlabeledMeshRejected) {
  auto mesh = fixtures::octa();
  mesh.face_labels.reset();
  EXPECT_THROW(make_sample(mesh), Error);
}
