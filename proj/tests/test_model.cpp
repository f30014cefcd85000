#include "aeroseg/error.hpp"
#include "aeroseg/layers.hpp"
#include "aeroseg/model.hpp"
#include "aeroseg/pipeline.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace aeroseg;
using namespace aeroseg::nn;

namespace {

ModelConfig small_config() {
  ModelConfig c;
  c.priming_widths = {8, 8};
  c.gat_layers = 2;
  c.gat_heads = 2;
  c.gat_head_width = 4;
  c.post_widths = {6, 5};
  c.classifier_hidden = 6;
  c.tnet_hidden = 3;
  return c;
}

// Relabels vertices by `perm` (new index of old vertex i is perm[i]).
LabeledMesh permute_vertices(const LabeledMesh& m, const std::vector<std::uint32_t>& perm) {
  LabeledMesh out = m;
  for (std::size_t i = 0; i < m.vertices.size(); ++i) out.vertices[perm[i]] = m.vertices[i];
  for (auto& f : out.faces)
    for (auto& v : f) v = perm[v];
  return out;
}

}  // namespace

TEST(Aggregation, MinMeanMax) {
  Matrix rows(3, 2);
  rows << 1, 2, 3, 4, 5, 6;
  Matrix expect(1, 6);
  expect << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(aggregate_face(rows), expect);
}

TEST(Aggregation, OrderInvariant) {
  Matrix a(3, 2), b(3, 2);
  a << 0.5, -1, 2, 7, -3, 0.25;
  b << -3, 0.25, 0.5, -1, 2, 7;
  EXPECT_EQ(aggregate_face(a), aggregate_face(b));
}

TEST(Gat, TenNodesGiveFiveTwelveColumns) {
  Rng rng(1);
  MeshGraph g;
  g.node_count = 10;
  for (std::uint32_t i = 0; i + 1 < 10; ++i) g.edges.push_back({i, i + 1});
  const auto nb = self_loop_neighborhoods(g);
  GatLayer gat(64, 8, 64, 0.1, "gat", rng);
  Tape t;
  std::normal_distribution<double> n;
  Matrix x(10, 64);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  const auto y = gat.forward(t, t.constant(x), nb);
  EXPECT_EQ(y.rows(), 10);
  EXPECT_EQ(y.cols(), 512);
}

TEST(Model, DefaultArchitectureShape) {
  SegmentationModel m(ModelConfig{}, 3);
  const auto input = prepare_input(fixtures::octa());
  Tape t;
  const auto out = m.forward(t, input);
  EXPECT_EQ(out.probs.rows(), 8);
  EXPECT_EQ(out.probs.cols(), 4);
  // Two priming, four graph and two post-processing transforms.
  ASSERT_EQ(out.transforms.size(), 8u);
  EXPECT_EQ(out.transforms[0].rows(), 64);
  EXPECT_EQ(out.transforms[2].rows(), 512);
  EXPECT_EQ(out.transforms[6].rows(), 256);
  EXPECT_EQ(out.transforms[7].rows(), 128);
}

TEST(Model, RowsSumToOne) {
  SegmentationModel m(small_config(), 4);
  const auto p = m.predict(prepare_input(fixtures::octa()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-9);
}

TEST(Model, TransformsStartAtIdentity) {
  SegmentationModel m(small_config(), 5);
  Tape t;
  const auto out = m.forward(t, prepare_input(fixtures::octa()));
  for (const auto& a : out.transforms)
    EXPECT_EQ(a.value(), Matrix::Identity(a.rows(), a.cols()));
}

TEST(Model, FaceProbabilitiesInvariantToVertexPermutation) {
  SegmentationModel m(ModelConfig{}, 6);
  const auto mesh = fixtures::octa();
  std::vector<std::uint32_t> perm(mesh.vertex_count());
  std::iota(perm.begin(), perm.end(), 0u);
  std::mt19937_64 rng(6);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto a = m.predict(prepare_input(mesh));
  const auto b = m.predict(prepare_input(permute_vertices(mesh, perm)));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Model, SameSeedSameWeights) {
  SegmentationModel a(small_config(), 9), b(small_config(), 9), c(small_config(), 10);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->value, pb[i]->value);
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    differs = differs || pa[i]->value != pc[i]->value;
  }
  EXPECT_TRUE(differs);
}

TEST(Model, WrongInputWidthThrows) {
  SegmentationModel m(small_config(), 1);
  auto input = prepare_input(fixtures::octa());
  input.features = Matrix::Zero(input.features.rows(), 5);
  EXPECT_THROW(m.predict(input), ValidationError);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  const auto c = small_config();
  nlohmann::json j = c;
  const auto back = j.get<ModelConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  auto bad = c;
  bad.gat_heads = 0;
  EXPECT_THROW(bad.validate(), ValidationError);
}
