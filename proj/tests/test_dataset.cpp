#include "aeroseg/dataset.hpp"
#include "aeroseg/error.hpp"
#include "aeroseg/pipeline.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <set>

using namespace aeroseg;

namespace {

std::size_t count_label(const LabeledMesh& m, PartLabel l) {
  return static_cast<std::size_t>(std::count(m.face_labels->begin(), m.face_labels->end(), l));
}

// Share of faces whose nearest surface grid carries the face's own label.
double grid_consistency(const GeneratedAircraft& a) {
  const auto centroids = face_centroids(a.mesh);
  const auto assign = assign_faces(centroids, a.surfaces);
  const auto truths = surface_truths(a.surfaces);
  std::size_t agree = 0;
  for (const auto& s : assign)
    if (truths.at(s.surface_id) == (*a.mesh.face_labels)[s.face]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(assign.size());
}

}  // namespace

TEST(Generate, DefaultHasAllPartsAndIsClosed) {
  const auto a = generate_aircraft(AircraftParams{});
  ASSERT_TRUE(a.mesh.labeled());
  EXPECT_NO_THROW(a.mesh.validate());
  for (auto l : kAllParts) EXPECT_GT(count_label(a.mesh, l), 0u) << to_string(l);
  EXPECT_TRUE(is_closed_surface(a.mesh));
  std::set<int> ids;
  for (const auto& g : a.surfaces) {
    EXPECT_TRUE(g.true_label.has_value());
    EXPECT_TRUE(ids.insert(g.surface_id).second);
    EXPECT_NO_THROW(g.validate());
  }
  EXPECT_EQ(*ids.begin(), 1);
}

TEST(Generate, DensityRaisesFaceCount) {
  AircraftParams p;
  std::size_t previous = 0;
  std::set<PartLabel> labels0;
  for (int d = 0; d <= 4; ++d) {
    p.density = d;
    const auto a = generate_aircraft(p);
    EXPECT_GT(a.mesh.face_count(), previous);
    previous = a.mesh.face_count();
    std::set<PartLabel> labels(a.mesh.face_labels->begin(), a.mesh.face_labels->end());
    if (d == 0) labels0 = labels;
    EXPECT_EQ(labels, labels0);
  }
}

TEST(Generate, NoEnginesMeansNoEngineFaces) {
  AircraftParams p;
  p.engine_count = 0;
  const auto a = generate_aircraft(p);
  EXPECT_EQ(count_label(a.mesh, PartLabel::engine), 0u);
  for (const auto& g : a.surfaces) EXPECT_NE(*g.true_label, PartLabel::engine);
}

TEST(Generate, RejectsBadParams) {
  AircraftParams p;
  p.fuselage_length = -1.0;
  EXPECT_THROW(generate_aircraft(p), ValidationError);
  p = {};
  p.density = 5;
  EXPECT_THROW(generate_aircraft(p), ValidationError);
  p = {};
  p.engine_count = 3;
  EXPECT_THROW(generate_aircraft(p), ValidationError);
}

TEST(Generate, EveryArchetypeAtEveryDensityIsClosedAndConsistent) {
  for (auto base : base_archetypes())
    for (int d : {0, 2}) {
      base.density = d;
      const auto a = generate_aircraft(base);
      EXPECT_TRUE(is_closed_surface(a.mesh));
      EXPECT_GE(grid_consistency(a), 0.95);
    }
}

TEST(Variations, CountValidityAndDeterminism) {
  Rng rng(1);
  const auto base = base_archetypes()[0];
  EXPECT_TRUE(sample_variations(base, 0, rng).empty());
  Rng a(7), b(7);
  const auto va = sample_variations(base, 20, a);
  const auto vb = sample_variations(base, 20, b);
  ASSERT_EQ(va.size(), 20u);
  for (std::size_t i = 0; i < va.size(); ++i) {
    EXPECT_NO_THROW(va[i].validate());
    EXPECT_EQ(nlohmann::json(va[i]), nlohmann::json(vb[i]));
    EXPECT_EQ(va[i].engine_count, base.engine_count);
    EXPECT_NEAR(va[i].wing_span / base.wing_span, 1.0, 0.15 + 1e-12);
  }
}

TEST(Plan, NamesAndSplitAreDisjoint) {
  const auto train = plan_dataset(8, 5, 2, 7, 0);
  const auto val = plan_dataset(2, 5, 2, 7, 8);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(val.size(), 20u);
  std::set<std::size_t> train_bases, val_bases;
  for (const auto& s : train) train_bases.insert(s.base);
  for (const auto& s : val) val_bases.insert(s.base);
  for (auto b : val_bases) EXPECT_EQ(train_bases.count(b), 0u);
  EXPECT_EQ(train[0].name, "b00_v00_d0");
  EXPECT_EQ(nlohmann::json(plan_dataset(8, 5, 2, 7, 0)[13].params), nlohmann::json(train[13].params));
}

TEST(Write, FilesLoadBack) {
  const auto dir = std::filesystem::temp_directory_path() / "aeroseg_test_dataset";
  std::filesystem::remove_all(dir);
  const auto plan = plan_dataset(1, 2, 1, 3);
  write_dataset(dir, plan);
  const auto entries = load_dataset_dir(dir);
  ASSERT_EQ(entries.size(), 2u);
  const auto direct = generate_aircraft(plan[1].params);
  EXPECT_EQ(entries[1].mesh.faces, direct.mesh.faces);
  EXPECT_EQ(*entries[1].mesh.face_labels, *direct.mesh.face_labels);
  EXPECT_EQ(entries[1].surfaces.size(), direct.surfaces.size());
}

TEST(Params, JsonRoundTrip) {
  const auto p = base_archetypes()[3];
  EXPECT_EQ(nlohmann::json(nlohmann::json(p).get<AircraftParams>()), nlohmann::json(p));
}
