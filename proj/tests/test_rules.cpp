#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"
#include "aeroseg/rules.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace aeroseg;

namespace {

SurfaceClassification surface(int id, PartLabel label) {
  SurfaceClassification c;
  c.surface_id = id;
  c.label = label;
  c.face_count = 1;
  c.votes[index_of(label)] = 1;
  return c;
}

const std::vector<SurfaceClassification> kThree{surface(1, PartLabel::wing),
                                                surface(2, PartLabel::stabilizer),
                                                surface(3, PartLabel::fuselage)};

}  // namespace

TEST(DefaultRules, ExpertValues) {
  const auto r = default_rules();
  EXPECT_EQ(r.at(PartLabel::wing).surface_mesh_dimension, 0.05);
  EXPECT_EQ(r.at(PartLabel::stabilizer).surface_mesh_dimension, 0.2);
  EXPECT_EQ(r.at(PartLabel::fuselage).surface_mesh_dimension, 1.0);
  for (auto l : {PartLabel::wing, PartLabel::stabilizer, PartLabel::fuselage}) {
    const auto& s = r.at(l);
    EXPECT_EQ(s.initial_wall_spacing, 4.7e-6);
    EXPECT_EQ(s.growth_rate, 1.1);
    EXPECT_EQ(s.collision_buffer, 2.0);
    EXPECT_EQ(s.surface_cell_type, "quad-dominant");
    EXPECT_EQ(s.volume_cell_type, "hex-dominant");
    EXPECT_TRUE(s.expert_rule);
  }
  EXPECT_FALSE(r.at(PartLabel::engine).expert_rule);
  EXPECT_EQ(r.at(PartLabel::engine).surface_mesh_dimension, 0.2);
  EXPECT_EQ(r.flow.mach, 0.65);
  EXPECT_EQ(r.flow.reference_length_m, 30.0);
}

TEST(DefaultRules, RefinementOrder) {
  const auto r = default_rules();
  EXPECT_LT(r.at(PartLabel::wing).surface_mesh_dimension,
            r.at(PartLabel::stabilizer).surface_mesh_dimension);
  EXPECT_LT(r.at(PartLabel::stabilizer).surface_mesh_dimension,
            r.at(PartLabel::fuselage).surface_mesh_dimension);
}

TEST(FormatSetting, CompactForms) {
  EXPECT_EQ(format_setting(0.05), "0.05");
  EXPECT_EQ(format_setting(4.7e-6), "4.7e-6");
  EXPECT_EQ(format_setting(1.1), "1.1");
  EXPECT_EQ(format_setting(2.0), "2.0");
  EXPECT_EQ(format_setting(30.0), "30.0");
  EXPECT_EQ(format_setting(1e21), "1e21");
}

TEST(Emit, MatchesGoldenFile) {
  const auto golden = read_file(std::filesystem::path(AEROSEG_GOLDEN_DIR) / "settings_three_surfaces.txt");
  EXPECT_EQ(emit_settings(kThree, default_rules()), golden);
}

TEST(Emit, ByteStable) {
  const auto dir = std::filesystem::temp_directory_path() / "aeroseg_test_rules";
  std::filesystem::create_directories(dir);
  save_settings(kThree, default_rules(), dir / "a.txt");
  save_settings(kThree, default_rules(), dir / "b.txt");
  EXPECT_EQ(read_file(dir / "a.txt"), read_file(dir / "b.txt"));
}

TEST(Emit, EmptyListIsHeaderOnly) {
  const auto doc = emit_settings({}, default_rules());
  const auto table_end = doc.find("# machine-readable");
  ASSERT_NE(table_end, std::string::npos);
  for (std::size_t pos = 0; pos < table_end;) {
    EXPECT_EQ(doc[pos], '#');
    pos = doc.find('\n', pos) + 1;
  }
  EXPECT_NE(doc.find("\"surfaces\": []"), std::string::npos);
}

TEST(Emit, EngineMarkedAsBorrowed) {
  const std::vector<SurfaceClassification> one{surface(5, PartLabel::engine)};
  const auto doc = emit_settings(one, default_rules());
  EXPECT_NE(doc.find("5 | engine | 0.2 |"), std::string::npos);
  EXPECT_NE(doc.find("not an expert rule"), std::string::npos);
}

TEST(Emit, MissingRuleThrows) {
  auto rules = default_rules();
  rules.settings.erase(PartLabel::engine);
  const std::vector<SurfaceClassification> one{surface(5, PartLabel::engine)};
  EXPECT_THROW(emit_settings(one, rules), ValidationError);
}

TEST(Overrides, ApplyAndValidate) {
  auto rules = default_rules();
  apply_rule_overrides(rules, {{"wing", {{"surface_mesh_dimension", 0.04}}}});
  EXPECT_EQ(rules.at(PartLabel::wing).surface_mesh_dimension, 0.04);
  EXPECT_FALSE(rules.at(PartLabel::wing).expert_rule);
  auto bad = default_rules();
  EXPECT_THROW(apply_rule_overrides(bad, {{"wing", {{"growth_rate", 0.9}}}}), ValidationError);
  EXPECT_THROW(apply_rule_overrides(bad, {{"wing", {{"colour", "red"}}}}), ValidationError);
  EXPECT_THROW(apply_rule_overrides(bad, {{"rudder", {{"growth_rate", 1.2}}}}), ValidationError);
}

TEST(MeshSettings, ValidateRejectsNonPositive) {
  MeshSettings s = default_rules().at(PartLabel::wing);
  s.collision_buffer = 0.0;
  EXPECT_THROW(s.validate(), ValidationError);
}
