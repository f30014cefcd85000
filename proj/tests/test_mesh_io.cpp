#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <random>

using namespace aeroseg;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "aeroseg_test_mesh_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(FormatDouble, ShortestRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 2000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 30) - 15);
    EXPECT_TRUE(same_bits(std::stod(format_double(x)), x)) << format_double(x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(MeshText, SaveLoadIsBitExact) {
  auto m = fixtures::octa();
  m.vertices[0] = Vec3(0.1 + 0.2, 1.0 / 3.0, -2.5e-300);
  const auto mesh_path = scratch("octa.mesh");
  const auto label_path = scratch("octa.labels.csv");
  save_mesh(m, mesh_path);
  save_labels(*m.face_labels, label_path);
  const auto back = load_mesh(mesh_path, label_path);
  ASSERT_EQ(back.vertices.size(), m.vertices.size());
  for (std::size_t i = 0; i < m.vertices.size(); ++i)
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(same_bits(back.vertices[i][k], m.vertices[i][k]));
  EXPECT_EQ(back.faces, m.faces);
  EXPECT_EQ(*back.face_labels, *m.face_labels);
}

TEST(MeshText, CommentsAndBlankLinesAreIgnored) {
  const auto m = parse_mesh("# header\nv 0 0 0\n\nv 1 0 0  # trailing\nv 0 1 0\nf 0 1 2\n");
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.face_count(), 1u);
  EXPECT_FALSE(m.labeled());
}

TEST(MeshText, ErrorsCarryLineNumbers) {
  try {
    parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 zero\nf 0 1 2\n", "bad.mesh");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("bad.mesh"), std::string::npos);
  }
  EXPECT_THROW(parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 7\n"), Error);
  EXPECT_THROW(parse_mesh("q 1 2 3\n"), ParseError);
}

TEST(Labels, HeaderOptionalAndCountChecked) {
  const auto a = parse_labels("face_index,label_id\n0,1\n1,3\n", 2);
  const auto b = parse_labels("0,1\n1,3\n", 2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[1], PartLabel::engine);
  EXPECT_THROW(parse_labels("0,1\n", 2), Error);
  EXPECT_THROW(parse_labels("0,1\n1,9\n", 2), Error);
}

TEST(Surfaces, RoundTripWithAndWithoutTruth) {
  SurfaceGrid a;
  a.surface_id = 4;
  a.rows = 2;
  a.cols = 3;
  for (int i = 0; i < 6; ++i) a.points.push_back(Vec3(i, 0.1 * i, -i / 7.0));
  a.true_label = PartLabel::stabilizer;
  SurfaceGrid b = a;
  b.surface_id = 9;
  b.true_label.reset();
  const auto path = scratch("grids.surfaces");
  save_surfaces({a, b}, path);
  const auto back = load_surfaces(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].surface_id, 4);
  EXPECT_EQ(back[0].true_label, PartLabel::stabilizer);
  EXPECT_FALSE(back[1].true_label.has_value());
  for (std::size_t i = 0; i < 6; ++i)
    for (int k = 0; k < 3; ++k) EXPECT_TRUE(same_bits(back[0].points[i][k], a.points[i][k]));
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(read_file(scratch("does_not_exist.mesh")), IoError);
}
