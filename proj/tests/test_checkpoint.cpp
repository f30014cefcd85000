#include "aeroseg/checkpoint.hpp"
#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

using namespace aeroseg;
using namespace aeroseg::nn;

namespace {

ModelConfig tiny() {
  ModelConfig c;
  c.priming_widths = {4};
  c.gat_layers = 1;
  c.gat_heads = 2;
  c.gat_head_width = 3;
  c.post_widths = {5};
  c.classifier_hidden = 4;
  c.tnet_hidden = 2;
  return c;
}

void expect_same_parameters(SegmentationModel& a, SegmentationModel& b) {
  const auto pa = a.parameters(), pb = b.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(pa[i]->name, pb[i]->name);
    ASSERT_EQ(pa[i]->value.size(), pb[i]->value.size());
    EXPECT_EQ(std::memcmp(pa[i]->value.data(), pb[i]->value.data(),
                          sizeof(double) * static_cast<std::size_t>(pa[i]->value.size())),
              0);
  }
}

}  // namespace

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ull);
}

class CheckpointRoundTrip : public ::testing::TestWithParam<CheckpointFormat> {};

TEST_P(CheckpointRoundTrip, BitExact) {
  SegmentationModel m(tiny(), 17);
  // Awkward values: denormals, negative zero, long mantissas.
  m.parameters()[0]->value(0, 0) = 4.9e-324;
  m.parameters()[0]->value(0, 1) = -0.0;
  m.parameters()[0]->value(0, 2) = 1.0 / 3.0;
  const nlohmann::json meta{{"epoch", 7}, {"note", "x"}};
  const auto bytes = serialize_checkpoint(m, GetParam(), meta);
  auto loaded = deserialize_checkpoint(bytes);
  EXPECT_EQ(loaded.format, GetParam());
  EXPECT_EQ(loaded.metadata, meta);
  EXPECT_EQ(nlohmann::json(loaded.model.config()), nlohmann::json(m.config()));
  expect_same_parameters(m, loaded.model);
  EXPECT_EQ(serialize_checkpoint(loaded.model, GetParam(), meta), bytes);
}

TEST_P(CheckpointRoundTrip, TruncationIsAParseError) {
  SegmentationModel m(tiny(), 1);
  const auto bytes = serialize_checkpoint(m, GetParam());
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), ParseError);
}

INSTANTIATE_TEST_SUITE_P(Formats, CheckpointRoundTrip,
                         ::testing::Values(CheckpointFormat::binary, CheckpointFormat::text));

TEST(Checkpoint, GarbageIsRejected) {
  EXPECT_THROW(deserialize_checkpoint("not a checkpoint"), ParseError);
  EXPECT_THROW(deserialize_checkpoint(""), ParseError);
}

TEST(Checkpoint, ConfigHashMismatchIsValidationError) {
  SegmentationModel m(tiny(), 1);
  auto bytes = serialize_checkpoint(m, CheckpointFormat::binary);
  // The config hash sits right after the 8-byte magic and the 4-byte version.
  bytes[12] = static_cast<char>(bytes[12] ^ 0x5a);
  EXPECT_THROW(deserialize_checkpoint(bytes), ValidationError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "aeroseg_test_checkpoint";
  std::filesystem::create_directories(dir);
  SegmentationModel m(tiny(), 5);
  save_checkpoint(m, dir / "m.ckpt", CheckpointFormat::text);
  auto loaded = load_checkpoint(dir / "m.ckpt");
  expect_same_parameters(m, loaded.model);
  EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), IoError);
}

TEST(Checkpoint, FormatNames) {
  EXPECT_EQ(parse_checkpoint_format("binary"), CheckpointFormat::binary);
  EXPECT_EQ(parse_checkpoint_format("text"), CheckpointFormat::text);
  EXPECT_THROW(parse_checkpoint_format("hdf5"), ValidationError);
}
