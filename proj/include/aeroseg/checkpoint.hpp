#pragma once

// Checkpoint files carry the model configuration, a hash of it, free-form
// metadata and every parameter tensor in SegmentationModel::parameters() order.
//
// binary  "AEROSEGC" | u32 version | u64 config hash | u32 len + header JSON |
//         u32 count | per tensor: u32 len + name, u64 rows, u64 cols, rows*cols f64
//         (all little-endian)
// text    line-oriented, values as hexadecimal floats, so both formats round-trip
//         every parameter bit-exactly.

#include "aeroseg/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace aeroseg::nn {

enum class CheckpointFormat { binary, text };

CheckpointFormat parse_checkpoint_format(std::string_view name);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const ModelConfig& config);

std::string serialize_checkpoint(SegmentationModel& model, CheckpointFormat format,
                                 const nlohmann::json& metadata = nlohmann::json::object());
void save_checkpoint(SegmentationModel& model, const std::filesystem::path& path,
                     CheckpointFormat format,
                     const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedCheckpoint {
  SegmentationModel model;
  nlohmann::json metadata;
  CheckpointFormat format;
};

/// Detects the format from the leading bytes. Throws ParseError on corrupt input,
/// ValidationError on a config-hash or tensor-shape mismatch.
LoadedCheckpoint deserialize_checkpoint(const std::string& bytes,
                                        const std::string& source = "<checkpoint>");
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace aeroseg::nn
