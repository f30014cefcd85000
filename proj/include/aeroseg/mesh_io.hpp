#pragma once

// Text formats:
//
//   mesh      `v x y z` per vertex, `f i j k` per triangle (0-based). `#` starts a comment.
//   labels    CSV `face_index,label_id`, optional header row, one row per face.
//   surfaces  `surface <id> <rows> <cols> [true_label <name|id>]` followed by rows*cols
//             `p x y z` lines (row-major). `#` starts a comment.
//
// Writers emit shortest round-trip decimal, so save -> load reproduces every double exactly.

#include "aeroseg/geometry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace aeroseg {

LabeledMesh load_mesh(const std::filesystem::path& path,
                      const std::optional<std::filesystem::path>& labels_path = std::nullopt);
LabeledMesh parse_mesh(const std::string& text, const std::string& source = "<mesh>");
std::string format_mesh(const LabeledMesh& mesh);
void save_mesh(const LabeledMesh& mesh, const std::filesystem::path& path);

std::vector<PartLabel> parse_labels(const std::string& text, std::size_t face_count,
                                    const std::string& source = "<labels>");
std::vector<PartLabel> load_labels(const std::filesystem::path& path, std::size_t face_count);
std::string format_labels(const std::vector<PartLabel>& labels);
void save_labels(const std::vector<PartLabel>& labels, const std::filesystem::path& path);

std::vector<SurfaceGrid> parse_surfaces(const std::string& text,
                                        const std::string& source = "<surfaces>");
std::vector<SurfaceGrid> load_surfaces(const std::filesystem::path& path);
std::string format_surfaces(const std::vector<SurfaceGrid>& grids);
void save_surfaces(const std::vector<SurfaceGrid>& grids, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace aeroseg
