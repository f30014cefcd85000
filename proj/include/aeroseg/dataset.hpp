#pragma once

// Procedural aircraft-like meshes with per-face part labels and matching CAD
// surface grids. Every part is its own closed triangle shell; parts are not merged.
// Lengths are in metres, the fuselage runs along +X, the span along Y, up is +Z.

#include "aeroseg/augment.hpp"
#include "aeroseg/geometry.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace aeroseg {

struct AircraftParams {
  double fuselage_length = 30.0;
  double fuselage_radius = 1.8;
  double wing_span = 28.0;  // tip to tip
  double wing_root_chord = 5.0;
  double wing_tip_chord = 1.6;
  double wing_sweep_deg = 25.0;  // leading edge
  double wing_thickness = 0.12;  // fraction of chord
  double wing_position = 0.42;   // leading-edge root station / fuselage length
  double htail_span = 10.0;
  double htail_chord = 2.6;
  double vtail_span = 5.0;
  double vtail_chord = 3.4;
  int engine_count = 2;  // 0, 2 or 4; engines hang below the wings in pairs
  double engine_radius = 0.9;
  double engine_length = 3.6;
  double engine_station = 0.35;  // fraction of the half-span, inner pair
  int density = 0;               // 0..4

  /// Throws ValidationError on non-positive lengths, bad counts or parts that
  /// would intersect each other.
  void validate() const;
};

void to_json(nlohmann::json& j, const AircraftParams& p);
void from_json(const nlohmann::json& j, AircraftParams& p);

struct GeneratedAircraft {
  LabeledMesh mesh;  // labeled, closed per part
  std::vector<SurfaceGrid> surfaces;  // ids 1.., true_label set
};

/// Deterministic in `params`. Throws ValidationError on invalid params.
GeneratedAircraft generate_aircraft(const AircraftParams& params);

/// The ten base archetypes, density 0.
std::vector<AircraftParams> base_archetypes();

/// `k` draws; every continuous parameter scaled by U(1 - spread, 1 + spread),
/// resampled until valid. Counts and density are kept.
std::vector<AircraftParams> sample_variations(const AircraftParams& base, std::size_t k, Rng& rng,
                                              double spread = 0.15);

struct DatasetSample {
  std::string name;
  std::size_t base = 0;
  std::size_t variation = 0;
  int density = 0;
  AircraftParams params;
};

/// bases x variations x densities samples, base indices taken modulo the ten
/// archetypes, starting at `first_base`.
std::vector<DatasetSample> plan_dataset(std::size_t bases, std::size_t variations,
                                        std::size_t densities, std::uint64_t seed,
                                        std::size_t first_base = 0);

/// Writes <name>.mesh, <name>.labels.csv, <name>.surfaces per sample and manifest.json.
void write_dataset(const std::filesystem::path& dir, const std::vector<DatasetSample>& plan,
                   const nlohmann::json& manifest_extra = nlohmann::json::object());

}  // namespace aeroseg
