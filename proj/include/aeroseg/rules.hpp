#pragma once

// Expert meshing rules per aircraft part and the per-surface settings document.

#include "aeroseg/geometry.hpp"
#include "aeroseg/projection.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <span>
#include <string>

namespace aeroseg {

struct MeshSettings {
  double surface_mesh_dimension = 0.0;
  std::string surface_cell_type = "quad-dominant";
  std::string volume_cell_type = "hex-dominant";
  double initial_wall_spacing = 0.0;
  double growth_rate = 0.0;
  double collision_buffer = 0.0;
  std::string yplus_advisory;
  /// False for settings that were filled in without an expert rule behind them.
  bool expert_rule = true;

  /// Numeric fields > 0, growth_rate > 1.
  void validate() const;
};

struct FlowCondition {
  double mach = 0.65;
  double angle_of_attack_deg = 0.0;
  std::string altitude = "sea level";
  double reference_length_m = 30.0;
};

struct RuleDatabase {
  FlowCondition flow;
  std::map<PartLabel, MeshSettings> settings;

  /// Throws ValidationError when `label` has no entry.
  const MeshSettings& at(PartLabel label) const;
  void validate() const;
};

inline constexpr std::string_view kYplusAdvisory =
    "grow volume cells from surface cells; if Y+ > 1, decrease initial wall spacing proportionally";

/// Wing, stabilizer and fuselage carry the expert values. Engine reuses the
/// stabilizer settings with expert_rule = false.
RuleDatabase default_rules();

/// Shortest decimal that keeps a trailing ".0" on integers and a compact exponent:
/// 0.05, 4.7e-6, 1.1, 2.0.
std::string format_setting(double value);

/// Header, one `surface_id | label | ...` record per classification, then a JSON
/// section. Identical inputs give identical bytes. Throws ValidationError when a
/// classification label has no rule.
std::string emit_settings(std::span<const SurfaceClassification> classifications,
                          const RuleDatabase& rules);
void save_settings(std::span<const SurfaceClassification> classifications,
                   const RuleDatabase& rules, const std::filesystem::path& path);

/// Overrides of the form {"wing": {"surface_mesh_dimension": 0.04, ...}, ...}.
void apply_rule_overrides(RuleDatabase& rules, const nlohmann::json& overrides);

}  // namespace aeroseg
