#include "aeroseg/rules.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <charconv>
#include <cmath>

namespace aeroseg {

void MeshSettings::validate() const {
  auto positive = [](double v, const char* what) {
    if (!(std::isfinite(v) && v > 0.0))
      throw ValidationError(std::string(what) + " must be positive");
  };
  positive(surface_mesh_dimension, "surface mesh dimension");
  positive(initial_wall_spacing, "initial wall spacing");
  positive(collision_buffer, "collision buffer");
  if (!(std::isfinite(growth_rate) && growth_rate > 1.0))
    throw ValidationError("growth rate must exceed 1");
}

const MeshSettings& RuleDatabase::at(PartLabel label) const {
  const auto it = settings.find(label);
  if (it == settings.end())
    throw ValidationError("no mesh rule for label '" + std::string(to_string(label)) + "'");
  return it->second;
}

void RuleDatabase::validate() const {
  for (const auto& [label, s] : settings) {
    try {
      s.validate();
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(to_string(label)) + " rule: " + e.what());
    }
  }
}

RuleDatabase default_rules() {
  auto expert = [](double dimension) {
    MeshSettings s;
    s.surface_mesh_dimension = dimension;
    s.initial_wall_spacing = 4.7e-6;
    s.growth_rate = 1.1;
    s.collision_buffer = 2.0;
    s.yplus_advisory = std::string(kYplusAdvisory);
    return s;
  };
  RuleDatabase db;
  db.settings[PartLabel::wing] = expert(0.05);
  db.settings[PartLabel::stabilizer] = expert(0.2);
  db.settings[PartLabel::fuselage] = expert(1.0);
  MeshSettings engine = expert(0.2);
  engine.expert_rule = false;
  db.settings[PartLabel::engine] = engine;
  return db;
}

std::string format_setting(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  const auto e = s.find('e');
  if (e == std::string::npos) {
    if (s.find('.') == std::string::npos && s.find_first_of("ni") == std::string::npos) s += ".0";
    return s;
  }
  // to_chars pads the exponent to two digits ("e-06").
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  std::string sign;
  if (exponent[0] == '-' || exponent[0] == '+') {
    if (exponent[0] == '-') sign = "-";
    exponent.erase(0, 1);
  }
  while (exponent.size() > 1 && exponent[0] == '0') exponent.erase(0, 1);
  return mantissa + "e" + sign + exponent;
}

namespace {

nlohmann::ordered_json settings_json(const MeshSettings& s) {
  return nlohmann::ordered_json{{"surface_mesh_dimension", format_setting(s.surface_mesh_dimension)},
                                {"surface_cell_type", s.surface_cell_type},
                                {"volume_cell_type", s.volume_cell_type},
                                {"initial_wall_spacing", format_setting(s.initial_wall_spacing)},
                                {"growth_rate", format_setting(s.growth_rate)},
                                {"collision_buffer", format_setting(s.collision_buffer)},
                                {"yplus_advisory", s.yplus_advisory},
                                {"expert_rule", s.expert_rule}};
}

}  // namespace

std::string emit_settings(std::span<const SurfaceClassification> classifications,
                          const RuleDatabase& rules) {
  // Resolve everything first so a missing rule leaves no partial document.
  std::vector<const MeshSettings*> resolved;
  resolved.reserve(classifications.size());
  for (const auto& c : classifications) resolved.push_back(&rules.at(c.label));

  const auto& flow = rules.flow;
  std::string out;
  out += "# aeroseg mesh settings\n";
  out += "# flow: Mach " + format_setting(flow.mach) + ", AoA " +
         format_setting(flow.angle_of_attack_deg) + " deg, " + flow.altitude + "\n";
  out += "# reference length: aircraft resized to " + format_setting(flow.reference_length_m) +
         " m before meshing\n";
  out += "# units: lengths as given by the rule database; units not specified by the rules\n";
  out += "# surface_id | label | dimension | wall_spacing | growth | buffer | cell_types | advisories\n";

  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < classifications.size(); ++i) {
    const auto& c = classifications[i];
    const auto& s = *resolved[i];
    std::string advisories = "Y+: " + s.yplus_advisory;
    if (!s.expert_rule) advisories += "; not an expert rule, settings borrowed for this part";
    out += std::to_string(c.surface_id) + " | " + std::string(to_string(c.label)) + " | " +
           format_setting(s.surface_mesh_dimension) + " | " +
           format_setting(s.initial_wall_spacing) + " | " + format_setting(s.growth_rate) + " | " +
           format_setting(s.collision_buffer) + " | " + s.surface_cell_type + "/" +
           s.volume_cell_type + " | " + advisories + "\n";
    auto rec = settings_json(s);
    rec["surface_id"] = c.surface_id;
    rec["label"] = to_string(c.label);
    rec["decision"] = to_string(c.mode);
    records.push_back(std::move(rec));
  }

  nlohmann::ordered_json machine{
      {"flow",
       {{"mach", format_setting(flow.mach)},
        {"angle_of_attack_deg", format_setting(flow.angle_of_attack_deg)},
        {"altitude", flow.altitude},
        {"reference_length_m", format_setting(flow.reference_length_m)}}},
      {"units", "unspecified"},
      {"surfaces", records}};
  out += "# machine-readable\n";
  out += machine.dump(2) + "\n";
  return out;
}

void save_settings(std::span<const SurfaceClassification> classifications,
                   const RuleDatabase& rules, const std::filesystem::path& path) {
  write_file_atomic(path, emit_settings(classifications, rules));
}

void apply_rule_overrides(RuleDatabase& rules, const nlohmann::json& overrides) {
  if (overrides.is_null()) return;
  if (!overrides.is_object()) throw ValidationError("rule overrides must be an object");
  for (const auto& [name, fields] : overrides.items()) {
    const auto label = parse_part_label(name);
    auto& s = rules.settings[label];
    if (!fields.is_object()) throw ValidationError("rule override for " + name + " must be an object");
    try {
      for (const auto& [key, value] : fields.items()) {
        if (key == "surface_mesh_dimension")
          s.surface_mesh_dimension = value.get<double>();
        else if (key == "initial_wall_spacing")
          s.initial_wall_spacing = value.get<double>();
        else if (key == "growth_rate")
          s.growth_rate = value.get<double>();
        else if (key == "collision_buffer")
          s.collision_buffer = value.get<double>();
        else if (key == "surface_cell_type")
          s.surface_cell_type = value.get<std::string>();
        else if (key == "volume_cell_type")
          s.volume_cell_type = value.get<std::string>();
        else if (key == "yplus_advisory")
          s.yplus_advisory = value.get<std::string>();
        else
          throw ValidationError("unknown rule field '" + key + "' for " + name);
      }
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("rule override for " + name + ": " + e.what());
    }
    s.expert_rule = false;
  }
  rules.validate();
}

}  // namespace aeroseg
