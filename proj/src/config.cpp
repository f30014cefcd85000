#include "aeroseg/config.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

namespace aeroseg {

namespace {

void flatten_into(const nlohmann::json& j, const std::string& prefix, nlohmann::json& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object() && path != "rules" && path != "model")
      flatten_into(value, path, out);
    else
      out[path] = value;
  }
}

template <class T>
T get(const nlohmann::json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (train.epochs < 1) throw ValidationError("epochs must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0))
    throw ValidationError("calibration_fraction must lie in (0, 1)");
  if (!(train.gamma >= 0.0)) throw ValidationError("gamma must be non-negative");
  const auto& lr = train.learning_rate;
  if (!(lr.base > 0.0) || lr.decays < 0 || !(lr.factor > 0.0 && lr.factor <= 1.0))
    throw ValidationError("learning-rate schedule needs base > 0, decays >= 0, factor in (0, 1]");
  auto aug = train.augmentation;
  aug.epoch = 0;
  aug.tau = train.epochs;
  aug.validate();
  model.validate();
}

nlohmann::json flatten_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  nlohmann::json out = nlohmann::json::object();
  flatten_into(j, "", out);
  return out;
}

RunConfig apply_config(RunConfig c, const nlohmann::json& j) {
  const auto flat = flatten_config(j);
  for (const auto& [key, v] : flat.items()) {
    auto& t = c.train;
    auto& aug = t.augmentation;
    if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "epochs") t.epochs = get<int>(v, key);
    else if (key == "lr.base") t.learning_rate.base = get<double>(v, key);
    else if (key == "lr.decays") t.learning_rate.decays = get<int>(v, key);
    else if (key == "lr.factor") t.learning_rate.factor = get<double>(v, key);
    else if (key == "adam.beta1") t.adam.beta1 = get<double>(v, key);
    else if (key == "adam.beta2") t.adam.beta2 = get<double>(v, key);
    else if (key == "adam.eps") t.adam.eps = get<double>(v, key);
    else if (key == "gamma") t.gamma = get<double>(v, key);
    else if (key == "aug.enabled") t.augment = get<bool>(v, key);
    else if (key == "aug.symmetric_noise") aug.symmetric_noise = get<bool>(v, key);
    else if (key == "aug.xi1") aug.xi1_target = get<double>(v, key);
    else if (key == "aug.xi2") aug.xi2_target = get<double>(v, key);
    else if (key == "aug.xi3") aug.xi3_target = get<double>(v, key);
    else if (key == "aug.xi4") aug.xi4_target = get<double>(v, key);
    else if (key == "aug.xi5") aug.xi5_target = get<double>(v, key);
    else if (key == "alpha") c.alpha = get<double>(v, key);
    else if (key == "calibration_fraction") c.calibration_fraction = get<double>(v, key);
    else if (key == "priority") {
      std::vector<PartLabel> order;
      for (const auto& name : get<std::vector<std::string>>(v, key))
        order.push_back(parse_part_label(name));
      c.priority = RefinementPriority(std::move(order));
    } else if (key == "rules") {
      c.rule_overrides = v;
    } else if (key == "model") {
      try {
        nlohmann::json merged = c.model;
        merged.merge_patch(v);
        c.model = merged.get<nn::ModelConfig>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config key 'model': ") + e.what());
      }
    } else if (key == "checkpoint_format") {
      c.checkpoint_format = nn::parse_checkpoint_format(get<std::string>(v, key));
    } else if (key == "paths.train") c.train_dir = get<std::string>(v, key);
    else if (key == "paths.val") c.val_dir = get<std::string>(v, key);
    else if (key == "paths.out") c.out_dir = get<std::string>(v, key);
    else throw ValidationError("unknown config key '" + key + "'");
  }
  c.train.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return apply_config(RunConfig{}, j);
}

nlohmann::json describe_config(const RunConfig& c) {
  const auto& t = c.train;
  const auto& aug = t.augmentation;
  nlohmann::json priority = nlohmann::json::array();
  for (auto l : c.priority.order()) priority.push_back(to_string(l));
  return nlohmann::json{{"seed", c.seed},
                        {"epochs", t.epochs},
                        {"lr.base", t.learning_rate.base},
                        {"lr.decays", t.learning_rate.decays},
                        {"lr.factor", t.learning_rate.factor},
                        {"adam.beta1", t.adam.beta1},
                        {"adam.beta2", t.adam.beta2},
                        {"adam.eps", t.adam.eps},
                        {"gamma", t.gamma},
                        {"aug.enabled", t.augment},
                        {"aug.symmetric_noise", aug.symmetric_noise},
                        {"aug.xi1", aug.xi1_target},
                        {"aug.xi2", aug.xi2_target},
                        {"aug.xi3", aug.xi3_target},
                        {"aug.xi4", aug.xi4_target},
                        {"aug.xi5", aug.xi5_target},
                        {"alpha", c.alpha},
                        {"calibration_fraction", c.calibration_fraction},
                        {"priority", priority},
                        {"rules", c.rule_overrides},
                        {"model", c.model},
                        {"checkpoint_format",
                         c.checkpoint_format == nn::CheckpointFormat::binary ? "binary" : "text"},
                        {"paths.train", c.train_dir},
                        {"paths.val", c.val_dir},
                        {"paths.out", c.out_dir}};
}

}  // namespace aeroseg
