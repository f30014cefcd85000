#pragma once

// Run configuration: one JSON file whose keys may be nested objects or dotted
// paths ("aug.xi1": 0.5 and {"aug": {"xi1": 0.5}} are the same setting).
// Unknown keys are rejected. Every field has a default, so an empty file is valid.

#include "aeroseg/checkpoint.hpp"
#include "aeroseg/model.hpp"
#include "aeroseg/projection.hpp"
#include "aeroseg/train.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace aeroseg {

struct RunConfig {
  std::uint64_t seed = 0;
  nn::TrainConfig train;  // epochs, lr.*, adam.*, gamma, aug.*
  nn::ModelConfig model;
  double alpha = 0.05;
  double calibration_fraction = 0.2;  // share of validation faces used to calibrate
  RefinementPriority priority;
  nlohmann::json rule_overrides = nlohmann::json::object();
  nn::CheckpointFormat checkpoint_format = nn::CheckpointFormat::binary;
  std::string train_dir;
  std::string val_dir;
  std::string out_dir;

  void validate() const;
};

/// Flattens nested objects into dotted keys. Arrays and the `rules` object stay whole.
nlohmann::json flatten_config(const nlohmann::json& j);

/// Applies `j` on top of `base`. Throws ValidationError on unknown keys or bad values.
RunConfig apply_config(RunConfig base, const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key with its current value, dotted.
nlohmann::json describe_config(const RunConfig& c);

}  // namespace aeroseg
