#pragma once

// Adaptive Prediction Sets (non-randomized).
//
// The conformity score of (probs, y) is the probability mass of every class ranked
// at or above y when classes are sorted by descending probability, ties broken by
// ascending class id. Calibration takes the ceil((n+1)(1-alpha))-th smallest score;
// prediction sets grow down the same ranking until their mass reaches that threshold.
// With exchangeable calibration and test data the set holds the true label with
// probability >= 1 - alpha.

#include "aeroseg/geometry.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <span>
#include <vector>

namespace aeroseg {

using ClassProbs = std::array<double, kNumParts>;

struct CalibrationRecord {
  ClassProbs probs{};
  PartLabel label = PartLabel::fuselage;
};

/// Bitmask over part labels; never empty when produced by predict_set.
class LabelSet {
 public:
  LabelSet() = default;
  static LabelSet all();

  void insert(PartLabel l) { bits_ |= static_cast<std::uint8_t>(1u << index_of(l)); }
  bool contains(PartLabel l) const { return bits_ & (1u << index_of(l)); }
  std::size_t size() const;
  bool empty() const { return bits_ == 0; }
  std::vector<PartLabel> labels() const;
  bool is_subset_of(const LabelSet& other) const { return (bits_ & ~other.bits_) == 0; }
  std::uint8_t bits() const { return bits_; }
  bool operator==(const LabelSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

struct PredictionSet {
  std::size_t face = 0;
  LabelSet labels;
};

/// Class ids sorted by descending probability, ties by ascending id.
std::array<std::size_t, kNumParts> ranking(const ClassProbs& probs);

double aps_score(const ClassProbs& probs, PartLabel label);

class ConformalCalibrator {
 public:
  static constexpr double kDefaultAlpha = 0.05;

  ConformalCalibrator(double alpha, double qhat, std::size_t n_cal);

  double alpha() const { return alpha_; }
  double qhat() const { return qhat_; }
  std::size_t n_cal() const { return n_cal_; }
  /// True when n_cal is large enough for the threshold to be below 1.
  bool nontrivial() const;

 private:
  double alpha_;
  double qhat_;
  std::size_t n_cal_;
};

/// 1-based rank ceil((n+1)(1-alpha)).
std::size_t calibration_rank(std::size_t n, double alpha);

/// Throws ValidationError on an empty set or alpha outside (0,1).
ConformalCalibrator calibrate(std::span<const CalibrationRecord> records, double alpha);

LabelSet predict_set(const ConformalCalibrator& calibrator, const ClassProbs& probs);

double empirical_coverage(const ConformalCalibrator& calibrator,
                          std::span<const CalibrationRecord> test);

void to_json(nlohmann::json& j, const ConformalCalibrator& c);
ConformalCalibrator calibrator_from_json(const nlohmann::json& j);
void save_calibrator(const ConformalCalibrator& c, const std::filesystem::path& path);
ConformalCalibrator load_calibrator(const std::filesystem::path& path);

std::string format_label_set(const LabelSet& set);  // e.g. "wing;fuselage"
LabelSet parse_label_set(std::string_view text);

}  // namespace aeroseg
