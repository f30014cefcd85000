#include "aeroseg/conformal.hpp"

#include "aeroseg/error.hpp"
#include "aeroseg/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace aeroseg {

LabelSet LabelSet::all() {
  LabelSet s;
  for (auto l : kAllParts) s.insert(l);
  return s;
}

std::size_t LabelSet::size() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<PartLabel> LabelSet::labels() const {
  std::vector<PartLabel> out;
  for (auto l : kAllParts)
    if (contains(l)) out.push_back(l);
  return out;
}

std::array<std::size_t, kNumParts> ranking(const ClassProbs& probs) {
  std::array<std::size_t, kNumParts> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  return order;
}

double aps_score(const ClassProbs& probs, PartLabel label) {
  double mass = 0.0;
  for (auto c : ranking(probs)) {
    mass = std::min(mass + probs[c], 1.0);
    if (c == index_of(label)) break;
  }
  return mass;
}

ConformalCalibrator::ConformalCalibrator(double alpha, double qhat, std::size_t n_cal)
    : alpha_(alpha), qhat_(qhat), n_cal_(n_cal) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (!(qhat >= 0.0 && qhat <= 1.0)) throw ValidationError("qhat must lie in [0, 1]");
}

bool ConformalCalibrator::nontrivial() const {
  return static_cast<double>(n_cal_) >= std::ceil(1.0 / alpha_) - 1.0;
}

std::size_t calibration_rank(std::size_t n, double alpha) {
  // Guard against (n+1)(1-alpha) landing a hair above an integer, e.g. 100*0.95.
  const double raw = static_cast<double>(n + 1) * (1.0 - alpha);
  return static_cast<std::size_t>(std::ceil(raw - 1e-9));
}

ConformalCalibrator calibrate(std::span<const CalibrationRecord> records, double alpha) {
  if (records.empty()) throw ValidationError("calibration set is empty");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& r : records) scores.push_back(aps_score(r.probs, r.label));
  const auto rank = calibration_rank(records.size(), alpha);
  if (rank > scores.size()) return {alpha, 1.0, records.size()};
  std::nth_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                   scores.end());
  return {alpha, scores[rank - 1], records.size()};
}

LabelSet predict_set(const ConformalCalibrator& calibrator, const ClassProbs& probs) {
  // Walks the ranking until the mass reaches qhat, and keeps going through any class
  // whose own score is still <= qhat (zero-probability tails), so every label that
  // calibration would have counted as conforming is in the set.
  const double q = calibrator.qhat();
  LabelSet set;
  double mass = 0.0;
  for (auto c : ranking(probs)) {
    const double before = mass;
    mass = std::min(mass + probs[c], 1.0);
    if (before < q || mass <= q || set.empty())
      set.insert(static_cast<PartLabel>(c));
    else
      break;
  }
  return set;
}

double empirical_coverage(const ConformalCalibrator& calibrator,
                          std::span<const CalibrationRecord> test) {
  if (test.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : test) hits += predict_set(calibrator, r.probs).contains(r.label);
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

void to_json(nlohmann::json& j, const ConformalCalibrator& c) {
  j = nlohmann::json{{"alpha", c.alpha()}, {"qhat", c.qhat()}, {"n_cal", c.n_cal()}};
}

ConformalCalibrator calibrator_from_json(const nlohmann::json& j) {
  try {
    return {j.at("alpha").get<double>(), j.at("qhat").get<double>(),
            j.at("n_cal").get<std::size_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed calibrator: ") + e.what());
  }
}

void save_calibrator(const ConformalCalibrator& c, const std::filesystem::path& path) {
  write_file_atomic(path, nlohmann::json(c).dump(2) + "\n");
}

ConformalCalibrator load_calibrator(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return calibrator_from_json(j);
}

std::string format_label_set(const LabelSet& set) {
  std::string out;
  for (auto l : set.labels()) {
    if (!out.empty()) out += ';';
    out += to_string(l);
  }
  return out;
}

LabelSet parse_label_set(std::string_view text) {
  LabelSet set;
  while (!text.empty()) {
    const auto semi = text.find(';');
    set.insert(parse_part_label(text.substr(0, semi)));
    if (semi == std::string_view::npos) break;
    text.remove_prefix(semi + 1);
  }
  if (set.empty()) throw ValidationError("empty label set");
  return set;
}

}  // namespace aeroseg
