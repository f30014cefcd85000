#include "aeroseg/conformal.hpp"
#include "aeroseg/error.hpp"
#include "synthetic.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

using namespace aeroseg;

namespace {

// Independent score: mass of every class that sorts at or before `label`.
double oracle_score(const ClassProbs& p, PartLabel label) {
  const std::size_t y = index_of(label);
  double s = 0.0;
  for (std::size_t c = 0; c < kNumParts; ++c) {
    const bool before = p[c] > p[y] || (p[c] == p[y] && c <= y);
    if (before) s += p[c];
  }
  return s;
}

double oracle_qhat(std::vector<double> scores, double alpha) {
  std::sort(scores.begin(), scores.end());
  const double n = static_cast<double>(scores.size());
  const auto rank = static_cast<std::size_t>(std::ceil((n + 1.0) * (1.0 - alpha) - 1e-12));
  return rank > scores.size() ? 1.0 : scores[rank - 1];
}

CalibrationRecord record(ClassProbs p, PartLabel y) { return {p, y}; }

}  // namespace

TEST(ApsScore, Examples) {
  EXPECT_DOUBLE_EQ(aps_score({1, 0, 0, 0}, PartLabel::fuselage), 1.0);
  EXPECT_DOUBLE_EQ(aps_score({.25, .25, .25, .25}, PartLabel::stabilizer), 0.75);
  EXPECT_NEAR(aps_score({.5, .3, .15, .05}, PartLabel::wing), 0.8, 1e-15);
}

TEST(ApsScore, MatchesOracle) {
  std::mt19937_64 rng(1);
  for (const auto& r : fixtures::synthetic_records(500, rng))
    for (auto l : kAllParts) EXPECT_NEAR(aps_score(r.probs, l), oracle_score(r.probs, l), 1e-15);
}

TEST(Ranking, TiesByAscendingId) {
  const auto r = ranking({0.2, 0.4, 0.2, 0.2});
  EXPECT_EQ(r, (std::array<std::size_t, 4>{1, 0, 2, 3}));
}

TEST(Calibrate, RankRule) {
  EXPECT_EQ(calibration_rank(99, 0.05), 95u);
  EXPECT_EQ(calibration_rank(3, 0.05), 4u);
  EXPECT_EQ(calibration_rank(19, 0.05), 19u);
}

TEST(Calibrate, ConstantScores) {
  // Label ranked second with mass .3 + .2 = .5 every time.
  std::vector<CalibrationRecord> recs(19, record({.3, .2, .25, .25}, PartLabel::stabilizer));
  EXPECT_NEAR(aps_score(recs[0].probs, recs[0].label), 0.55, 1e-15);
  std::vector<CalibrationRecord> half(19, record({.5, .3, .1, .1}, PartLabel::fuselage));
  EXPECT_NEAR(calibrate(half, 0.05).qhat(), 0.5, 1e-15);
}

TEST(Calibrate, SmallSetClampsToOne) {
  std::vector<CalibrationRecord> recs(3, record({.7, .1, .1, .1}, PartLabel::fuselage));
  const auto c = calibrate(recs, 0.05);
  EXPECT_EQ(c.qhat(), 1.0);
  EXPECT_FALSE(c.nontrivial());
  EXPECT_EQ(predict_set(c, {.97, .01, .01, .01}).size(), 4u);
}

TEST(Calibrate, MatchesSortOracleAndIgnoresOrder) {
  std::mt19937_64 rng(2);
  auto recs = fixtures::synthetic_records(777, rng);
  for (double alpha : {0.01, 0.05, 0.1, 0.3, 0.5}) {
    std::vector<double> scores;
    for (const auto& r : recs) scores.push_back(oracle_score(r.probs, r.label));
    const double q = calibrate(recs, alpha).qhat();
    EXPECT_DOUBLE_EQ(q, oracle_qhat(scores, alpha));
    std::shuffle(recs.begin(), recs.end(), rng);
    EXPECT_DOUBLE_EQ(calibrate(recs, alpha).qhat(), q);
  }
}

TEST(Calibrate, RejectsBadInput) {
  EXPECT_THROW(calibrate({}, 0.05), ValidationError);
  std::vector<CalibrationRecord> recs(5, record({.7, .1, .1, .1}, PartLabel::fuselage));
  EXPECT_THROW(calibrate(recs, 0.0), ValidationError);
  EXPECT_THROW(calibrate(recs, 1.0), ValidationError);
}

TEST(PredictSet, Examples) {
  EXPECT_EQ(predict_set(ConformalCalibrator(0.05, 1.0, 100), {.97, .01, .01, .01}), LabelSet::all());
  const auto top = predict_set(ConformalCalibrator(0.05, 0.9, 100), {.97, .01, .01, .01});
  EXPECT_EQ(top.labels(), std::vector<PartLabel>{PartLabel::fuselage});
  const auto three = predict_set(ConformalCalibrator(0.05, 0.85, 100), {.5, .3, .15, .05});
  EXPECT_EQ(three.labels(),
            (std::vector<PartLabel>{PartLabel::fuselage, PartLabel::wing, PartLabel::stabilizer}));
}

TEST(PredictSet, NeverEmptyAndNested) {
  std::mt19937_64 rng(3);
  const auto cal = fixtures::synthetic_records(400, rng);
  const auto test = fixtures::synthetic_records(400, rng);
  const double alphas[] = {0.02, 0.05, 0.1, 0.2, 0.4, 0.7};
  for (const auto& r : test) {
    LabelSet previous = LabelSet::all();
    for (double a : alphas) {
      const auto s = predict_set(calibrate(cal, a), r.probs);
      EXPECT_FALSE(s.empty());
      EXPECT_TRUE(s.is_subset_of(previous));
      previous = s;
    }
  }
}

TEST(Coverage, AboveNominalOnSyntheticData) {
  std::mt19937_64 rng(4);
  for (double alpha : {0.05, 0.5}) {
    const auto cal = fixtures::synthetic_records(2000, rng);
    const auto test = fixtures::synthetic_records(2000, rng);
    const double se = std::sqrt(alpha * (1 - alpha) / 2000.0);
    EXPECT_GE(empirical_coverage(calibrate(cal, alpha), test), 1 - alpha - 3 * se);
  }
  const auto test = fixtures::synthetic_records(50, rng);
  EXPECT_EQ(empirical_coverage(ConformalCalibrator(0.05, 1.0, 10), test), 1.0);
}

TEST(Coverage, ScoreQuantileIsTightWhenInterior) {
  // Sets over-cover because they keep the class that crosses qhat; the score
  // itself falls at or below qhat with probability close to 1 - alpha.
  double hits = 0.0, total = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(300 + seed);
    const auto cal = fixtures::synthetic_records(2000, rng, 1.0, 5.0);
    const auto test = fixtures::synthetic_records(2000, rng, 1.0, 5.0);
    const auto c = calibrate(cal, 0.05);
    ASSERT_LT(c.qhat(), 1.0);
    for (const auto& r : test) hits += aps_score(r.probs, r.label) <= c.qhat() ? 1.0 : 0.0;
    total += static_cast<double>(test.size());
  }
  EXPECT_NEAR(hits / total, 0.95, 0.006);
}

TEST(LabelSetText, RoundTrip) {
  LabelSet s;
  s.insert(PartLabel::engine);
  s.insert(PartLabel::wing);
  EXPECT_EQ(parse_label_set(format_label_set(s)), s);
  EXPECT_THROW(parse_label_set(""), Error);
}

TEST(CalibratorFile, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "aeroseg_test_calibrator.json";
  const ConformalCalibrator c(0.1, 0.8125, 321);
  save_calibrator(c, path);
  const auto back = load_calibrator(path);
  EXPECT_EQ(back.alpha(), 0.1);
  EXPECT_EQ(back.qhat(), 0.8125);
  EXPECT_EQ(back.n_cal(), 321u);
  EXPECT_THROW(ConformalCalibrator(0.05, 1.5, 10), ValidationError);
}
