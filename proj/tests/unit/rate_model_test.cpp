#include "greenflow/rate_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "greenflow/error.hpp"

namespace greenflow {
namespace {

TEST(RateCurve, AnalyticMatchesTruncatedShannon) {
  const RateCurve curve;
  // 0.6 * 20 MHz * log2(2)
  EXPECT_DOUBLE_EQ(curve.throughput(1.0), 12e6);
  EXPECT_DOUBLE_EQ(curve.throughput(3.0), 24e6);
  EXPECT_DOUBLE_EQ(curve.throughput(1e6), 100e6);
  EXPECT_EQ(curve.throughput(0.0), 0.0);
  EXPECT_DOUBLE_EQ(curve.saturation_rate(), 100e6);
  EXPECT_FALSE(curve.is_table());
}

TEST(RateCurve, AnalyticCapBoundary) {
  const RateCurve curve = RateCurve::analytic({10e6, 1.0, 30e6});
  const double knee = std::exp2(3.0) - 1.0;
  EXPECT_NEAR(curve.throughput(knee), 30e6, 1e-6);
  EXPECT_DOUBLE_EQ(curve.throughput(2 * knee), 30e6);
  EXPECT_LT(curve.throughput(0.5 * knee), 30e6);
}

TEST(RateCurve, AnalyticRejectsBadParameters) {
  EXPECT_THROW(RateCurve::analytic({0.0, 0.6, 1e8}), ConfigError);
  EXPECT_THROW(RateCurve::analytic({20e6, -1.0, 1e8}), ConfigError);
  EXPECT_THROW(RateCurve::analytic({20e6, 0.6, 0.0}), ConfigError);
}

TEST(RateCurve, TableInterpolatesInDb) {
  const auto curve = RateCurve::table({{0.0, 1e6}, {10.0, 11e6}});
  EXPECT_NEAR(curve.throughput(db_to_linear(5.0)), 6e6, 1e-6);
  EXPECT_NEAR(curve.throughput(db_to_linear(2.5)), 3.5e6, 1e-6);
  EXPECT_DOUBLE_EQ(curve.throughput(1.0), 1e6);
  EXPECT_DOUBLE_EQ(curve.throughput(10.0), 11e6);
}

TEST(RateCurve, TableClampsOutsideRange) {
  const auto curve = RateCurve::table({{0.0, 1e6}, {10.0, 11e6}});
  EXPECT_DOUBLE_EQ(curve.throughput(db_to_linear(-30.0)), 1e6);
  EXPECT_DOUBLE_EQ(curve.throughput(db_to_linear(40.0)), 11e6);
  EXPECT_EQ(curve.throughput(0.0), 0.0);
  EXPECT_DOUBLE_EQ(curve.saturation_rate(), 11e6);
}

TEST(RateCurve, TableValidation) {
  EXPECT_THROW(RateCurve::table({}), ConfigError);
  EXPECT_THROW(RateCurve::table({{0.0, 1e6}, {0.0, 2e6}}), ConfigError);
  EXPECT_THROW(RateCurve::table({{0.0, 2e6}, {1.0, 1e6}}), ConfigError);
  EXPECT_THROW(RateCurve::table({{0.0, -1.0}}), ConfigError);
  EXPECT_THROW(RateCurve::table({{0.0, NAN}}), ConfigError);
  EXPECT_NO_THROW(RateCurve::table({{0.0, 1e6}, {1.0, 1e6}}));
}

TEST(RateCurve, CsvRoundTrip) {
  std::istringstream in("sinr_db,rate_bps\n-5,1e6\n 0 , 4e6\n\n5,1.0e7\n");
  const auto curve = RateCurve::from_csv(in);
  ASSERT_TRUE(curve.is_table());
  ASSERT_EQ(curve.table_points()->size(), 3u);
  EXPECT_DOUBLE_EQ(curve.throughput(db_to_linear(2.5)), 7e6);
}

TEST(RateCurve, CsvErrors) {
  std::istringstream no_header("-5,1e6\n");
  EXPECT_THROW(RateCurve::from_csv(no_header), ConfigError);
  std::istringstream three_cols("sinr_db,rate_bps\n1,2,3\n");
  EXPECT_THROW(RateCurve::from_csv(three_cols), ConfigError);
  std::istringstream garbage("sinr_db,rate_bps\n1,abc\n");
  EXPECT_THROW(RateCurve::from_csv(garbage), ConfigError);
  std::istringstream decreasing("sinr_db,rate_bps\n5,1e6\n0,2e6\n");
  EXPECT_THROW(RateCurve::from_csv(decreasing), ConfigError);
  EXPECT_THROW(RateCurve::load_csv("/nonexistent/table.csv"), ConfigError);
}

TEST(RateCurve, LoadsShippedTable) {
  const auto curve = RateCurve::load_csv(GREENFLOW_TEST_DATA_DIR "/rate_table.csv");
  EXPECT_EQ(curve.table_points()->size(), 7u);
  EXPECT_DOUBLE_EQ(curve.throughput(db_to_linear(10.0)), 20e6);
}

TEST(Sinr, RatioAndErrors) {
  EXPECT_DOUBLE_EQ(sinr(2.0, 0.5), 4.0);
  EXPECT_EQ(sinr(0.0, 1.0), 0.0);
  EXPECT_THROW(sinr(-1.0, 1.0), ConfigError);
  EXPECT_THROW(sinr(1.0, 0.0), ConfigError);
}

// Property: every curve is nondecreasing, nonnegative and bounded by its saturation rate.
TEST(RateCurveProperty, MonotoneAndBounded) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> db(-40.0, 60.0);
  const RateCurve curves[] = {RateCurve(), RateCurve::load_csv(GREENFLOW_TEST_DATA_DIR "/rate_table.csv"),
                              RateCurve::analytic({5e6, 0.8, 20e6})};
  for (const auto& c : curves) {
    for (int k = 0; k < 2000; ++k) {
      double a = db_to_linear(db(rng));
      double b = db_to_linear(db(rng));
      if (a > b) std::swap(a, b);
      EXPECT_LE(c.throughput(a), c.throughput(b));
      EXPECT_GE(c.throughput(a), 0.0);
      EXPECT_LE(c.throughput(b), c.saturation_rate());
    }
  }
}

// Property: between two table points the curve is affine in dB.
TEST(RateCurveProperty, TableAffineInDbBetweenKnots) {
  const auto curve = RateCurve::load_csv(GREENFLOW_TEST_DATA_DIR "/rate_table.csv");
  const auto& pts = *curve.table_points();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    for (double t : {0.1, 0.37, 0.5, 0.9}) {
      const double x = pts[i].sinr_db + t * (pts[i + 1].sinr_db - pts[i].sinr_db);
      const double expected = pts[i].rate_bps + t * (pts[i + 1].rate_bps - pts[i].rate_bps);
      EXPECT_NEAR(curve.throughput(db_to_linear(x)), expected, 1e-6 * expected);
    }
  }
}

TEST(ZoneConfig, Validation) {
  EXPECT_NO_THROW((ZoneConfig{1e-3, 0.0, "a"}.validate()));
  EXPECT_THROW((ZoneConfig{0.0, 1.0, "a"}.validate()), ConfigError);
  EXPECT_THROW((ZoneConfig{1e-3, -1.0, "a"}.validate()), ConfigError);
}

}  // namespace
}  // namespace greenflow
