#include "edudss/evaluate/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "edudss/common/error.hpp"
#include "edudss/common/rng.hpp"
#include "oracles.hpp"

namespace edudss::evaluate {
namespace {

namespace oracle = testing::metric_oracle;

TEST(MetricsTest, WorkedExample) {
  const std::vector<double> y = {3.0, -0.5, 2.0, 7.0};
  const std::vector<double> p = {2.5, 0.0, 2.0, 8.0};
  EXPECT_NEAR(rmse(y, p), std::sqrt(0.375), 1e-12);
  EXPECT_NEAR(mae(y, p), 0.5, 1e-12);
  EXPECT_NEAR(r2(y, p), 0.9486081370449679, 1e-12);
  EXPECT_NEAR(explained_variance(y, p), 0.9571734475374732, 1e-12);
}

TEST(MetricsTest, PerfectPrediction) {
  const std::vector<double> y = {60.0, 70.0, 80.0};
  EXPECT_EQ(rmse(y, y), 0.0);
  EXPECT_EQ(mae(y, y), 0.0);
  EXPECT_EQ(r2(y, y), 1.0);
  EXPECT_EQ(mape(y, y), 0.0);
  EXPECT_EQ(explained_variance(y, y), 1.0);
}

TEST(MetricsTest, ConstantOffsetHasFullExplainedVariance) {
  const std::vector<double> y = {1.0, 2.0, 3.0};
  const std::vector<double> p = {2.0, 3.0, 4.0};
  EXPECT_NEAR(explained_variance(y, p), 1.0, 1e-12);
  EXPECT_NEAR(r2(y, p), -0.5, 1e-12);
  EXPECT_NEAR(mape(y, p), 100.0 * (1.0 + 0.5 + 1.0 / 3.0) / 3.0, 1e-12);
}

TEST(MetricsTest, ExplainedVarianceOfConstantPrediction) {
  // Residuals [-1, 0, 1] vary exactly as much as y does.
  const std::vector<double> y = {1.0, 2.0, 3.0};
  const std::vector<double> p = {2.0, 2.0, 2.0};
  EXPECT_NEAR(explained_variance(y, p), 0.0, 1e-12);
}

TEST(MetricsTest, MeanPredictorScoresZero) {
  const std::vector<double> y = {1.0, 2.0, 3.0, 6.0};
  const std::vector<double> p(4, 3.0);
  EXPECT_NEAR(r2(y, p), 0.0, 1e-12);
  EXPECT_NEAR(explained_variance(y, p), 0.0, 1e-12);
}

TEST(MetricsTest, AgreesWithLongDoubleOracle) {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(500);
    std::vector<double> y(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.uniform01() * 60.0 + 40.0;
      p[i] = y[i] + rng.normal(0.0, 3.0);
    }
    EXPECT_NEAR(rmse(y, p), oracle::rmse(y, p), 1e-9);
    EXPECT_NEAR(mae(y, p), oracle::mae(y, p), 1e-9);
    EXPECT_NEAR(r2(y, p), oracle::r2(y, p), 1e-9);
    EXPECT_NEAR(mape(y, p), oracle::mape(y, p), 1e-9);
    EXPECT_NEAR(explained_variance(y, p), oracle::explained_variance(y, p), 1e-9);
    EXPECT_GE(rmse(y, p), mae(y, p));
    EXPECT_LE(r2(y, p), explained_variance(y, p) + 1e-12);
  }
}

TEST(MetricsTest, ScaleBehaviour) {
  Rng rng(4);
  std::vector<double> y(100), p(100), y2(100), p2(100);
  for (std::size_t i = 0; i < 100; ++i) {
    y[i] = 50.0 + rng.normal(0.0, 10.0);
    p[i] = y[i] + rng.normal(0.0, 2.0);
    y2[i] = 3.0 * y[i];
    p2[i] = 3.0 * p[i];
  }
  EXPECT_NEAR(rmse(y2, p2), 3.0 * rmse(y, p), 1e-9);
  EXPECT_NEAR(mae(y2, p2), 3.0 * mae(y, p), 1e-9);
  EXPECT_NEAR(r2(y2, p2), r2(y, p), 1e-12);
  EXPECT_NEAR(mape(y2, p2), mape(y, p), 1e-9);
}

TEST(MetricsTest, RejectsBadInput) {
  const std::vector<double> empty;
  const std::vector<double> two = {1.0, 2.0};
  const std::vector<double> three = {1.0, 2.0, 3.0};
  const std::vector<double> flat = {5.0, 5.0};
  const std::vector<double> zero = {0.0, 1.0};
  EXPECT_THROW(rmse(empty, empty), DataError);
  EXPECT_THROW(mae(two, three), DataError);
  EXPECT_THROW(r2(flat, two), DataError);
  EXPECT_THROW(explained_variance(flat, two), DataError);
  EXPECT_THROW(mape(zero, two), DataError);
}

TEST(MetricsReportTest, JsonRoundTrip) {
  const std::vector<double> y = {70.0, 65.0, 80.0, 72.0};
  const std::vector<double> p = {69.0, 66.5, 78.0, 73.0};
  auto report = compute_report(y, p, "Initial");
  report.timestamp = "2026-03-01T10:00:00.000Z";
  EXPECT_EQ(report.n, 4u);
  EXPECT_EQ(report.phase_label, "Initial");
  const auto doc = report.to_json();
  for (const char* key : {"phase", "timestamp", "n", "rmse", "mae", "r2", "mape_percent",
                          "explained_variance"}) {
    EXPECT_TRUE(doc.contains(key)) << key;
  }
  EXPECT_EQ(MetricsReport::from_json(doc), report);
}

}  // namespace
}  // namespace edudss::evaluate
