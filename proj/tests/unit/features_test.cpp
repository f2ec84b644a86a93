#include <gtest/gtest.h>

#include "shaftpower/error.hpp"
#include "shaftpower/features.hpp"
#include "shaftpower/synth.hpp"

namespace shaftpower {
namespace {

std::vector<EnvironmentRecord> rows_with_rpm(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.row_count = n;
  c.seed = seed;
  auto rows = generate(c).rows;
  attach_predicted_rpm(default_true_rpm_model(), rows);
  return rows;
}

Eigen::MatrixXd stacked(const GroupedInputs& g) {
  Eigen::MatrixXd m(g.copernicus.rows() + g.sensor.rows() + g.external.rows(), g.samples());
  m << g.copernicus, g.sensor, g.external;
  return m;
}

TEST(Standardizer, TrainColumnsHaveZeroMeanUnitStd) {
  const auto train = rows_with_rpm(500, 1);
  for (auto enc : {DirectionEncoding::raw, DirectionEncoding::sin_cos}) {
    const auto s = fit_standardizer(train, FeatureGroups::defaults(), enc);
    const Eigen::MatrixXd x = stacked(s.transform(train));
    EXPECT_EQ(x.rows(), enc == DirectionEncoding::raw ? 13 : 16);
    EXPECT_EQ(static_cast<Eigen::Index>(s.column_names.size()), x.rows());
    const Eigen::VectorXd mean = x.rowwise().mean();
    const Eigen::VectorXd sd = ((x.colwise() - mean).array().square().rowwise().mean()).sqrt();
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((sd.array() - 1.0).abs().maxCoeff(), 1e-12);
  }
}

TEST(Standardizer, UsesTrainStatisticsOnly) {
  const auto train = rows_with_rpm(300, 2);
  auto other = rows_with_rpm(300, 3);
  const auto s = fit_standardizer(train, FeatureGroups::defaults());
  for (auto& r : other) r.speed_through_water += 100.0;
  const auto s2 = fit_standardizer(train, FeatureGroups::defaults());
  EXPECT_EQ(s.mean, s2.mean);
  const auto x = s.transform(other);
  // speed is the first sensor column; a shift of 100 kn lands far from zero
  EXPECT_GT(x.sensor.row(0).mean(), 10.0);
}

TEST(Standardizer, TargetNormalisation) {
  const auto train = rows_with_rpm(200, 4);
  const auto s = fit_standardizer(train, FeatureGroups::defaults());
  double lo = 1e300, hi = -1e300;
  for (const auto& r : train) {
    lo = std::min(lo, *r.shaft_power);
    hi = std::max(hi, *r.shaft_power);
  }
  EXPECT_EQ(s.normalize_target(lo), 0.0);
  EXPECT_EQ(s.normalize_target(hi), 1.0);
  EXPECT_NEAR(s.denormalize_target(s.normalize_target(4321.0)), 4321.0, 1e-9);
}

TEST(Standardizer, Errors) {
  auto train = rows_with_rpm(50, 5);
  EXPECT_THROW(fit_standardizer({}, FeatureGroups::defaults()), UsageError);
  auto flat = train;
  for (auto& r : flat) r.sea_temp = 12.0;
  try {
    fit_standardizer(flat, FeatureGroups::defaults());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(field_id(Field::sea_temp)), std::string::npos);
  }
  auto no_rpm = train;
  no_rpm[0].predicted_rpm.reset();
  EXPECT_THROW(fit_standardizer(no_rpm, FeatureGroups::defaults()), SchemaError);
}

TEST(FeatureGroups, Validation) {
  EXPECT_NO_THROW(FeatureGroups::defaults().validate());
  auto g = FeatureGroups::defaults();
  g.external.push_back(Field::draught);
  EXPECT_THROW(g.validate(), UsageError);
  g = FeatureGroups::defaults();
  g.sensor.push_back(Field::shaft_power);
  EXPECT_THROW(g.validate(), UsageError);
  g = FeatureGroups::defaults();
  g.external.clear();
  EXPECT_THROW(g.validate(), UsageError);
}

TEST(GroupedInputs, Gather) {
  const auto train = rows_with_rpm(20, 6);
  const auto x = fit_standardizer(train, FeatureGroups::defaults()).transform(train);
  const auto sub = x.gather({4, 1});
  EXPECT_EQ(sub.samples(), 2);
  EXPECT_EQ(sub.sensor.col(0), x.sensor.col(4));
  EXPECT_EQ(sub.external.col(1), x.external.col(1));
}

}  // namespace
}  // namespace shaftpower
