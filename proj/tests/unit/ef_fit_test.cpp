#include <gtest/gtest.h>

#include <Eigen/Core>
#include <unsupported/Eigen/AutoDiff>

#include <cmath>

#include "shaftpower/ef_fit.hpp"
#include "shaftpower/error.hpp"
#include "shaftpower/metrics.hpp"
#include "shaftpower/synth.hpp"

namespace shaftpower {
namespace {

using Vec7 = Eigen::Matrix<double, 7, 1>;
using AD = Eigen::AutoDiffScalar<Vec7>;

std::vector<EnvironmentRecord> synthetic(std::size_t n, std::uint64_t seed, double noise = 0.0) {
  SynthConfig c;
  c.row_count = n;
  c.seed = seed;
  c.noise_rel_std = noise;
  return generate(c).rows;
}

// Same objective evaluated through the templated physics with forward-mode autodiff.
std::pair<double, Vec7> autodiff_objective(const ResistanceCoefficients& k,
                                           const std::vector<EnvironmentRecord>& rows) {
  const auto& v = k.values();
  auto var = [](double x, int i) { return AD(x, 7, i); };
  BasicResistanceCoefficients<AD> kad({.a = var(v.a, 0), .b = var(v.b, 1), .c = var(v.c, 2), .f_c = var(v.f_c, 3),
                                       .f_h = var(v.f_h, 4), .f_s = var(v.f_s, 5), .f_g = var(v.f_g, 6),
                                       .gamma = v.gamma, .water_density = v.water_density});
  AD sum(0.0, Vec7::Zero());
  for (const auto& r : rows) {
    const AD e = physical_power(kad, r).total_power - *r.shaft_power;
    sum += e * e;
  }
  const double n = static_cast<double>(rows.size());
  return {sum.value() / n, sum.derivatives() / n};
}

TEST(EfObjective, GradientMatchesAutodiff) {
  const auto rows = synthetic(300, 5, 0.03);
  for (const auto& k : {default_true_coefficients(),
                        ResistanceCoefficients({.a = -0.7, .b = 3.1, .c = 0.3, .f_c = 0.05, .f_h = 1.7, .f_s = -0.2,
                                                .f_g = 2.0}),
                        ResistanceCoefficients({.a = 4.0, .b = 0.5, .c = 0.1, .f_c = 0.95, .f_h = 0.1, .f_s = 2.5,
                                                .f_g = 12.0})}) {
    const auto obj = ef_objective(k, rows);
    const auto [mse, grad] = autodiff_objective(k, rows);
    EXPECT_NEAR(obj.mse, mse, 1e-10 * mse);
    for (int i = 0; i < 7; ++i) EXPECT_NEAR(obj.gradient[i], grad[i], 1e-9 * grad.cwiseAbs().maxCoeff()) << i;
  }
}

TEST(EfObjective, ZeroAtTruthWithoutNoise) {
  const auto rows = synthetic(200, 6);
  const auto obj = ef_objective(default_true_coefficients(), rows);
  EXPECT_LT(obj.mse, 1e-18);
  EXPECT_LT(obj.gradient.cwiseAbs().maxCoeff(), 1e-6);
}

// Only the power is checked; products such as f_g * d_water are not separately identifiable.
TEST(EfFit, ReproducesNoiseFreePower) {
  const auto train = synthetic(2000, 21);
  const auto test = synthetic(500, 22);
  EfFitConfig cfg;
  cfg.seed = 3;
  const auto fit = fit_ef(train, cfg);
  const auto pred = predict_ef(fit.coefficients, test);
  std::vector<double> actual;
  for (const auto& r : test) actual.push_back(*r.shaft_power);
  EXPECT_LT(evaluate(actual, pred).mape, 0.5);
}

TEST(EfFit, ConstraintsProgressAndDeterminism) {
  const auto train = synthetic(600, 9, 0.05);
  EfFitConfig cfg;
  cfg.seed = 17;
  cfg.multistart_count = 3;
  const auto a = fit_ef(train, cfg);
  const auto b = fit_ef(train, cfg);
  EXPECT_EQ(a.coefficients.values().c, b.coefficients.values().c);
  EXPECT_EQ(a.train_mse, b.train_mse);
  EXPECT_GT(a.coefficients.c(), 0.0);
  EXPECT_GE(a.coefficients.f_g(), 0.0);
  EXPECT_GE(a.coefficients.f_c(), 0.0);
  EXPECT_LE(a.coefficients.f_c(), 1.0);
  EXPECT_LE(a.train_mse, a.initial_mse);
  EXPECT_NEAR(a.train_mse, ef_objective(a.coefficients, train).mse, 1e-9 * a.train_mse);
  EXPECT_GE(a.restart_index, 0);
  EXPECT_LT(a.restart_index, 3);
}

TEST(EfFit, SingleRecordAndEmpty) {
  const auto one = synthetic(1, 4);
  EfFitConfig cfg;
  cfg.multistart_count = 2;
  cfg.max_iterations = 500;
  const auto fit = fit_ef(one, cfg);
  EXPECT_TRUE(std::isfinite(fit.train_mse));
  EXPECT_THROW(fit_ef({}, cfg), UsageError);
  EXPECT_THROW(ef_objective(default_true_coefficients(), {}), UsageError);
  cfg.multistart_count = 0;
  EXPECT_THROW(fit_ef(one, cfg), UsageError);
}

TEST(PredictEf, OracleAndResiduals) {
  const auto k = ResistanceCoefficients({.a = 1.2, .b = 1.8, .c = 0.21, .f_c = 0.35, .f_h = 0.8, .f_s = 0.55, .f_g = 6.5});
  EnvironmentRecord r;
  r.speed_through_water = 13.5;
  r.draught = 10.2;
  r.air_temp = 18.0;
  r.wind_dir = -2.1;
  r.wind_speed = 11.0;
  r.wave_height = 2.3;
  r.wave_dir = 0.7;
  r.shaft_power = 9000.0;
  const auto p = predict_ef(k, {r, r});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 8564.663688431197, 1e-9);
  EXPECT_NEAR(ef_residuals(k, {r})[0], 9000.0 - 8564.663688431197, 1e-9);

  auto bad = r;
  bad.speed_through_water = 0.0;
  try {
    predict_ef(k, {r, bad});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

}  // namespace
}  // namespace shaftpower
