#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "shaftpower/error.hpp"
#include "shaftpower/synth.hpp"

namespace shaftpower {
namespace {

using namespace std::chrono;

TEST(Generate, SameSeedSameData) {
  SynthConfig c;
  c.row_count = 300;
  c.seed = 77;
  c.noise_rel_std = 0.03;
  c.rpm_noise_rel_std = 0.01;
  EXPECT_EQ(generate(c).rows, generate(c).rows);
  auto d = c;
  d.seed = 78;
  EXPECT_NE(generate(c).rows, generate(d).rows);
}

TEST(Generate, NoiseFreePowerIsPhysicalPower) {
  SynthConfig c;
  c.row_count = 500;
  const auto rows = generate(c).rows;
  for (const auto& r : rows) {
    EXPECT_EQ(*r.shaft_power, physical_power(c.true_coefficients, r).total_power);
    EXPECT_EQ(*r.shaft_rpm, rpm_evaluate(c.true_rpm_model, r));
    EXPECT_GE(r.speed_through_water, kMinSpeedKnots);
    EXPECT_GE(*r.shaft_power, kMinShaftPowerKw);
    EXPECT_FALSE(r.has_missing_values());
    EXPECT_GT(r.wind_dir, -std::numbers::pi);
    EXPECT_LE(r.wind_dir, std::numbers::pi);
  }
}

TEST(Generate, TimestampsOrderedAndRangesRespected) {
  SynthConfig c;
  c.row_count = 400;
  const auto rows = generate(c).rows;
  ASSERT_EQ(rows.size(), 400u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i - 1].timestamp, rows[i].timestamp);
  for (const auto& r : rows) {
    EXPECT_GE(r.speed_through_water, c.speed_min_kn);
    EXPECT_LE(r.speed_through_water, c.speed_max_kn);
    EXPECT_GE(r.draught, c.draught_min_m);
    EXPECT_LE(r.draught, c.draught_max_m);
  }
}

TEST(Fouling, DriftFormula) {
  SynthConfig c;
  c.fouling_drydock_gain = 0.15;
  c.fouling_drydock_timescale_days = 365.0;
  c.fouling_polish_gain = 0.02;
  EXPECT_EQ(fouling_drift(c, 0.0, 0.0), 0.0);
  EXPECT_NEAR(fouling_drift(c, 182.5, 365.0), 0.15 * (1 - std::exp(-1.0)) + 0.01, 1e-15);
}

TEST(Fouling, MaintenanceAgesResetAtDryDock) {
  SynthConfig c;
  c.drydock_dates = {sys_days{year{2022} / 6 / 1}};
  const auto [p_before, d_before] = maintenance_ages(c, sys_days{year{2022} / 5 / 31});
  const auto [p_after, d_after] = maintenance_ages(c, sys_days{year{2022} / 6 / 3});
  EXPECT_EQ(d_after, 2.0);
  EXPECT_LE(p_after, 2.0);
  EXPECT_GT(d_before, 500.0);
  EXPECT_GT(p_before, 0.0);
  // polishing sawtooth never exceeds its period
  for (int day = 0; day < 365; day += 5) {
    const auto [p, d] = maintenance_ages(c, sys_days{year{2022} / 1 / 1} + days{day});
    EXPECT_LT(p, c.polish_period_days + 1e-9);
    EXPECT_GE(d, 0.0);
  }
}

TEST(Fouling, PairedRowsLowerAfterDryDock) {
  SynthConfig c;
  c.row_count = 400;
  c.fouling_drydock_gain = 0.15;
  c.fouling_drydock_timescale_days = 365.0;
  c.drydock_dates = {sys_days{year{2022} / 6 / 1}};
  c.paired_drydock_window_days = 10.0;
  const auto rows = generate(c).rows;
  const Timestamp dock = c.drydock_dates[0];
  std::vector<const EnvironmentRecord*> before, after;
  for (const auto& r : rows) (r.timestamp < dock ? before : after).push_back(&r);
  ASSERT_EQ(before.size(), 200u);
  ASSERT_EQ(after.size(), 200u);
  int matched = 0;
  for (const auto* b : before) {
    for (const auto* a : after) {
      if (a->speed_through_water == b->speed_through_water && a->wave_height == b->wave_height) {
        EXPECT_LT(*a->shaft_power, *b->shaft_power);
        ++matched;
      }
    }
  }
  EXPECT_EQ(matched, 200);
}

TEST(Config, Validation) {
  SynthConfig c;
  c.speed_min_kn = 2.0;
  c.speed_max_kn = 4.0;
  EXPECT_THROW(generate(c), UsageError);
  c = SynthConfig{};
  c.row_count = 0;
  EXPECT_THROW(c.validate(), UsageError);
  c = SynthConfig{};
  c.noise_rel_std = -0.1;
  EXPECT_THROW(c.validate(), UsageError);
  c = SynthConfig{};
  c.fouling_drydock_gain = -1;
  EXPECT_THROW(c.validate(), UsageError);
  c = SynthConfig{};
  c.paired_drydock_window_days = 5.0;
  EXPECT_THROW(c.validate(), UsageError);
}

TEST(Benchmarks, Layouts) {
  const auto drift = drift_benchmark();
  EXPECT_EQ(drift.train.row_count, 10000u);
  EXPECT_EQ(drift.test.row_count, 4000u);
  ASSERT_EQ(drift.train.drydock_dates.size(), 1u);
  EXPECT_GT(drift.train.drydock_dates[0], drift.train.start);
  EXPECT_LT(drift.train.drydock_dates[0], drift.test.start);
  EXPECT_EQ(drift.train.noise_rel_std, 0.03);

  const auto heavy = heavy_weather_benchmark(11, 2000, 500);
  EXPECT_LT(heavy.test.start, heavy.train.start);
  EXPECT_EQ(heavy.test.fouling_drydock_gain, 0.0);
  const auto test_rows = generate(heavy.test).rows;
  const auto train_rows = generate(heavy.train).rows;
  auto max_wave = [](const std::vector<EnvironmentRecord>& rows) {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.wave_height);
    return m;
  };
  EXPECT_GE(max_wave(test_rows), 4.0);
  auto mean_wave = [](const std::vector<EnvironmentRecord>& rows) {
    double s = 0.0;
    for (const auto& r : rows) s += r.wave_height;
    return s / static_cast<double>(rows.size());
  };
  EXPECT_GT(mean_wave(test_rows), 1.5 * mean_wave(train_rows));
}

}  // namespace
}  // namespace shaftpower
