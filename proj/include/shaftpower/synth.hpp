#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shaftpower/data.hpp"
#include "shaftpower/physics.hpp"
#include "shaftpower/rpm_poly.hpp"

namespace shaftpower {

/// Ground-truth coefficients used by the default synthetic vessel.
ResistanceCoefficients default_true_coefficients();
/// Hidden order-3 RPM model over (V, T, v_wind, h_swell), raw units.
MultiplicativePolyModel default_true_rpm_model();

struct SynthConfig {
  std::size_t row_count = 1000;
  std::uint64_t seed = 1;
  Timestamp start = std::chrono::sys_days{std::chrono::year{2022} / 1 / 1};
  double duration_days = 365.0;

  ResistanceCoefficients true_coefficients = default_true_coefficients();
  MultiplicativePolyModel true_rpm_model = default_true_rpm_model();

  double noise_rel_std = 0.0;      ///< multiplicative power noise sigma
  double rpm_noise_rel_std = 0.0;  ///< multiplicative RPM noise sigma

  // Fouling drift: delta = k_d (1 - exp(-days_d / tau_d)) + k_p days_p / 365.
  double fouling_drydock_gain = 0.0;
  double fouling_drydock_timescale_days = 365.0;
  double fouling_polish_gain = 0.0;

  // Maintenance schedule. Polishing repeats every `polish_period_days` from
  // `polish_anchor`; a dry dock also polishes the propeller.
  std::vector<Timestamp> drydock_dates;
  double polish_period_days = 182.0;
  Timestamp polish_anchor = std::chrono::sys_days{std::chrono::year{2021} / 10 / 1};
  /// days_d at `start` when no dry dock precedes a row
  double days_since_drydock_at_start = 600.0;

  // Feature sampling.
  double speed_min_kn = 8.0;
  double speed_max_kn = 18.0;
  double draught_min_m = 7.0;
  double draught_max_m = 13.0;
  double sea_depth_min_m = 40.0;
  double sea_depth_max_m = 5000.0;  ///< log-uniform
  double wave_weibull_shape = 1.6;
  double wave_weibull_scale_m = 1.4;
  double wave_seasonal_amplitude = 0.3;  ///< relative winter increase of wave/wind scales
  double swell_weibull_shape = 1.8;
  double swell_weibull_scale_m = 1.1;
  double wind_rayleigh_sigma_mps = 6.0;
  double sea_temp_mean_c = 14.0;
  double sea_temp_seasonal_c = 5.0;
  double sea_temp_std_c = 2.0;
  double air_temp_offset_c = -1.0;
  double air_temp_std_c = 3.0;

  /// Paired mode: rows come in pairs sharing all sampled features, placed
  /// symmetrically within this many days around the first dry dock.
  std::optional<double> paired_drydock_window_days;

  void validate() const;
};

/// Fouling multiplier minus one for the given maintenance ages.
double fouling_drift(const SynthConfig& config, double days_since_polish, double days_since_drydock);

/// Maintenance ages at `t` implied by the schedule.
std::pair<double, double> maintenance_ages(const SynthConfig& config, Timestamp t);

/// Draws a dataset with ground-truth RPM and shaft power. Every row satisfies
/// the preprocessing filters; rows that would not are resampled.
Dataset generate(const SynthConfig& config);

/// Train/test configurations of the default drift benchmark: one year of
/// training data with a dry dock in November, followed by a test year.
struct BenchmarkConfigs {
  SynthConfig train;
  SynthConfig test;
};
BenchmarkConfigs drift_benchmark(std::uint64_t seed = 7, std::size_t train_rows = 10000, std::size_t test_rows = 4000);

/// Drift-free benchmark whose test voyage precedes the training period and
/// sees markedly higher waves.
BenchmarkConfigs heavy_weather_benchmark(std::uint64_t seed = 11, std::size_t train_rows = 8000,
                                         std::size_t test_rows = 1000);

}  // namespace shaftpower
