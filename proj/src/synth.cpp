#include "shaftpower/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

constexpr double kSecondsPerDay = 86400.0;
constexpr int kMaxResample = 10000;

double days_between(Timestamp from, Timestamp to) {
  return static_cast<double>((to - from).count()) / kSecondsPerDay;
}

Timestamp add_days(Timestamp t, double days) {
  return t + std::chrono::seconds(static_cast<std::int64_t>(std::llround(days * kSecondsPerDay)));
}

// Features that do not depend on the timestamp-driven maintenance state.
struct FeatureDraw {
  double speed, draught, sea_depth, sea_temp, air_temp;
  double wave_height, swell_height, wave_dir, swell_dir, wind_dir, wind_speed;
};

std::mt19937_64 seeded(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), std::uint32_t{0x5eed}};
  return std::mt19937_64(seq);
}

class Sampler {
 public:
  explicit Sampler(const SynthConfig& c) : c_(c), rng_(seeded(c.seed)) {}

  FeatureDraw draw(Timestamp t) {
    // Seasonal phase: 1 in mid-January, -1 in mid-July.
    const double day_of_year = std::fmod(days_between(Timestamp{}, t), 365.25);
    const double season = std::cos(2.0 * std::numbers::pi * (day_of_year - 15.0) / 365.25);
    const double storm = 1.0 + c_.wave_seasonal_amplitude * season;

    FeatureDraw f{};
    f.speed = uniform(std::max(c_.speed_min_kn, 5.0), c_.speed_max_kn);
    f.draught = uniform(c_.draught_min_m, c_.draught_max_m);
    f.sea_depth = std::exp(uniform(std::log(c_.sea_depth_min_m), std::log(c_.sea_depth_max_m)));
    f.sea_temp = c_.sea_temp_mean_c - c_.sea_temp_seasonal_c * season + normal(c_.sea_temp_std_c);
    f.air_temp = f.sea_temp + c_.air_temp_offset_c + normal(c_.air_temp_std_c);
    f.wave_height = weibull(c_.wave_weibull_shape, c_.wave_weibull_scale_m * storm);
    f.swell_height = weibull(c_.swell_weibull_shape, c_.swell_weibull_scale_m * storm);
    f.wave_dir = direction();
    f.swell_dir = direction();
    f.wind_dir = direction();
    // Rayleigh(sigma) is Weibull(2, sigma * sqrt(2)).
    f.wind_speed = weibull(2.0, c_.wind_rayleigh_sigma_mps * std::sqrt(2.0) * std::sqrt(storm));
    return f;
  }

  double noise(double sigma) { return sigma > 0.0 ? normal(sigma) : 0.0; }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(rng_); }
  double weibull(double shape, double scale) { return std::weibull_distribution<double>(shape, scale)(rng_); }
  double direction() {
    // (-pi, pi]
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    return normalize_angle(std::numbers::pi - 2.0 * std::numbers::pi * u);
  }

  const SynthConfig& c_;
  std::mt19937_64 rng_;
};

EnvironmentRecord make_record(Timestamp t, const FeatureDraw& f, double days_p, double days_d) {
  EnvironmentRecord r;
  r.timestamp = t;
  r.speed_through_water = f.speed;
  r.draught = f.draught;
  r.sea_depth = f.sea_depth;
  r.sea_temp = f.sea_temp;
  r.air_temp = f.air_temp;
  r.wave_height = f.wave_height;
  r.swell_height = f.swell_height;
  r.wave_dir = f.wave_dir;
  r.swell_dir = f.swell_dir;
  r.wind_dir = f.wind_dir;
  r.wind_speed = f.wind_speed;
  r.days_since_polish = days_p;
  r.days_since_drydock = days_d;
  return r;
}

// Fills rpm/power; returns false if the row violates the preprocessing filters.
bool finish_record(const SynthConfig& c, Sampler& s, EnvironmentRecord& r) {
  const double clean = physical_power(c.true_coefficients, r).total_power;
  const double drift = fouling_drift(c, r.days_since_polish, r.days_since_drydock);
  const double power = clean * (1.0 + drift) * (1.0 + s.noise(c.noise_rel_std));
  const double rpm = rpm_evaluate(c.true_rpm_model, r) * (1.0 + s.noise(c.rpm_noise_rel_std));
  r.shaft_power = power;
  r.shaft_rpm = rpm;
  return std::isfinite(power) && power >= kMinShaftPowerKw && r.speed_through_water >= kMinSpeedKnots;
}

}  // namespace

ResistanceCoefficients default_true_coefficients() {
  return ResistanceCoefficients({.a = 1.5, .b = 2.0, .c = 0.18, .f_c = 0.4, .f_h = 0.9, .f_s = 0.5, .f_g = 8.0});
}

MultiplicativePolyModel default_true_rpm_model() {
  auto poly = [](Field f, std::initializer_list<double> c) {
    ScaledPolynomial p;
    p.feature = f;
    p.coefficients = Eigen::VectorXd::Map(c.begin(), static_cast<Eigen::Index>(c.size()));
    return p;
  };
  return MultiplicativePolyModel(3, {
                                        poly(Field::speed_through_water, {10.0, 5.5, -0.05, 0.001}),
                                        poly(Field::draught, {0.86, 0.016, -0.0003, 0.00001}),
                                        poly(Field::wind_speed, {1.0, 0.002, 0.0003, -0.00001}),
                                        poly(Field::swell_height, {1.0, 0.01, 0.004, -0.0005}),
                                    });
}

void SynthConfig::validate() const {
  if (row_count < 1) throw UsageError("synth: row_count must be >= 1");
  if (!(duration_days > 0.0)) throw UsageError("synth: duration_days must be > 0");
  if (!(noise_rel_std >= 0.0) || !(rpm_noise_rel_std >= 0.0)) throw UsageError("synth: noise must be >= 0");
  if (!(fouling_drydock_gain >= 0.0) || !(fouling_polish_gain >= 0.0)) {
    throw UsageError("synth: fouling gains must be >= 0");
  }
  if (!(fouling_drydock_timescale_days > 0.0)) throw UsageError("synth: fouling timescale must be > 0");
  if (!(polish_period_days > 0.0)) throw UsageError("synth: polish period must be > 0");
  if (!(speed_max_kn >= kMinSpeedKnots) || !(speed_min_kn <= speed_max_kn)) {
    throw UsageError("synth: speed range lies below the 5 kn filter");
  }
  if (!(draught_min_m > 0.0) || !(draught_min_m <= draught_max_m)) throw UsageError("synth: bad draught range");
  if (!(sea_depth_min_m > 0.0) || !(sea_depth_min_m <= sea_depth_max_m)) throw UsageError("synth: bad depth range");
  if (!(wave_weibull_shape > 0.0 && wave_weibull_scale_m > 0.0 && swell_weibull_shape > 0.0 &&
        swell_weibull_scale_m > 0.0 && wind_rayleigh_sigma_mps > 0.0)) {
    throw UsageError("synth: weather distribution parameters must be > 0");
  }
  if (!(wave_seasonal_amplitude >= 0.0 && wave_seasonal_amplitude < 1.0)) {
    throw UsageError("synth: seasonal amplitude must lie in [0, 1)");
  }
  if (!(days_since_drydock_at_start >= 0.0)) throw UsageError("synth: days_since_drydock_at_start must be >= 0");
  if (paired_drydock_window_days) {
    if (drydock_dates.empty()) throw UsageError("synth: paired mode needs a dry-dock date");
    if (!(*paired_drydock_window_days > 0.0)) throw UsageError("synth: paired window must be > 0");
  }
}

double fouling_drift(const SynthConfig& c, double days_since_polish, double days_since_drydock) {
  return c.fouling_drydock_gain * (1.0 - std::exp(-days_since_drydock / c.fouling_drydock_timescale_days)) +
         c.fouling_polish_gain * (days_since_polish / 365.0);
}

std::pair<double, double> maintenance_ages(const SynthConfig& c, Timestamp t) {
  std::optional<Timestamp> last_dock;
  for (Timestamp d : c.drydock_dates) {
    if (d <= t && (!last_dock || d > *last_dock)) last_dock = d;
  }
  const double days_d =
      last_dock ? days_between(*last_dock, t) : c.days_since_drydock_at_start + days_between(c.start, t);

  // Latest polish at or before t: anchor + k * period.
  const double k = std::floor(days_between(c.polish_anchor, t) / c.polish_period_days);
  double days_p = days_between(add_days(c.polish_anchor, k * c.polish_period_days), t);
  if (last_dock) days_p = std::min(days_p, days_d);
  return {std::max(days_p, 0.0), std::max(days_d, 0.0)};
}

Dataset generate(const SynthConfig& config) {
  config.validate();
  Sampler sampler(config);
  Dataset ds;
  ds.provenance.source = "synthetic(seed=" + std::to_string(config.seed) + ")";
  ds.rows.reserve(config.row_count);

  if (config.paired_drydock_window_days) {
    const Timestamp dock = *std::min_element(config.drydock_dates.begin(), config.drydock_dates.end());
    const std::size_t pairs = (config.row_count + 1) / 2;
    for (std::size_t p = 0; p < pairs; ++p) {
      const double offset = sampler.uniform(1.0 / 24.0, *config.paired_drydock_window_days);
      const Timestamp before = add_days(dock, -offset);
      const Timestamp after = add_days(dock, offset);
      for (int attempt = 0;; ++attempt) {
        if (attempt == kMaxResample) throw UsageError("synth: cannot satisfy the power filter");
        const FeatureDraw f = sampler.draw(before);
        const auto [bp, bd] = maintenance_ages(config, before);
        const auto [ap, ad] = maintenance_ages(config, after);
        EnvironmentRecord rb = make_record(before, f, bp, bd);
        EnvironmentRecord ra = make_record(after, f, ap, ad);
        const bool ok_b = finish_record(config, sampler, rb);
        const bool ok_a = finish_record(config, sampler, ra);
        if (ok_b && ok_a) {
          ds.rows.push_back(std::move(rb));
          if (ds.rows.size() < config.row_count) ds.rows.push_back(std::move(ra));
          break;
        }
      }
    }
    std::stable_sort(ds.rows.begin(), ds.rows.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    return ds;
  }

  const double step_days = config.duration_days / static_cast<double>(config.row_count);
  for (std::size_t i = 0; i < config.row_count; ++i) {
    const Timestamp t = add_days(config.start, step_days * static_cast<double>(i));
    const auto [days_p, days_d] = maintenance_ages(config, t);
    for (int attempt = 0;; ++attempt) {
      if (attempt == kMaxResample) throw UsageError("synth: cannot satisfy the power filter");
      EnvironmentRecord r = make_record(t, sampler.draw(t), days_p, days_d);
      if (finish_record(config, sampler, r)) {
        ds.rows.push_back(std::move(r));
        break;
      }
    }
  }
  return ds;
}

BenchmarkConfigs drift_benchmark(std::uint64_t seed, std::size_t train_rows, std::size_t test_rows) {
  using namespace std::chrono;
  SynthConfig base;
  base.noise_rel_std = 0.03;
  base.rpm_noise_rel_std = 0.01;
  base.fouling_drydock_gain = 0.15;
  base.fouling_drydock_timescale_days = 365.0;
  base.fouling_polish_gain = 0.02;
  base.drydock_dates = {sys_days{year{2022} / 11 / 9}};
  base.days_since_drydock_at_start = 600.0;

  BenchmarkConfigs out{base, base};
  out.train.seed = seed;
  out.train.row_count = train_rows;
  out.train.start = sys_days{year{2022} / 1 / 1};
  out.train.duration_days = 365.0;
  out.test.seed = seed + 1000003;
  out.test.row_count = test_rows;
  out.test.start = sys_days{year{2023} / 1 / 1};
  out.test.duration_days = 365.0;
  return out;
}

BenchmarkConfigs heavy_weather_benchmark(std::uint64_t seed, std::size_t train_rows, std::size_t test_rows) {
  using namespace std::chrono;
  SynthConfig base;
  base.noise_rel_std = 0.03;
  base.rpm_noise_rel_std = 0.01;
  base.days_since_drydock_at_start = 200.0;

  BenchmarkConfigs out{base, base};
  out.test.seed = seed + 1000003;
  out.test.row_count = test_rows;
  out.test.start = sys_days{year{2020} / 7 / 28};
  out.test.duration_days = 11.0;
  out.test.wave_weibull_scale_m = 2.6;
  out.test.swell_weibull_scale_m = 1.8;
  out.test.wave_seasonal_amplitude = 0.0;

  out.train.seed = seed;
  out.train.row_count = train_rows;
  out.train.start = sys_days{year{2020} / 8 / 9};
  out.train.duration_days = 730.0;
  out.train.days_since_drydock_at_start = 200.0 + 12.0;
  return out;
}

}  // namespace shaftpower
