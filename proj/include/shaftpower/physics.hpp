#pragma once

// Empirical resistance model: calm water, wind and wave resistance and the
// resulting physical power estimate.
//
// All functions are templated on the coefficient scalar so that the same code
// can be evaluated with plain doubles or with Eigen::AutoDiffScalar when the
// derivatives with respect to the learnable coefficients are needed.
// Environmental inputs (speed, draught, angles, ...) are always plain doubles.

#include <cmath>
#include <numbers>
#include <string>
#include <type_traits>

#include "shaftpower/error.hpp"
#include "shaftpower/record.hpp"

namespace shaftpower {

namespace detail {

template <typename Scalar>
double to_double(const Scalar& x) {
  if constexpr (std::is_arithmetic_v<Scalar>) {
    return static_cast<double>(x);
  } else {
    return static_cast<double>(x.value());
  }
}

inline void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + " must be finite");
}

}  // namespace detail

inline constexpr double kDefaultWaveExponent = 2.5;
inline constexpr double kDefaultWaterDensity = 1.0;
inline constexpr double kAbsoluteZeroCelsius = -273.15;

/// The seven learnable resistance coefficients plus the fixed constants.
///
/// Invariants (checked on construction): c > 0, f_g >= 0, 0 <= f_c <= 1,
/// every value finite, gamma > 0, water_density > 0.
template <typename Scalar>
class BasicResistanceCoefficients {
 public:
  struct Values {
    Scalar a{0};
    Scalar b{0};
    Scalar c{1};
    Scalar f_c{0};
    Scalar f_h{0};
    Scalar f_s{0};
    Scalar f_g{0};
    double gamma = kDefaultWaveExponent;
    double water_density = kDefaultWaterDensity;
  };

  BasicResistanceCoefficients() : BasicResistanceCoefficients(Values{}) {}

  explicit BasicResistanceCoefficients(const Values& v) : v_(v) {
    using detail::to_double;
    for (double x : {to_double(v.a), to_double(v.b), to_double(v.c), to_double(v.f_c),
                     to_double(v.f_h), to_double(v.f_s), to_double(v.f_g), v.gamma, v.water_density}) {
      detail::require_finite(x, "resistance coefficient");
    }
    if (!(to_double(v.c) > 0.0)) throw DomainError("calm-water scale c must be > 0");
    if (!(to_double(v.f_g) >= 0.0)) throw DomainError("geometric wave factor f_g must be >= 0");
    if (!(to_double(v.f_c) >= 0.0 && to_double(v.f_c) <= 1.0)) {
      throw DomainError("cylinder factor f_c must lie in [0, 1]");
    }
    if (!(v.gamma > 0.0)) throw DomainError("wave exponent gamma must be > 0");
    if (!(v.water_density > 0.0)) throw DomainError("water density must be > 0");
  }

  const Scalar& a() const { return v_.a; }
  const Scalar& b() const { return v_.b; }
  const Scalar& c() const { return v_.c; }
  const Scalar& f_c() const { return v_.f_c; }
  const Scalar& f_h() const { return v_.f_h; }
  const Scalar& f_s() const { return v_.f_s; }
  const Scalar& f_g() const { return v_.f_g; }
  double gamma() const { return v_.gamma; }
  double water_density() const { return v_.water_density; }
  const Values& values() const { return v_; }

 private:
  Values v_;
};

using ResistanceCoefficients = BasicResistanceCoefficients<double>;

template <typename Scalar>
struct BasicResistanceBreakdown {
  Scalar calm{0};
  Scalar wind{0};
  Scalar wave{0};
  Scalar total_power{0};
};

using ResistanceBreakdown = BasicResistanceBreakdown<double>;

/// Dimensionless air density 1 / (1 + t_air / 273.15).
inline double air_density(double air_temp_c) {
  detail::require_finite(air_temp_c, "air temperature");
  if (!(air_temp_c > kAbsoluteZeroCelsius)) {
    throw DomainError("air temperature must exceed -273.15 degC");
  }
  return 1.0 / (1.0 + air_temp_c / 273.15);
}

/// c (a + T) (b + V)^3 / V
template <typename Scalar>
Scalar calm_water_resistance(const BasicResistanceCoefficients<Scalar>& k, double draught,
                             double speed) {
  detail::require_finite(draught, "draught");
  detail::require_finite(speed, "speed through water");
  if (!(speed > 0.0)) throw DomainError("speed through water must be > 0");
  const Scalar lever = k.a() + draught;
  const Scalar flow = k.b() + speed;
  return k.c() * lever * flow * flow * flow / speed;
}

/// Directional drag coefficient C_x (includes the air-density factor).
template <typename Scalar>
Scalar wind_drag_coefficient(const BasicResistanceCoefficients<Scalar>& k, double air_temp_c,
                             double wind_dir) {
  detail::require_finite(wind_dir, "wind direction");
  const double rho = air_density(air_temp_c);
  const double abs_cos = std::abs(std::cos(wind_dir));
  const double abs_sin = std::abs(std::sin(wind_dir));
  return rho * (k.f_c() * k.f_h() + (1.0 - k.f_c()) * (k.f_h() * abs_cos + k.f_s() * abs_sin));
}

/// Signed wind resistance C_x v^2 cos(d); negative for following winds.
template <typename Scalar>
Scalar wind_resistance(const BasicResistanceCoefficients<Scalar>& k, double air_temp_c,
                       double wind_dir, double wind_speed) {
  detail::require_finite(wind_speed, "wind speed");
  if (!(wind_speed >= 0.0)) throw DomainError("wind speed must be >= 0");
  return wind_drag_coefficient(k, air_temp_c, wind_dir) * (wind_speed * wind_speed * std::cos(wind_dir));
}

/// h^gamma f_g d_water
template <typename Scalar>
Scalar head_wave_resistance(const BasicResistanceCoefficients<Scalar>& k, double wave_height) {
  detail::require_finite(wave_height, "wave height");
  if (!(wave_height >= 0.0)) throw DomainError("wave height must be >= 0");
  return k.f_g() * (std::pow(wave_height, k.gamma()) * k.water_density());
}

/// Angular reduction factor 0.667 + 0.333 cos(d) applied to the head-wave resistance.
inline double wave_direction_factor(double wave_dir) {
  detail::require_finite(wave_dir, "wave direction");
  return 0.667 + 0.333 * std::cos(wave_dir);
}

template <typename Scalar>
Scalar wave_resistance(const BasicResistanceCoefficients<Scalar>& k, double wave_height,
                       double wave_dir) {
  return head_wave_resistance(k, wave_height) * wave_direction_factor(wave_dir);
}

/// Resistance components and total power (R_calm + R_wind + R_wave) * V for one record.
template <typename Scalar>
BasicResistanceBreakdown<Scalar> physical_power(const BasicResistanceCoefficients<Scalar>& k,
                                                const EnvironmentRecord& r) {
  BasicResistanceBreakdown<Scalar> out;
  out.calm = calm_water_resistance(k, r.draught, r.speed_through_water);
  out.wind = wind_resistance(k, r.air_temp, r.wind_dir, r.wind_speed);
  out.wave = wave_resistance(k, r.wave_height, r.wave_dir);
  out.total_power = (out.calm + out.wind + out.wave) * r.speed_through_water;
  return out;
}

}  // namespace shaftpower
