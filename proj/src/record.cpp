#include "shaftpower/record.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

struct FieldInfo {
  Field field;
  std::string_view column;
  std::string_view id;
};

constexpr std::array<FieldInfo, kFieldCount> kFieldInfo = {{
    {Field::speed_through_water, "speed_through_water_kn", "V"},
    {Field::draught, "draught_m", "T"},
    {Field::sea_depth, "sea_depth_m", "depth_sea"},
    {Field::sea_temp, "sea_temp_c", "t_sea"},
    {Field::air_temp, "air_temp_c", "t_air"},
    {Field::wave_height, "wave_height_m", "h_wave"},
    {Field::swell_height, "swell_height_m", "h_swell"},
    {Field::wave_dir, "wave_dir_rel", "d_wave"},
    {Field::swell_dir, "swell_dir_rel", "d_swell"},
    {Field::wind_dir, "wind_dir_rel", "d_wind"},
    {Field::wind_speed, "wind_speed_mps", "v_wind"},
    {Field::days_since_polish, "days_since_propeller_polish", "days_p"},
    {Field::days_since_drydock, "days_since_dry_dock", "days_d"},
    {Field::shaft_rpm, "shaft_rpm", "rpm"},
    {Field::shaft_power, "shaft_power_kw", "power"},
    {Field::predicted_rpm, "predicted_rpm", "predicted_rpm"},
}};

const FieldInfo& info(Field f) { return kFieldInfo[static_cast<std::size_t>(f)]; }

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw SchemaError("malformed timestamp '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string_view column_name(Field field) { return info(field).column; }
std::string_view field_id(Field field) { return info(field).id; }

std::optional<Field> field_from_id(std::string_view id) {
  for (const auto& fi : kFieldInfo) {
    if (fi.id == id || fi.column == id) return fi.field;
  }
  return std::nullopt;
}

bool is_direction(Field field) {
  return field == Field::wave_dir || field == Field::swell_dir || field == Field::wind_dir;
}

std::optional<double> EnvironmentRecord::get(Field field) const {
  switch (field) {
    case Field::shaft_rpm: return shaft_rpm;
    case Field::shaft_power: return shaft_power;
    case Field::predicted_rpm: return predicted_rpm;
    default: break;
  }
  if (missing.test(static_cast<std::size_t>(field))) return std::nullopt;
  switch (field) {
    case Field::speed_through_water: return speed_through_water;
    case Field::draught: return draught;
    case Field::sea_depth: return sea_depth;
    case Field::sea_temp: return sea_temp;
    case Field::air_temp: return air_temp;
    case Field::wave_height: return wave_height;
    case Field::swell_height: return swell_height;
    case Field::wave_dir: return wave_dir;
    case Field::swell_dir: return swell_dir;
    case Field::wind_dir: return wind_dir;
    case Field::wind_speed: return wind_speed;
    case Field::days_since_polish: return days_since_polish;
    case Field::days_since_drydock: return days_since_drydock;
    default: return std::nullopt;
  }
}

double EnvironmentRecord::require(Field field) const {
  auto v = get(field);
  if (!v) throw SchemaError("missing value for field '" + std::string(column_name(field)) + "'");
  return *v;
}

void EnvironmentRecord::set(Field field, double value) {
  missing.reset(static_cast<std::size_t>(field));
  switch (field) {
    case Field::speed_through_water: speed_through_water = value; break;
    case Field::draught: draught = value; break;
    case Field::sea_depth: sea_depth = value; break;
    case Field::sea_temp: sea_temp = value; break;
    case Field::air_temp: air_temp = value; break;
    case Field::wave_height: wave_height = value; break;
    case Field::swell_height: swell_height = value; break;
    case Field::wave_dir: wave_dir = value; break;
    case Field::swell_dir: swell_dir = value; break;
    case Field::wind_dir: wind_dir = value; break;
    case Field::wind_speed: wind_speed = value; break;
    case Field::days_since_polish: days_since_polish = value; break;
    case Field::days_since_drydock: days_since_drydock = value; break;
    case Field::shaft_rpm: shaft_rpm = value; break;
    case Field::shaft_power: shaft_power = value; break;
    case Field::predicted_rpm: predicted_rpm = value; break;
  }
}

void EnvironmentRecord::mark_missing(Field field) {
  switch (field) {
    case Field::shaft_rpm: shaft_rpm.reset(); return;
    case Field::shaft_power: shaft_power.reset(); return;
    case Field::predicted_rpm: predicted_rpm.reset(); return;
    default:
      set(field, 0.0);  // keeps equality independent of stale values
      missing.set(static_cast<std::size_t>(field));
  }
}

bool EnvironmentRecord::has_missing_values() const {
  return missing.any() || !shaft_rpm || !shaft_power;
}

double normalize_angle(double radians) {
  constexpr double pi = std::numbers::pi;
  if (radians > -pi && radians <= pi) return radians;
  double r = std::remainder(radians, 2.0 * pi);  // [-pi, pi]
  if (r <= -pi) r += 2.0 * pi;
  return r;
}

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DD[(T| )HH:MM[:SS]][Z]
  std::string_view s = text;
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.remove_suffix(1);
  if (s.size() < 10 || s[4] != '-' || s[7] != '-') {
    throw SchemaError("malformed timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_int(s.substr(0, 4), text)},
                           month{static_cast<unsigned>(parse_int(s.substr(5, 2), text))},
                           day{static_cast<unsigned>(parse_int(s.substr(8, 2), text))}};
  if (!ymd.ok()) throw SchemaError("invalid calendar date '" + std::string(text) + "'");
  int hh = 0, mm = 0, ss = 0;
  if (s.size() > 10) {
    if ((s[10] != 'T' && s[10] != ' ') || s.size() < 16 || s[13] != ':') {
      throw SchemaError("malformed timestamp '" + std::string(text) + "'");
    }
    hh = parse_int(s.substr(11, 2), text);
    mm = parse_int(s.substr(14, 2), text);
    if (s.size() > 16) {
      if (s.size() != 19 || s[16] != ':') throw SchemaError("malformed timestamp '" + std::string(text) + "'");
      ss = parse_int(s.substr(17, 2), text);
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) throw SchemaError("invalid time of day '" + std::string(text) + "'");
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_start = floor<days>(ts);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{ts - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::string format_number(double value) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace shaftpower
