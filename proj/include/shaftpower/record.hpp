#pragma once

#include <array>
#include <bitset>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace shaftpower {

using Timestamp = std::chrono::sys_seconds;

/// Every numeric column an EnvironmentRecord can carry.
enum class Field : std::uint8_t {
  speed_through_water,
  draught,
  sea_depth,
  sea_temp,
  air_temp,
  wave_height,
  swell_height,
  wave_dir,
  swell_dir,
  wind_dir,
  wind_speed,
  days_since_polish,
  days_since_drydock,
  shaft_rpm,
  shaft_power,
  predicted_rpm,
};

inline constexpr std::size_t kFieldCount = 16;

/// Columns of the CSV schema, in file order (predicted_rpm is derived, never read from disk).
inline constexpr std::array<Field, 15> kCsvFields = {
    Field::speed_through_water, Field::draught,       Field::sea_depth,         Field::sea_temp,
    Field::air_temp,            Field::wave_height,   Field::swell_height,      Field::wave_dir,
    Field::swell_dir,           Field::wind_dir,      Field::wind_speed,        Field::days_since_polish,
    Field::days_since_drydock,  Field::shaft_rpm,     Field::shaft_power,
};

/// CSV column header for a field.
std::string_view column_name(Field field);
/// Short identifier used in JSON documents and configs ("V", "T", "v_wind", ...).
std::string_view field_id(Field field);
std::optional<Field> field_from_id(std::string_view id);
bool is_direction(Field field);

using FieldMask = std::bitset<kFieldCount>;

/// One timestamped row of sensor, weather and maintenance-age features.
///
/// Missing cells are flagged in `missing` rather than encoded as sentinel
/// numbers; the numeric slot of a missing field is held at zero and must not be read.
struct EnvironmentRecord {
  Timestamp timestamp{};
  double speed_through_water = 0.0;  // knots
  double draught = 0.0;              // m
  double sea_depth = 0.0;            // m
  double sea_temp = 0.0;             // deg C
  double air_temp = 0.0;             // deg C
  double wave_height = 0.0;          // m
  double swell_height = 0.0;         // m
  double wave_dir = 0.0;             // rad, relative to heading, (-pi, pi]
  double swell_dir = 0.0;
  double wind_dir = 0.0;
  double wind_speed = 0.0;           // m/s
  double days_since_polish = 0.0;
  double days_since_drydock = 0.0;
  std::optional<double> shaft_rpm;
  std::optional<double> shaft_power;    // kW
  std::optional<double> predicted_rpm;  // attached by the RPM model
  FieldMask missing{};

  /// Value of `field`, or nullopt when the cell is missing.
  std::optional<double> get(Field field) const;
  /// Value of `field`; throws SchemaError naming the field when missing.
  double require(Field field) const;
  void set(Field field, double value);
  void mark_missing(Field field);
  bool has_missing_values() const;

  bool operator==(const EnvironmentRecord&) const = default;
};

/// Wraps an angle to (-pi, pi]. Already-normalised inputs are returned unchanged.
double normalize_angle(double radians);

Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

/// Fixed 17-significant-digit representation; parses back to the identical double.
std::string format_number(double value);

}  // namespace shaftpower
