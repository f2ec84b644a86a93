#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shaftpower/record.hpp"

namespace shaftpower {

enum class AngleUnit { radians, degrees };

/// Where t_air comes from when the CSV has no air_temp_c column.
enum class AirTempFallback { constant, sea_temp };

struct CsvOptions {
  AngleUnit angles = AngleUnit::radians;
  /// foreign header -> schema header
  std::map<std::string, std::string> column_map;
  AirTempFallback air_temp_fallback = AirTempFallback::constant;
  double air_temp_constant_c = 15.0;
};

/// Rows dropped by each preprocessing rule. A row is charged to the first
/// rule it violates, in the order missing, speed, power.
struct FilterLog {
  std::size_t input = 0;
  std::size_t kept = 0;
  std::size_t missing = 0;
  std::size_t speed = 0;
  std::size_t power = 0;

  bool operator==(const FilterLog&) const = default;
};

struct Provenance {
  std::string source;
  std::vector<std::string> notes;
  std::vector<FilterLog> filters;
  /// Consecutive timestamps further apart than twice the median cadence.
  std::size_t cadence_gaps = 0;
};

struct Dataset {
  std::vector<EnvironmentRecord> rows;
  Provenance provenance;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
};

inline constexpr double kMinSpeedKnots = 5.0;
inline constexpr double kMinShaftPowerKw = 500.0;

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
Dataset parse_csv(std::string_view text, const CsvOptions& options = {},
                  std::string source = "<memory>");

/// Writes the schema columns with 17 significant digits; missing cells are left empty.
void export_csv(const Dataset& dataset, const std::filesystem::path& path,
                AngleUnit angles = AngleUnit::radians);
std::string to_csv(const Dataset& dataset, AngleUnit angles = AngleUnit::radians);

/// Keeps rows with V >= 5 kn, shaft power >= 500 kW and no missing values.
Dataset preprocess(const Dataset& raw);

enum class SplitOrder {
  train_first,  ///< train strictly before the boundary, test at/after it
  test_first,   ///< test strictly before the boundary, train at/after it
};

/// Splits at `boundary`; both halves keep time order.
std::pair<Dataset, Dataset> chronological_split(const Dataset& dataset, Timestamp boundary,
                                                SplitOrder order = SplitOrder::train_first);

/// Column of `field` over all rows (throws SchemaError on a missing cell).
std::vector<double> column(const std::vector<EnvironmentRecord>& rows, Field field);

}  // namespace shaftpower
