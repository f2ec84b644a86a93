#include "shaftpower/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

constexpr std::string_view kTimestampColumn = "timestamp";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_cell(std::string_view cell) {
  if (cell.empty()) return std::nullopt;
  if (cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Values violating the record invariants are treated like unparseable cells.
bool within_domain(Field f, double v) {
  switch (f) {
    case Field::wave_height:
    case Field::swell_height:
    case Field::wind_speed:
    case Field::days_since_polish:
    case Field::days_since_drydock:
      return v >= 0.0;
    case Field::draught:
      return v > 0.0;
    case Field::air_temp:
      return v > -273.15;
    default:
      return true;
  }
}

bool optional_column(Field f) {
  return f == Field::air_temp || f == Field::shaft_rpm || f == Field::shaft_power;
}

std::size_t count_cadence_gaps(const std::vector<EnvironmentRecord>& rows) {
  if (rows.size() < 3) return 0;
  std::vector<long long> steps;
  steps.reserve(rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    steps.push_back((rows[i].timestamp - rows[i - 1].timestamp).count());
  }
  std::vector<long long> sorted = steps;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const long long median = sorted[sorted.size() / 2];
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [&](long long s) { return s > 2 * median; }));
}

}  // namespace

Dataset parse_csv(std::string_view text, const CsvOptions& options, std::string source) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start < text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      auto line = text.substr(start, nl - start);
      if (!trim(line).empty()) lines.push_back(line);
      start = nl + 1;
    }
  }
  if (lines.empty()) throw UsageError("CSV input '" + source + "' is empty");

  // Header: map foreign names, then locate schema columns.
  const auto header_cells = split_line(lines.front());
  std::optional<std::size_t> ts_col;
  std::array<std::optional<std::size_t>, kFieldCount> col{};
  for (std::size_t i = 0; i < header_cells.size(); ++i) {
    std::string name(header_cells[i]);
    if (auto it = options.column_map.find(name); it != options.column_map.end()) name = it->second;
    if (name == kTimestampColumn) {
      ts_col = i;
      continue;
    }
    for (Field f : kCsvFields) {
      if (column_name(f) == name) col[static_cast<std::size_t>(f)] = i;
    }
  }
  if (!ts_col) throw SchemaError("missing mandatory column 'timestamp'");
  for (Field f : kCsvFields) {
    if (!optional_column(f) && !col[static_cast<std::size_t>(f)]) {
      throw SchemaError("missing mandatory column '" + std::string(column_name(f)) + "'");
    }
  }

  const bool has_air = col[static_cast<std::size_t>(Field::air_temp)].has_value();
  const double angle_scale = options.angles == AngleUnit::degrees ? std::numbers::pi / 180.0 : 1.0;

  Dataset ds;
  ds.provenance.source = std::move(source);
  ds.rows.reserve(lines.size() - 1);
  std::size_t unparsed_cells = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto cells = split_line(lines[li]);
    if (*ts_col >= cells.size()) {
      throw SchemaError("row " + std::to_string(li) + ": missing timestamp");
    }
    EnvironmentRecord r;
    try {
      r.timestamp = parse_timestamp(cells[*ts_col]);
    } catch (const SchemaError& e) {
      throw SchemaError("row " + std::to_string(li) + ": " + e.what());
    }
    for (Field f : kCsvFields) {
      const auto& c = col[static_cast<std::size_t>(f)];
      if (!c) {
        r.mark_missing(f);
        continue;
      }
      std::optional<double> v = *c < cells.size() ? parse_cell(cells[*c]) : std::nullopt;
      if (v && is_direction(f)) v = normalize_angle(*v * angle_scale);
      if (v && !within_domain(f, *v)) v.reset();
      if (v) {
        r.set(f, *v);
      } else {
        if (*c < cells.size() && !cells[*c].empty()) ++unparsed_cells;
        r.mark_missing(f);
      }
    }
    if (!has_air) {
      if (options.air_temp_fallback == AirTempFallback::constant) {
        r.set(Field::air_temp, options.air_temp_constant_c);
      } else if (auto t = r.get(Field::sea_temp)) {
        r.set(Field::air_temp, *t);
      }
    }
    ds.rows.push_back(std::move(r));
  }

  if (!std::is_sorted(ds.rows.begin(), ds.rows.end(),
                      [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; })) {
    std::stable_sort(ds.rows.begin(), ds.rows.end(),
                     [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    ds.provenance.notes.push_back("rows re-ordered by timestamp");
  }
  if (!has_air) {
    ds.provenance.notes.push_back(options.air_temp_fallback == AirTempFallback::constant
                                      ? "air_temp_c absent; constant fallback " +
                                            format_number(options.air_temp_constant_c) + " degC"
                                      : "air_temp_c absent; sea temperature used as proxy");
  }
  if (unparsed_cells > 0) {
    ds.provenance.notes.push_back(std::to_string(unparsed_cells) + " unparseable or out-of-domain cells");
  }
  ds.provenance.cadence_gaps = count_cadence_gaps(ds.rows);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), options, path.string());
}

std::string to_csv(const Dataset& dataset, AngleUnit angles) {
  const double angle_scale = angles == AngleUnit::degrees ? 180.0 / std::numbers::pi : 1.0;
  std::string out(kTimestampColumn);
  for (Field f : kCsvFields) {
    out += ',';
    out += column_name(f);
  }
  out += '\n';
  for (const auto& r : dataset.rows) {
    out += format_timestamp(r.timestamp);
    for (Field f : kCsvFields) {
      out += ',';
      if (auto v = r.get(f)) out += format_number(is_direction(f) ? *v * angle_scale : *v);
    }
    out += '\n';
  }
  return out;
}

void export_csv(const Dataset& dataset, const std::filesystem::path& path, AngleUnit angles) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << to_csv(dataset, angles);
  if (!out) throw std::runtime_error("I/O error writing '" + path.string() + "'");
}

Dataset preprocess(const Dataset& raw) {
  Dataset out;
  out.provenance = raw.provenance;
  FilterLog log;
  log.input = raw.rows.size();
  for (const auto& r : raw.rows) {
    if (r.has_missing_values()) {
      ++log.missing;
    } else if (r.speed_through_water < kMinSpeedKnots) {
      ++log.speed;
    } else if (*r.shaft_power < kMinShaftPowerKw) {
      ++log.power;
    } else {
      out.rows.push_back(r);
    }
  }
  log.kept = out.rows.size();
  out.provenance.filters.push_back(log);
  if (out.rows.empty()) throw UsageError("dataset '" + raw.provenance.source + "' is empty after preprocessing");
  return out;
}

std::pair<Dataset, Dataset> chronological_split(const Dataset& dataset, Timestamp boundary,
                                                SplitOrder order) {
  Dataset before, after;
  before.provenance = dataset.provenance;
  after.provenance = dataset.provenance;
  for (const auto& r : dataset.rows) {
    (r.timestamp < boundary ? before : after).rows.push_back(r);
  }
  if (before.empty() || after.empty()) {
    throw UsageError("split boundary " + format_timestamp(boundary) + " leaves one side empty");
  }
  if (order == SplitOrder::train_first) return {std::move(before), std::move(after)};
  return {std::move(after), std::move(before)};
}

std::vector<double> column(const std::vector<EnvironmentRecord>& rows, Field field) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto v = rows[i].get(field);
    if (!v) {
      throw SchemaError("row " + std::to_string(i) + ": missing value for '" +
                        std::string(column_name(field)) + "'");
    }
    out.push_back(*v);
  }
  return out;
}

}  // namespace shaftpower
