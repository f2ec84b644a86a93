#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "shaftpower/data.hpp"
#include "shaftpower/error.hpp"

namespace shaftpower {
namespace {

const std::filesystem::path kData = SHAFTPOWER_TEST_DATA;
constexpr double kPi = std::numbers::pi;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Preprocess, FixtureCounts) {
  const Dataset raw = load_csv(kData / "filters.csv");
  ASSERT_EQ(raw.size(), 10u);
  const Dataset clean = preprocess(raw);
  ASSERT_EQ(clean.provenance.filters.size(), 1u);
  const FilterLog expected{.input = 10, .kept = 3, .missing = 4, .speed = 2, .power = 1};
  EXPECT_EQ(clean.provenance.filters[0], expected);
  // boundary values 5 kn / 500 kW are kept
  EXPECT_EQ(clean.rows[1].speed_through_water, 5.0);
  EXPECT_EQ(*clean.rows[1].shaft_power, 500.0);
  EXPECT_EQ(clean.rows[2].wind_dir, 2.5);
}

TEST(Preprocess, IdempotentAndConservesRows) {
  const Dataset once = preprocess(load_csv(kData / "filters.csv"));
  const Dataset twice = preprocess(once);
  EXPECT_EQ(twice.rows, once.rows);
  for (const auto& log : twice.provenance.filters) {
    EXPECT_EQ(log.kept + log.missing + log.speed + log.power, log.input);
  }
  EXPECT_EQ(twice.provenance.filters.back().kept, twice.provenance.filters.back().input);
}

TEST(Preprocess, BadCellsBecomeMissing) {
  const Dataset raw = load_csv(kData / "filters.csv");
  EXPECT_FALSE(raw.rows[7].get(Field::wind_speed).has_value());
  EXPECT_FALSE(raw.rows[8].get(Field::wave_height).has_value());
  EXPECT_FALSE(raw.rows[4].get(Field::wave_height).has_value());
  bool noted = false;
  for (const auto& n : raw.provenance.notes) noted = noted || n.find("2 unparseable") != std::string::npos;
  EXPECT_TRUE(noted);
}

TEST(Preprocess, EmptyResultIsAnError) {
  const std::string header = read_file(kData / "filters.csv").substr(0, read_file(kData / "filters.csv").find('\n'));
  const std::string text =
      header + "\n2023-01-01T00:00:00Z,3.0,10,300,15,14,1,0.5,0.1,0.2,0.3,6,10,100,20,300\n";
  EXPECT_THROW(preprocess(parse_csv(text)), UsageError);
}

TEST(Csv, DegreesAndAirTempFallback) {
  const Dataset d = load_csv(kData / "degrees_no_air.csv", {.angles = AngleUnit::degrees});
  ASSERT_EQ(d.size(), 2u);
  // rows arrive out of order
  EXPECT_EQ(format_timestamp(d.rows[0].timestamp), "2023-02-01T00:00:00Z");
  EXPECT_NEAR(d.rows[0].wave_dir, kPi / 2, 1e-15);
  EXPECT_NEAR(d.rows[0].swell_dir, 0.0, 1e-15);
  EXPECT_NEAR(d.rows[0].wind_dir, kPi / 4, 1e-15);
  EXPECT_NEAR(d.rows[1].wave_dir, kPi, 1e-15);
  EXPECT_NEAR(d.rows[1].swell_dir, -kPi / 2, 1e-15);
  EXPECT_NEAR(d.rows[1].wind_dir, -kPi / 2, 1e-15);
  EXPECT_EQ(d.rows[0].air_temp, 15.0);
  EXPECT_EQ(d.provenance.notes.size(), 2u);

  const Dataset s = load_csv(kData / "degrees_no_air.csv",
                             {.angles = AngleUnit::degrees, .air_temp_fallback = AirTempFallback::sea_temp});
  EXPECT_EQ(s.rows[0].air_temp, 12.5);
  EXPECT_EQ(s.rows[1].air_temp, 11.5);
}

TEST(Csv, ColumnMap) {
  std::string text = read_file(kData / "filters.csv");
  text.replace(text.find("wind_speed_mps"), 14, "ws");
  EXPECT_THROW(parse_csv(text), SchemaError);
  const Dataset d = parse_csv(text, {.column_map = {{"ws", "wind_speed_mps"}}});
  EXPECT_EQ(d.rows[0].wind_speed, 6.0);
}

TEST(Csv, SchemaErrors) {
  std::string text = read_file(kData / "filters.csv");
  std::string no_draught = text;
  no_draught.replace(no_draught.find("draught_m"), 9, "x");
  try {
    parse_csv(no_draught);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("draught_m"), std::string::npos);
  }
  std::string no_ts = text;
  no_ts.replace(0, 9, "time");
  EXPECT_THROW(parse_csv(no_ts), SchemaError);
  EXPECT_THROW(parse_csv(""), UsageError);
  EXPECT_THROW(load_csv(kData / "does_not_exist.csv"), UsageError);
  std::string bad_ts = text;
  bad_ts.replace(bad_ts.find("2023-01-01T00:15"), 10, "2023-13-01");
  EXPECT_THROW(parse_csv(bad_ts), SchemaError);
}

Dataset random_dataset(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  Timestamp t = parse_timestamp("2022-06-01T00:00:00Z");
  for (int i = 0; i < n; ++i) {
    EnvironmentRecord r;
    r.timestamp = t + std::chrono::minutes(15 * i);
    for (Field f : kCsvFields) {
      double v = is_direction(f) ? normalize_angle((u(rng) * 2 - 1) * kPi) : u(rng) * 30.0 + 0.1;
      r.set(f, v);
    }
    if (i % 37 == 5) r.mark_missing(Field::sea_depth);
    if (i % 53 == 7) r.shaft_rpm.reset();
    d.rows.push_back(r);
  }
  return d;
}

TEST(Csv, RoundTripIsExact) {
  const Dataset d = random_dataset(1000, 42);
  for (AngleUnit unit : {AngleUnit::radians, AngleUnit::degrees}) {
    const Dataset back = parse_csv(to_csv(d, unit), {.angles = unit});
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto& a = d.rows[i];
      const auto& b = back.rows[i];
      EXPECT_EQ(a.timestamp, b.timestamp);
      EXPECT_EQ(a.missing, b.missing);
      EXPECT_EQ(a.shaft_rpm, b.shaft_rpm);
      for (Field f : kCsvFields) {
        const auto x = a.get(f), y = b.get(f);
        ASSERT_EQ(x.has_value(), y.has_value());
        if (!x) continue;
        if (unit == AngleUnit::radians || !is_direction(f)) {
          EXPECT_EQ(*x, *y);
        } else {
          EXPECT_NEAR(*x, *y, 1e-14);
        }
      }
    }
  }
}

TEST(Csv, EmptyDatasetIsHeaderOnly) {
  const std::string text = to_csv(Dataset{});
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
  EXPECT_EQ(text.rfind("timestamp,", 0), 0u);
  const Dataset d = random_dataset(10, 8);
  EXPECT_EQ(to_csv(parse_csv(to_csv(d))), to_csv(d));
}

TEST(Csv, ExportWritesFile) {
  const Dataset d = random_dataset(20, 1);
  const auto path = std::filesystem::temp_directory_path() / "shaftpower_export_test.csv";
  export_csv(d, path);
  EXPECT_EQ(read_file(path), to_csv(d));
  EXPECT_EQ(load_csv(path).rows, d.rows);
  std::filesystem::remove(path);
}

TEST(Split, ChronologicalBothOrders) {
  const Dataset d = random_dataset(100, 2);
  const Timestamp boundary = d.rows[30].timestamp;
  const auto [train, test] = chronological_split(d, boundary);
  EXPECT_EQ(train.size(), 30u);
  EXPECT_EQ(test.size(), 70u);
  EXPECT_LT(train.rows.back().timestamp, boundary);
  EXPECT_EQ(test.rows.front().timestamp, boundary);

  const auto [train2, test2] = chronological_split(d, boundary, SplitOrder::test_first);
  EXPECT_EQ(train2.size(), 70u);
  EXPECT_EQ(test2.size(), 30u);
  EXPECT_EQ(train2.rows.front().timestamp, boundary);

  EXPECT_THROW(chronological_split(d, d.rows.front().timestamp), UsageError);
  EXPECT_THROW(chronological_split(d, d.rows.back().timestamp + std::chrono::seconds(1)), UsageError);
}

TEST(Column, ThrowsOnMissing) {
  const Dataset d = random_dataset(10, 3);
  EXPECT_EQ(column(d.rows, Field::draught).size(), 10u);
  EXPECT_THROW(column(d.rows, Field::sea_depth), SchemaError);
}

}  // namespace
}  // namespace shaftpower
