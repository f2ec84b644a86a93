#pragma once

// The EF / NN / PGNN comparison: EF and the RPM model are fitted once on the
// training rows, then NN and PGNN are trained for `repeats` seeds
// (base_seed + i) and everything is scored on the test rows.

#include <cstdint>
#include <string>
#include <vector>

#include "shaftpower/ef_fit.hpp"
#include "shaftpower/metrics.hpp"
#include "shaftpower/rpm_poly.hpp"
#include "shaftpower/serialization.hpp"
#include "shaftpower/train.hpp"

namespace shaftpower {

struct CompareConfig {
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;
  double lambda = 0.1;
  std::string dataset = "synthetic";
  TrainConfig train;  // lambda and seed are overridden per run
  EfFitConfig ef;
  FeatureGroups groups = FeatureGroups::defaults();
  std::vector<Field> rpm_features = default_rpm_features();
  bool select_rpm_features = false;

  void validate() const;
};

struct SeedResult {
  std::uint64_t seed = 0;
  MetricSet nn;
  MetricSet pgnn;
  int nn_best_epoch = 0;
  int pgnn_best_epoch = 0;
};

struct CompareResult {
  EfFitResult ef;
  MultiplicativePolyModel rpm;
  MetricSet ef_metrics;
  std::vector<SeedResult> seeds;
  std::vector<EvalReport> reports;  // EF, NN, PGNN

  // Test-set series; network columns are from the first seed.
  std::vector<Timestamp> timestamps;
  std::vector<double> actual, ef_pred, nn_pred, pgnn_pred;
};

CompareResult compare(const std::vector<EnvironmentRecord>& train, const std::vector<EnvironmentRecord>& test,
                      const CompareConfig& config);

std::string report_text(const CompareResult& r);
Json report_json(const CompareResult& r, const CompareConfig& config);
/// One row per seed and method: seed,method,mae,rmse,mape,r2.
std::string raw_results_csv(const CompareResult& r);
/// timestamp,actual,ef,nn,pgnn
std::string timeseries_csv(const CompareResult& r);

}  // namespace shaftpower
