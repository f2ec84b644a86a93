#include "shaftpower/experiment.hpp"

#include <sstream>

#include "shaftpower/data.hpp"
#include "shaftpower/error.hpp"

namespace shaftpower {

void CompareConfig::validate() const {
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  if (!(lambda >= 0.0)) throw UsageError("lambda must be >= 0");
  train.validate();
  ef.validate();
  groups.validate();
}

CompareResult compare(const std::vector<EnvironmentRecord>& train_rows, const std::vector<EnvironmentRecord>& test_rows,
                      const CompareConfig& config) {
  config.validate();
  if (train_rows.empty() || test_rows.empty()) throw UsageError("compare needs non-empty train and test sets");

  CompareResult r;
  std::vector<Field> features = config.rpm_features;
  if (config.select_rpm_features) {
    FeatureSelectionConfig sel;
    features = greedy_feature_selection(train_rows, features, sel);
  }
  r.rpm = fit_rpm_als(train_rows, features).model;
  r.ef = fit_ef(train_rows, config.ef);

  std::vector<EnvironmentRecord> test = test_rows;
  attach_predicted_rpm(r.rpm, test);
  r.actual = column(test, Field::shaft_power);
  r.ef_pred = predict_ef(r.ef.coefficients, test);
  r.ef_metrics = evaluate(r.actual, r.ef_pred);
  for (const auto& row : test) r.timestamps.push_back(row.timestamp);

  std::vector<MetricSet> ef_runs, nn_runs, pgnn_runs;
  for (std::size_t i = 0; i < config.repeats; ++i) {
    SeedResult s;
    s.seed = config.base_seed + i;
    TrainConfig tc = config.train;
    tc.seed = s.seed;

    tc.lambda = 0.0;
    const auto nn = train(train_rows, r.rpm, std::nullopt, config.groups, tc);
    const auto nn_pred = predict(nn, test);
    s.nn = evaluate(r.actual, nn_pred);
    s.nn_best_epoch = nn.best_epoch;

    tc.lambda = config.lambda;
    const auto pgnn = train(train_rows, r.rpm, r.ef.coefficients, config.groups, tc);
    const auto pgnn_pred = predict(pgnn, test);
    s.pgnn = evaluate(r.actual, pgnn_pred);
    s.pgnn_best_epoch = pgnn.best_epoch;

    if (i == 0) {
      r.nn_pred = nn_pred;
      r.pgnn_pred = pgnn_pred;
    }
    ef_runs.push_back(r.ef_metrics);
    nn_runs.push_back(s.nn);
    pgnn_runs.push_back(s.pgnn);
    r.seeds.push_back(s);
  }

  r.reports.push_back(aggregate(ef_runs, "EF", config.dataset));
  r.reports.push_back(aggregate(nn_runs, "NN", config.dataset));
  r.reports.push_back(aggregate(pgnn_runs, "PGNN", config.dataset));
  return r;
}

std::string report_text(const CompareResult& r) { return format_report_table(r.reports); }

Json report_json(const CompareResult& r, const CompareConfig& config) {
  Json reports = Json::array();
  for (const auto& rep : r.reports) reports.push_back(to_json(rep));
  return Json{{"schema_version", kSchemaVersion},
              {"repeats", config.repeats},
              {"base_seed", config.base_seed},
              {"lambda", config.lambda},
              {"ef_coefficients", to_json(r.ef.coefficients)},
              {"rpm_model", to_json(r.rpm)},
              {"reports", std::move(reports)}};
}

std::string raw_results_csv(const CompareResult& r) {
  std::ostringstream os;
  os << "seed,method,mae,rmse,mape,r2\n";
  auto row = [&](std::uint64_t seed, const char* method, const MetricSet& m) {
    os << seed << ',' << method << ',' << format_number(m.mae) << ',' << format_number(m.rmse) << ','
       << format_number(m.mape) << ',' << format_number(m.r2) << '\n';
  };
  for (const auto& s : r.seeds) {
    row(s.seed, "EF", r.ef_metrics);
    row(s.seed, "NN", s.nn);
    row(s.seed, "PGNN", s.pgnn);
  }
  return os.str();
}

std::string timeseries_csv(const CompareResult& r) {
  std::ostringstream os;
  os << "timestamp,actual,ef,nn,pgnn\n";
  for (std::size_t i = 0; i < r.actual.size(); ++i) {
    os << format_timestamp(r.timestamps[i]) << ',' << format_number(r.actual[i]) << ','
       << format_number(r.ef_pred[i]) << ',' << format_number(r.nn_pred[i]) << ','
       << format_number(r.pgnn_pred[i]) << '\n';
  }
  return os.str();
}

}  // namespace shaftpower
