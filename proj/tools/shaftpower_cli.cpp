// Command-line front end. Every artifact-writing command also writes
// <first output>.manifest.json (or manifest.json inside an output directory).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shaftpower/data.hpp"
#include "shaftpower/ef_fit.hpp"
#include "shaftpower/error.hpp"
#include "shaftpower/experiment.hpp"
#include "shaftpower/metrics.hpp"
#include "shaftpower/rpm_poly.hpp"
#include "shaftpower/serialization.hpp"
#include "shaftpower/synth.hpp"
#include "shaftpower/train.hpp"

#ifndef SHAFTPOWER_VERSION
#define SHAFTPOWER_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace shaftpower;

namespace {

// Collects written files so they can be removed if the command fails.
class Outputs {
 public:
  void text(const fs::path& p, std::string_view content) {
    track(p);
    write_text_file(p, content);
  }
  void json(const fs::path& p, const Json& j) {
    track(p);
    write_json_file(p, j);
  }
  void dir(const fs::path& p) {
    if (!fs::exists(p)) {
      fs::create_directories(p);
      created_dirs_.push_back(p);
    }
  }
  void rollback() noexcept {
    std::error_code ec;
    for (auto it = files_.rbegin(); it != files_.rend(); ++it) fs::remove(*it, ec);
    for (auto it = created_dirs_.rbegin(); it != created_dirs_.rend(); ++it) fs::remove(*it, ec);
  }
  std::vector<std::string> paths() const {
    std::vector<std::string> out;
    for (const auto& f : files_) out.push_back(f.string());
    return out;
  }

 private:
  void track(const fs::path& p) {
    if (p.has_parent_path() && !fs::exists(p.parent_path())) dir(p.parent_path());
    files_.push_back(p);
  }
  std::vector<fs::path> files_;
  std::vector<fs::path> created_dirs_;
};

struct Manifest {
  std::string command;
  Json config = Json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
};

void write_manifest(Outputs& out, const fs::path& path, const Manifest& m,
                    std::chrono::steady_clock::time_point started) {
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  Json j{{"schema_version", kSchemaVersion},
         {"command", m.command},
         {"config_hash", config_hash(m.config)},
         {"config", m.config},
         {"seeds", m.seeds},
         {"inputs", m.inputs},
         {"outputs", out.paths()},
         {"tool_version", SHAFTPOWER_VERSION},
         {"wall_clock_seconds", seconds}};
  out.json(path, j);
}

fs::path manifest_for(const fs::path& output) { return fs::path(output.string() + ".manifest.json"); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw UsageError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

std::vector<Field> parse_fields(const std::string& text) {
  std::vector<Field> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto f = field_from_id(item);
    if (!f) throw UsageError("unknown feature '" + item + "'");
    out.push_back(*f);
  }
  return out;
}

struct CsvFlags {
  bool degrees = false;
  std::string air_temp = "15";  // "sea" or a constant in degC, used when the column is absent
  CsvOptions options() const {
    CsvOptions o;
    o.angles = degrees ? AngleUnit::degrees : AngleUnit::radians;
    if (air_temp == "sea") {
      o.air_temp_fallback = AirTempFallback::sea_temp;
    } else {
      o.air_temp_constant_c = parse_list(air_temp).at(0);
      if (air_temp.find(',') != std::string::npos || !(o.air_temp_constant_c > -273.15)) {
        throw UsageError("--air-temp expects 'sea' or one temperature above -273.15 degC");
      }
    }
    return o;
  }
};

Dataset load_training(const std::string& path, const CsvFlags& flags) { return preprocess(load_csv(path, flags.options())); }

// Benchmark presets; the seed selects the benchmark instance, not the raw generator seed.
SynthConfig preset(const std::string& name, std::optional<std::uint64_t> seed) {
  if (name == "drift-train") return seed ? drift_benchmark(*seed).train : drift_benchmark().train;
  if (name == "drift-test") return seed ? drift_benchmark(*seed).test : drift_benchmark().test;
  if (name == "heavy-weather-train") return seed ? heavy_weather_benchmark(*seed).train : heavy_weather_benchmark().train;
  if (name == "heavy-weather-test") return seed ? heavy_weather_benchmark(*seed).test : heavy_weather_benchmark().test;
  if (name == "oracle") {
    SynthConfig c;
    c.seed = seed.value_or(1);
    c.row_count = 20000;
    return c;
  }
  throw UsageError("unknown preset '" + name + "'");
}

std::string predictions_csv(const std::vector<EnvironmentRecord>& rows, const std::vector<double>& pred) {
  std::ostringstream os;
  os << "timestamp,predicted_power_kw\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    os << format_timestamp(rows[i].timestamp) << ',' << format_number(pred[i]) << '\n';
  }
  return os.str();
}

// timestamp,predicted_power_kw -> values, checked against the truth rows.
std::vector<double> read_predictions(const fs::path& path, const std::vector<EnvironmentRecord>& truth) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line.rfind("timestamp,predicted_power_kw", 0) != 0) {
    throw SchemaError(path.string() + ": expected header 'timestamp,predicted_power_kw'");
  }
  std::vector<double> out;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw SchemaError(path.string() + ": malformed line '" + line + "'");
    const std::size_t i = out.size();
    if (i >= truth.size() || parse_timestamp(line.substr(0, comma)) != truth[i].timestamp) {
      throw SchemaError(path.string() + ": row " + std::to_string(i) + " does not match the ground-truth timestamps");
    }
    out.push_back(parse_list(line.substr(comma + 1)).at(0));
  }
  if (out.size() != truth.size()) throw SchemaError(path.string() + ": row count differs from the ground truth");
  return out;
}

TrainConfig load_train_config(const std::string& path) {
  return path.empty() ? TrainConfig{} : train_config_from_json(read_json_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shaft power prediction with empirical formulas and (physics-guided) neural networks"};
  app.set_version_flag("--version", SHAFTPOWER_VERSION);
  app.require_subcommand(1);

  CsvFlags csv;
  app.add_flag("--degrees", csv.degrees, "Direction columns of input CSVs are in degrees");
  app.add_option("--air-temp", csv.air_temp, "Fallback when air_temp_c is absent: constant degC or 'sea'")
      ->capture_default_str();

  std::string config_path, preset_name, out_path, train_path, test_path, ef_path, rpm_path, model_path, data_path,
      method = "nn", features_text, grid_text = "0.05,0.1,0.2,0.4,0.6,0.8,1", history_path, dataset_name = "synthetic";
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> rows_override;
  double lambda = 0.1;
  std::size_t repeats = 10;
  std::optional<int> max_epochs;
  bool select_features = false;

  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset as CSV");
  gen->add_option("--config", config_path, "SynthConfig JSON");
  gen->add_option("--preset", preset_name, "drift-train | drift-test | heavy-weather-train | heavy-weather-test | oracle");
  gen->add_option("--seed", seed_override, "Override the seed");
  gen->add_option("--rows", rows_override, "Override the row count");
  gen->add_option("--out", out_path, "Output CSV")->required();

  auto* fit_ef_cmd = app.add_subcommand("fit-ef", "Fit the empirical-formula coefficients");
  fit_ef_cmd->add_option("--train", train_path, "Training CSV")->required();
  fit_ef_cmd->add_option("--config", config_path, "EfFitConfig JSON");
  fit_ef_cmd->add_option("--seed", seed_override, "Multistart seed");
  fit_ef_cmd->add_option("--out", out_path, "Output coefficients JSON")->required();

  auto* fit_rpm_cmd = app.add_subcommand("fit-rpm", "Fit the multiplicative polynomial RPM model");
  fit_rpm_cmd->add_option("--train", train_path, "Training CSV")->required();
  fit_rpm_cmd->add_option("--features", features_text, "Comma-separated feature ids (default V,T,v_wind,h_swell)");
  fit_rpm_cmd->add_flag("--select-features", select_features, "Greedy selection among --features");
  fit_rpm_cmd->add_option("--out", out_path, "Output model JSON")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a NN (lambda 0) or PGNN predictor");
  train_cmd->add_option("--train", train_path, "Training CSV")->required();
  train_cmd->add_option("--ef", ef_path, "EF coefficients JSON (required when lambda > 0)");
  train_cmd->add_option("--rpm", rpm_path, "RPM model JSON")->required();
  train_cmd->add_option("--lambda", lambda, "Physics loss weight")->capture_default_str();
  train_cmd->add_option("--seed", seed, "Training seed")->capture_default_str();
  train_cmd->add_option("--config", config_path, "TrainConfig JSON");
  train_cmd->add_option("--max-epochs", max_epochs, "Override max epochs");
  train_cmd->add_option("--history", history_path, "Write per-epoch losses as CSV");
  train_cmd->add_option("--out", out_path, "Output predictor JSON")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict shaft power for a CSV");
  predict_cmd->add_option("--method", method, "nn | ef")->check(CLI::IsMember({"nn", "ef"}))->capture_default_str();
  predict_cmd->add_option("--model", model_path, "Predictor JSON (nn) or coefficients JSON (ef)")->required();
  predict_cmd->add_option("--rpm", rpm_path, "RPM model JSON (nn)");
  predict_cmd->add_option("--data", data_path, "Input CSV")->required();
  predict_cmd->add_option("--out", out_path, "Output predictions CSV")->required();

  std::string predictions_path, truth_path;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score predictions against ground truth");
  eval_cmd->add_option("--predictions", predictions_path, "Predictions CSV")->required();
  eval_cmd->add_option("--truth", truth_path, "Ground-truth CSV (same rows)")->required();
  eval_cmd->add_option("--out", out_path, "Optional metrics JSON");

  auto* compare_cmd = app.add_subcommand("compare", "EF vs NN vs PGNN over seeded repeats");
  compare_cmd->add_option("--train", train_path, "Training CSV")->required();
  compare_cmd->add_option("--test", test_path, "Test CSV")->required();
  compare_cmd->add_option("--repeats", repeats, "Seeded repeats")->capture_default_str();
  compare_cmd->add_option("--lambda", lambda, "PGNN physics loss weight")->capture_default_str();
  compare_cmd->add_option("--seed", seed, "Base seed; repeat i uses seed + i")->capture_default_str();
  compare_cmd->add_option("--config", config_path, "TrainConfig JSON");
  compare_cmd->add_option("--max-epochs", max_epochs, "Override max epochs");
  compare_cmd->add_option("--dataset", dataset_name, "Dataset label in the report")->capture_default_str();
  compare_cmd->add_option("--out-dir", out_path, "Output directory")->required();

  auto* sweep_cmd = app.add_subcommand("lambda-sweep", "Train one PGNN per lambda and score each on the test set");
  sweep_cmd->add_option("--train", train_path, "Training CSV")->required();
  sweep_cmd->add_option("--test", test_path, "Test CSV")->required();
  sweep_cmd->add_option("--grid", grid_text, "Comma-separated lambda values")->capture_default_str();
  sweep_cmd->add_option("--seed", seed, "Training seed")->capture_default_str();
  sweep_cmd->add_option("--config", config_path, "TrainConfig JSON");
  sweep_cmd->add_option("--max-epochs", max_epochs, "Override max epochs");
  sweep_cmd->add_option("--out-dir", out_path, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "shaftpower: error: " << e.what() << '\n';
    return 2;
  }

  const auto started = std::chrono::steady_clock::now();
  Outputs out;
  Manifest manifest;
  try {
    if (*gen) {
      manifest.command = "generate";
      if (config_path.empty() == preset_name.empty()) throw UsageError("give exactly one of --config or --preset");
      SynthConfig c = config_path.empty() ? preset(preset_name, seed_override)
                                          : synth_config_from_json(read_json_file(config_path));
      if (seed_override && !config_path.empty()) c.seed = *seed_override;
      if (rows_override) c.row_count = *rows_override;
      c.validate();
      if (!config_path.empty()) manifest.inputs.push_back(config_path);
      manifest.config = to_json(c);
      manifest.seeds = {c.seed};
      const Dataset ds = generate(c);
      out.text(out_path, to_csv(ds));
      write_manifest(out, manifest_for(out_path), manifest, started);
    } else if (*fit_ef_cmd) {
      manifest.command = "fit-ef";
      EfFitConfig c = config_path.empty() ? EfFitConfig{} : ef_fit_config_from_json(read_json_file(config_path));
      if (seed_override) c.seed = *seed_override;
      manifest.inputs = {train_path};
      manifest.config = to_json(c);
      manifest.seeds = {c.seed};
      const auto ds = load_training(train_path, csv);
      const auto r = fit_ef(ds.rows, c);
      Json j = to_json(r.coefficients);
      j["fit"] = Json{{"train_mse", r.train_mse},
                      {"initial_mse", r.initial_mse},
                      {"iterations_used", r.iterations_used},
                      {"converged", r.converged},
                      {"restart_index", r.restart_index}};
      out.json(out_path, j);
      write_manifest(out, manifest_for(out_path), manifest, started);
    } else if (*fit_rpm_cmd) {
      manifest.command = "fit-rpm";
      auto features = features_text.empty() ? default_rpm_features() : parse_fields(features_text);
      manifest.inputs = {train_path};
      Json ids = Json::array();
      for (auto f : features) ids.push_back(std::string(field_id(f)));
      manifest.config = Json{{"features", ids}, {"select_features", select_features}};
      const auto ds = load_training(train_path, csv);
      if (select_features) features = greedy_feature_selection(ds.rows, features);
      const auto r = fit_rpm_als(ds.rows, features);
      Json j = to_json(r.model);
      j["fit"] = Json{{"sweeps", r.sweeps}, {"converged", r.converged}, {"mse_history", r.mse_history}};
      out.json(out_path, j);
      write_manifest(out, manifest_for(out_path), manifest, started);
    } else if (*train_cmd) {
      manifest.command = "train";
      TrainConfig c = load_train_config(config_path);
      c.lambda = lambda;
      c.seed = seed;
      if (max_epochs) c.max_epochs = *max_epochs;
      c.validate();
      if (c.lambda > 0.0 && ef_path.empty()) throw UsageError("--ef is required when --lambda > 0");
      manifest.inputs = {train_path, rpm_path};
      if (!ef_path.empty()) manifest.inputs.push_back(ef_path);
      manifest.config = to_json(c);
      manifest.seeds = {c.seed};
      const auto rpm = rpm_model_from_json(read_json_file(rpm_path));
      std::optional<ResistanceCoefficients> ef;
      if (!ef_path.empty()) ef = coefficients_from_json(read_json_file(ef_path));
      const auto ds = load_training(train_path, csv);
      const auto p = train(ds.rows, rpm, ef, FeatureGroups::defaults(), c);
      out.json(out_path, to_json(p));
      if (!history_path.empty()) out.text(history_path, history_csv(p.history));
      write_manifest(out, manifest_for(out_path), manifest, started);
    } else if (*predict_cmd) {
      manifest.command = "predict";
      manifest.inputs = {model_path, data_path};
      auto rows = load_csv(data_path, csv.options()).rows;
      std::vector<double> pred;
      if (method == "ef") {
        pred = predict_ef(coefficients_from_json(read_json_file(model_path)), rows);
      } else {
        if (rpm_path.empty()) throw UsageError("--rpm is required for --method nn");
        manifest.inputs.push_back(rpm_path);
        const auto p = predictor_from_json(read_json_file(model_path));
        attach_predicted_rpm(rpm_model_from_json(read_json_file(rpm_path)), rows);
        pred = predict(p, rows);
      }
      manifest.config = Json{{"method", method}};
      out.text(out_path, predictions_csv(rows, pred));
      write_manifest(out, manifest_for(out_path), manifest, started);
    } else if (*eval_cmd) {
      const auto truth = load_csv(truth_path, csv.options()).rows;
      const auto pred = read_predictions(predictions_path, truth);
      const auto m = evaluate(column(truth, Field::shaft_power), pred);
      std::cout << "MAE " << format_number(m.mae) << "\nRMSE " << format_number(m.rmse) << "\nMAPE "
                << format_number(m.mape) << "\nR2 " << format_number(m.r2) << '\n';
      if (!out_path.empty()) {
        manifest.command = "evaluate";
        manifest.inputs = {predictions_path, truth_path};
        out.json(out_path, Json{{"schema_version", kSchemaVersion},
                                {"mae", m.mae},
                                {"rmse", m.rmse},
                                {"mape", m.mape},
                                {"r2", m.r2},
                                {"rows", truth.size()}});
        write_manifest(out, manifest_for(out_path), manifest, started);
      }
    } else if (*compare_cmd) {
      manifest.command = "compare";
      CompareConfig c;
      c.repeats = repeats;
      c.base_seed = seed;
      c.lambda = lambda;
      c.dataset = dataset_name;
      c.train = load_train_config(config_path);
      if (max_epochs) c.train.max_epochs = *max_epochs;
      c.validate();
      manifest.inputs = {train_path, test_path};
      manifest.config = Json{{"train", to_json(c.train)}, {"ef", to_json(c.ef)}, {"lambda", c.lambda},
                             {"repeats", c.repeats}, {"dataset", c.dataset}};
      for (std::size_t i = 0; i < repeats; ++i) manifest.seeds.push_back(seed + i);
      const auto tr = load_training(train_path, csv);
      const auto te = load_training(test_path, csv);
      const auto r = compare(tr.rows, te.rows, c);
      const fs::path dir = out_path;
      out.dir(dir);
      out.text(dir / "report.txt", report_text(r));
      out.json(dir / "report.json", report_json(r, c));
      out.text(dir / "raw_results.csv", raw_results_csv(r));
      out.text(dir / "timeseries.csv", timeseries_csv(r));
      write_manifest(out, dir / "manifest.json", manifest, started);
      std::cout << report_text(r);
    } else if (*sweep_cmd) {
      manifest.command = "lambda-sweep";
      TrainConfig c = load_train_config(config_path);
      c.seed = seed;
      if (max_epochs) c.max_epochs = *max_epochs;
      c.validate();
      const auto grid = parse_list(grid_text);
      manifest.inputs = {train_path, test_path};
      manifest.config = Json{{"train", to_json(c)}, {"grid", grid}};
      manifest.seeds = {seed};
      const auto tr = load_training(train_path, csv);
      const auto te = load_training(test_path, csv);
      const auto rpm = fit_rpm_als(tr.rows, default_rpm_features()).model;
      const auto ef = fit_ef(tr.rows).coefficients;
      const auto cells = lambda_sweep(tr.rows, te.rows, grid, rpm, ef, FeatureGroups::defaults(), c);

      std::ostringstream csv_out;
      csv_out << "lambda,mae,rmse,mape,r2,error\n";
      std::vector<EvalReport> reports;
      for (const auto& cell : cells) {
        csv_out << format_number(cell.lambda);
        if (cell.metrics) {
          csv_out << ',' << format_number(cell.metrics->mae) << ',' << format_number(cell.metrics->rmse) << ','
                  << format_number(cell.metrics->mape) << ',' << format_number(cell.metrics->r2) << ",\n";
          reports.push_back(*cell.report);
        } else {
          std::string err = cell.error;
          for (auto& ch : err) {
            if (ch == ',' || ch == '\n') ch = ' ';
          }
          csv_out << ",,,,," << err << '\n';
        }
      }
      std::string table = format_report_table(reports);
      if (const auto best = best_lambda_index(cells)) {
        table += "best lambda: " + format_number(cells[*best].lambda) + "\n";
      }
      const fs::path dir = out_path;
      out.dir(dir);
      out.text(dir / "sweep.csv", csv_out.str());
      out.text(dir / "sweep.txt", table);
      write_manifest(out, dir / "manifest.json", manifest, started);
      std::cout << table;
    }
  } catch (const std::exception& e) {
    out.rollback();
    std::string msg = e.what();
    for (auto& ch : msg) {
      if (ch == '\n') ch = ' ';
    }
    std::cerr << "shaftpower: error: " << msg << '\n';
    return 1;
  }
  return 0;
}
