#include "shaftpower/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

void check_version(const Json& j, std::string_view kind) {
  if (!j.is_object()) throw SchemaError(std::string(kind) + ": expected a JSON object");
  if (!j.contains("schema_version")) throw SchemaError(std::string(kind) + ": missing schema_version");
  if (j.at("schema_version").get<int>() != kSchemaVersion) {
    throw SchemaError(std::string(kind) + ": unsupported schema_version " + j.at("schema_version").dump());
  }
}

template <typename T>
T required(const Json& j, const char* key, std::string_view kind) {
  if (!j.contains(key)) throw SchemaError(std::string(kind) + ": missing key '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string(kind) + ": bad value for '" + key + "'");
  }
}

template <typename T>
void optional_into(const Json& j, const char* key, T& target) {
  if (!j.contains(key)) return;
  try {
    target = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("bad value for '") + key + "'");
  }
}

Field parse_field(const Json& j) {
  const auto s = j.get<std::string>();
  const auto f = field_from_id(s);
  if (!f) throw SchemaError("unknown feature '" + s + "'");
  return *f;
}

Json fields_json(const std::vector<Field>& fs) {
  Json a = Json::array();
  for (auto f : fs) a.push_back(std::string(field_id(f)));
  return a;
}

std::vector<Field> fields_from(const Json& j) {
  if (!j.is_array()) throw SchemaError("feature list must be an array");
  std::vector<Field> out;
  for (const auto& e : j) out.push_back(parse_field(e));
  return out;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw SchemaError("weight matrix has wrong shape");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != cols) throw SchemaError("weight matrix has wrong shape");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from(const Json& j) {
  if (!j.is_array()) throw SchemaError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Json widths_json(const std::array<int, 2>& w) { return Json::array({w[0], w[1]}); }

Json timestamp_json(Timestamp t) { return format_timestamp(t); }
Timestamp timestamp_from(const Json& j) { return parse_timestamp(j.get<std::string>()); }

const char* split_name(ValidationSplit s) { return s == ValidationSplit::random ? "random" : "chronological"; }
const char* monitor_name(StoppingMonitor m) { return m == StoppingMonitor::composite ? "composite" : "data_only"; }
const char* encoding_name(DirectionEncoding e) { return e == DirectionEncoding::raw ? "raw" : "sin_cos"; }

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> options, const char* what) {
  for (const auto& [name, value] : options) {
    if (s == name) return value;
  }
  throw SchemaError(std::string("unknown ") + what + " '" + s + "'");
}

}  // namespace

Json to_json(const ResistanceCoefficients& k) {
  return Json{{"schema_version", kSchemaVersion},
              {"a", k.a()},
              {"b", k.b()},
              {"c", k.c()},
              {"f_c", k.f_c()},
              {"f_h", k.f_h()},
              {"f_s", k.f_s()},
              {"f_g", k.f_g()},
              {"gamma", k.gamma()},
              {"water_density", k.water_density()}};
}

ResistanceCoefficients coefficients_from_json(const Json& j) {
  constexpr std::string_view kind = "resistance coefficients";
  check_version(j, kind);
  ResistanceCoefficients::Values v;
  v.a = required<double>(j, "a", kind);
  v.b = required<double>(j, "b", kind);
  v.c = required<double>(j, "c", kind);
  v.f_c = required<double>(j, "f_c", kind);
  v.f_h = required<double>(j, "f_h", kind);
  v.f_s = required<double>(j, "f_s", kind);
  v.f_g = required<double>(j, "f_g", kind);
  optional_into(j, "gamma", v.gamma);
  optional_into(j, "water_density", v.water_density);
  return ResistanceCoefficients(v);
}

Json to_json(const MultiplicativePolyModel& m) {
  Json factors = Json::array();
  for (const auto& f : m.factors()) {
    factors.push_back(Json{{"feature", std::string(field_id(f.feature))},
                           {"shift", f.shift},
                           {"scale", f.scale},
                           {"coefficients", vector_json(f.coefficients)}});
  }
  return Json{{"schema_version", kSchemaVersion}, {"order", m.order()}, {"factors", std::move(factors)}};
}

MultiplicativePolyModel rpm_model_from_json(const Json& j) {
  constexpr std::string_view kind = "rpm model";
  check_version(j, kind);
  const int order = required<int>(j, "order", kind);
  std::vector<ScaledPolynomial> factors;
  for (const auto& f : required<Json>(j, "factors", kind)) {
    ScaledPolynomial p;
    p.feature = parse_field(f.at("feature"));
    p.shift = required<double>(f, "shift", kind);
    p.scale = required<double>(f, "scale", kind);
    p.coefficients = vector_from(f.at("coefficients"));
    factors.push_back(std::move(p));
  }
  return MultiplicativePolyModel(order, std::move(factors));
}

Json to_json(const FeatureGroups& g) {
  return Json{{"copernicus", fields_json(g.copernicus)},
              {"sensor", fields_json(g.sensor)},
              {"external", fields_json(g.external)}};
}

FeatureGroups feature_groups_from_json(const Json& j) {
  FeatureGroups g;
  g.copernicus = fields_from(j.at("copernicus"));
  g.sensor = fields_from(j.at("sensor"));
  g.external = fields_from(j.at("external"));
  g.validate();
  return g;
}

Json to_json(const TrainConfig& c) {
  const auto& a = c.architecture;
  return Json{{"schema_version", kSchemaVersion},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"validation_fraction", c.validation_fraction},
              {"lambda", c.lambda},
              {"learning_rate", c.adam.learning_rate},
              {"beta1", c.adam.beta1},
              {"beta2", c.adam.beta2},
              {"epsilon", c.adam.epsilon},
              {"seed", c.seed},
              {"validation_split", split_name(c.split)},
              {"monitor", monitor_name(c.monitor)},
              {"direction_encoding", encoding_name(c.direction_encoding)},
              {"architecture",
               Json{{"copernicus_inputs", a.copernicus_inputs},
                    {"sensor_inputs", a.sensor_inputs},
                    {"external_inputs", a.external_inputs},
                    {"copernicus_widths", widths_json(a.copernicus_widths)},
                    {"sensor_widths", widths_json(a.sensor_widths)},
                    {"external_widths", widths_json(a.external_widths)},
                    {"trunk_widths", widths_json(a.trunk_widths)},
                    {"dropout_rate", a.dropout_rate}}}};
}

TrainConfig train_config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("train config: expected a JSON object");
  if (j.contains("schema_version")) check_version(j, "train config");
  TrainConfig c;
  optional_into(j, "batch_size", c.batch_size);
  optional_into(j, "max_epochs", c.max_epochs);
  optional_into(j, "patience", c.patience);
  optional_into(j, "validation_fraction", c.validation_fraction);
  optional_into(j, "lambda", c.lambda);
  optional_into(j, "learning_rate", c.adam.learning_rate);
  optional_into(j, "beta1", c.adam.beta1);
  optional_into(j, "beta2", c.adam.beta2);
  optional_into(j, "epsilon", c.adam.epsilon);
  optional_into(j, "seed", c.seed);
  if (j.contains("validation_split")) {
    c.split = parse_enum<ValidationSplit>(j.at("validation_split").get<std::string>(),
                                          {{"random", ValidationSplit::random},
                                           {"chronological", ValidationSplit::chronological}},
                                          "validation split");
  }
  if (j.contains("monitor")) {
    c.monitor = parse_enum<StoppingMonitor>(
        j.at("monitor").get<std::string>(),
        {{"composite", StoppingMonitor::composite}, {"data_only", StoppingMonitor::data_only}}, "monitor");
  }
  if (j.contains("direction_encoding")) {
    c.direction_encoding = parse_enum<DirectionEncoding>(
        j.at("direction_encoding").get<std::string>(),
        {{"raw", DirectionEncoding::raw}, {"sin_cos", DirectionEncoding::sin_cos}}, "direction encoding");
  }
  if (j.contains("architecture")) {
    const auto& a = j.at("architecture");
    auto& arch = c.architecture;
    optional_into(a, "copernicus_inputs", arch.copernicus_inputs);
    optional_into(a, "sensor_inputs", arch.sensor_inputs);
    optional_into(a, "external_inputs", arch.external_inputs);
    optional_into(a, "copernicus_widths", arch.copernicus_widths);
    optional_into(a, "sensor_widths", arch.sensor_widths);
    optional_into(a, "external_widths", arch.external_widths);
    optional_into(a, "trunk_widths", arch.trunk_widths);
    optional_into(a, "dropout_rate", arch.dropout_rate);
  }
  c.validate();
  return c;
}

Json to_json(const EfFitConfig& c) {
  return Json{{"schema_version", kSchemaVersion},
              {"max_iterations", c.max_iterations},
              {"learning_rate", c.learning_rate},
              {"convergence_tol", c.convergence_tol},
              {"convergence_window", c.convergence_window},
              {"multistart_count", c.multistart_count},
              {"seed", c.seed},
              {"gamma", c.gamma},
              {"water_density", c.water_density}};
}

EfFitConfig ef_fit_config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("EF fit config: expected a JSON object");
  if (j.contains("schema_version")) check_version(j, "EF fit config");
  EfFitConfig c;
  optional_into(j, "max_iterations", c.max_iterations);
  optional_into(j, "learning_rate", c.learning_rate);
  optional_into(j, "convergence_tol", c.convergence_tol);
  optional_into(j, "convergence_window", c.convergence_window);
  optional_into(j, "multistart_count", c.multistart_count);
  optional_into(j, "seed", c.seed);
  optional_into(j, "gamma", c.gamma);
  optional_into(j, "water_density", c.water_density);
  c.validate();
  return c;
}

Json to_json(const MlpModel& m) {
  Json layers = Json::array();
  m.for_each_layer([&](const DenseLayer& l) {
    layers.push_back(Json{{"weight", matrix_json(l.weight)}, {"bias", vector_json(l.bias)}});
  });
  TrainConfig shell;
  shell.architecture = m.arch;
  return Json{{"architecture", to_json(shell).at("architecture")}, {"layers", std::move(layers)}};
}

MlpModel mlp_from_json(const Json& j) {
  TrainConfig shell = train_config_from_json(Json{{"architecture", j.at("architecture")}});
  MlpModel m = MlpModel::zeros(shell.architecture);
  const auto& layers = j.at("layers");
  std::size_t count = 0;
  m.for_each_layer([&](DenseLayer&) { ++count; });
  if (!layers.is_array() || layers.size() != count) throw SchemaError("network: wrong number of layers");
  std::size_t i = 0;
  m.for_each_layer([&](DenseLayer& l) {
    const auto& lj = layers[i++];
    l.weight = matrix_from(lj.at("weight"), l.weight.rows(), l.weight.cols());
    l.bias = vector_from(lj.at("bias"));
    if (l.bias.size() != l.weight.rows()) throw SchemaError("network: bias has wrong length");
  });
  if (!m.all_finite()) throw SchemaError("network: non-finite parameter");
  return m;
}

Json to_json(const Standardizer& s) {
  return Json{{"groups", to_json(s.groups)},
              {"direction_encoding", encoding_name(s.encoding)},
              {"columns", s.column_names},
              {"mean", vector_json(s.mean)},
              {"stddev", vector_json(s.stddev)},
              {"target_min", s.target_min},
              {"target_max", s.target_max}};
}

Standardizer standardizer_from_json(const Json& j) {
  Standardizer s;
  s.groups = feature_groups_from_json(j.at("groups"));
  s.encoding = parse_enum<DirectionEncoding>(j.at("direction_encoding").get<std::string>(),
                                             {{"raw", DirectionEncoding::raw}, {"sin_cos", DirectionEncoding::sin_cos}},
                                             "direction encoding");
  s.column_names = j.at("columns").get<std::vector<std::string>>();
  s.mean = vector_from(j.at("mean"));
  s.stddev = vector_from(j.at("stddev"));
  s.target_min = j.at("target_min").get<double>();
  s.target_max = j.at("target_max").get<double>();
  const auto n = static_cast<Eigen::Index>(s.column_names.size());
  if (s.mean.size() != n || s.stddev.size() != n) throw SchemaError("standardizer: column count mismatch");
  if ((s.stddev.array() <= 0.0).any()) throw SchemaError("standardizer: non-positive standard deviation");
  if (!(s.target_max > s.target_min)) throw SchemaError("standardizer: empty target range");
  return s;
}

Json to_json(const TrainedPredictor& p) {
  const Json config = to_json(p.config);
  Json history = Json::array();
  for (const auto& h : p.history) history.push_back(Json::array({h.epoch, h.train_loss, h.val_loss}));
  return Json{{"schema_version", kSchemaVersion},
              {"kind", "shaft_power_network"},
              {"config_hash", config_hash(config)},
              {"config", config},
              {"groups", to_json(p.groups)},
              {"standardizer", to_json(p.standardizer)},
              {"best_epoch", p.best_epoch},
              {"history", std::move(history)},
              {"network", to_json(p.model)}};
}

TrainedPredictor predictor_from_json(const Json& j) {
  constexpr std::string_view kind = "predictor";
  check_version(j, kind);
  try {
    TrainedPredictor p;
    p.config = train_config_from_json(j.at("config"));
    if (config_hash(j.at("config")) != j.at("config_hash").get<std::string>()) {
      throw SchemaError("predictor: config hash does not match its config");
    }
    p.groups = feature_groups_from_json(j.at("groups"));
    p.standardizer = standardizer_from_json(j.at("standardizer"));
    p.best_epoch = j.at("best_epoch").get<int>();
    for (const auto& h : j.at("history")) {
      EpochRecord r;
      r.epoch = h.at(0).get<int>();
      r.train_loss = h.at(1).get<double>();
      r.val_loss = h.at(2).get<double>();
      r.monitored = r.val_loss;
      p.history.push_back(r);
    }
    p.model = mlp_from_json(j.at("network"));
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("predictor: ") + e.what());
  }
}

Json to_json(const SynthConfig& c) {
  Json dd = Json::array();
  for (auto t : c.drydock_dates) dd.push_back(timestamp_json(t));
  Json j{{"schema_version", kSchemaVersion},
         {"row_count", c.row_count},
         {"seed", c.seed},
         {"start", timestamp_json(c.start)},
         {"duration_days", c.duration_days},
         {"true_coefficients", to_json(c.true_coefficients)},
         {"true_rpm_model", to_json(c.true_rpm_model)},
         {"noise_rel_std", c.noise_rel_std},
         {"rpm_noise_rel_std", c.rpm_noise_rel_std},
         {"fouling_drydock_gain", c.fouling_drydock_gain},
         {"fouling_drydock_timescale_days", c.fouling_drydock_timescale_days},
         {"fouling_polish_gain", c.fouling_polish_gain},
         {"drydock_dates", std::move(dd)},
         {"polish_period_days", c.polish_period_days},
         {"polish_anchor", timestamp_json(c.polish_anchor)},
         {"days_since_drydock_at_start", c.days_since_drydock_at_start},
         {"speed_min_kn", c.speed_min_kn},
         {"speed_max_kn", c.speed_max_kn},
         {"draught_min_m", c.draught_min_m},
         {"draught_max_m", c.draught_max_m},
         {"sea_depth_min_m", c.sea_depth_min_m},
         {"sea_depth_max_m", c.sea_depth_max_m},
         {"wave_weibull_shape", c.wave_weibull_shape},
         {"wave_weibull_scale_m", c.wave_weibull_scale_m},
         {"wave_seasonal_amplitude", c.wave_seasonal_amplitude},
         {"swell_weibull_shape", c.swell_weibull_shape},
         {"swell_weibull_scale_m", c.swell_weibull_scale_m},
         {"wind_rayleigh_sigma_mps", c.wind_rayleigh_sigma_mps},
         {"sea_temp_mean_c", c.sea_temp_mean_c},
         {"sea_temp_seasonal_c", c.sea_temp_seasonal_c},
         {"sea_temp_std_c", c.sea_temp_std_c},
         {"air_temp_offset_c", c.air_temp_offset_c},
         {"air_temp_std_c", c.air_temp_std_c}};
  if (c.paired_drydock_window_days) j["paired_drydock_window_days"] = *c.paired_drydock_window_days;
  return j;
}

SynthConfig synth_config_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("synthetic config: expected a JSON object");
  if (j.contains("schema_version")) check_version(j, "synthetic config");
  SynthConfig c;
  try {
    optional_into(j, "row_count", c.row_count);
    optional_into(j, "seed", c.seed);
    if (j.contains("start")) c.start = timestamp_from(j.at("start"));
    optional_into(j, "duration_days", c.duration_days);
    if (j.contains("true_coefficients")) c.true_coefficients = coefficients_from_json(j.at("true_coefficients"));
    if (j.contains("true_rpm_model")) c.true_rpm_model = rpm_model_from_json(j.at("true_rpm_model"));
    optional_into(j, "noise_rel_std", c.noise_rel_std);
    optional_into(j, "rpm_noise_rel_std", c.rpm_noise_rel_std);
    optional_into(j, "fouling_drydock_gain", c.fouling_drydock_gain);
    optional_into(j, "fouling_drydock_timescale_days", c.fouling_drydock_timescale_days);
    optional_into(j, "fouling_polish_gain", c.fouling_polish_gain);
    if (j.contains("drydock_dates")) {
      c.drydock_dates.clear();
      for (const auto& t : j.at("drydock_dates")) c.drydock_dates.push_back(timestamp_from(t));
    }
    optional_into(j, "polish_period_days", c.polish_period_days);
    if (j.contains("polish_anchor")) c.polish_anchor = timestamp_from(j.at("polish_anchor"));
    optional_into(j, "days_since_drydock_at_start", c.days_since_drydock_at_start);
    optional_into(j, "speed_min_kn", c.speed_min_kn);
    optional_into(j, "speed_max_kn", c.speed_max_kn);
    optional_into(j, "draught_min_m", c.draught_min_m);
    optional_into(j, "draught_max_m", c.draught_max_m);
    optional_into(j, "sea_depth_min_m", c.sea_depth_min_m);
    optional_into(j, "sea_depth_max_m", c.sea_depth_max_m);
    optional_into(j, "wave_weibull_shape", c.wave_weibull_shape);
    optional_into(j, "wave_weibull_scale_m", c.wave_weibull_scale_m);
    optional_into(j, "wave_seasonal_amplitude", c.wave_seasonal_amplitude);
    optional_into(j, "swell_weibull_shape", c.swell_weibull_shape);
    optional_into(j, "swell_weibull_scale_m", c.swell_weibull_scale_m);
    optional_into(j, "wind_rayleigh_sigma_mps", c.wind_rayleigh_sigma_mps);
    optional_into(j, "sea_temp_mean_c", c.sea_temp_mean_c);
    optional_into(j, "sea_temp_seasonal_c", c.sea_temp_seasonal_c);
    optional_into(j, "sea_temp_std_c", c.sea_temp_std_c);
    optional_into(j, "air_temp_offset_c", c.air_temp_offset_c);
    optional_into(j, "air_temp_std_c", c.air_temp_std_c);
    if (j.contains("paired_drydock_window_days")) {
      c.paired_drydock_window_days = j.at("paired_drydock_window_days").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("synthetic config: ") + e.what());
  }
  c.validate();
  return c;
}

Json to_json(const EvalReport& r) {
  auto ms = [](const MeanStd& m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
  return Json{{"method", r.method}, {"dataset", r.dataset},   {"mae", ms(r.mae)},
              {"rmse", ms(r.rmse)}, {"mape", ms(r.mape)},     {"r2", ms(r.r2)},
              {"repeat_count", r.repeat_count}, {"std_kind", r.std_kind}};
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(j.dump())));
  return buf;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot open " + path.string());
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << text;
  if (!f) throw UsageError("failed writing " + path.string());
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

}  // namespace shaftpower
