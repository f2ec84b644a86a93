#include "shaftpower/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "shaftpower/data.hpp"
#include "shaftpower/ef_fit.hpp"
#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

// Adam moments for every tensor, in for_each_layer order.
struct ModelAdam {
  std::vector<AdamState> weight, bias;
};

void adam_update(MlpModel& model, MlpGradients& grads, ModelAdam& state, const AdamConfig& config) {
  std::vector<DenseLayer*> g;
  grads.for_each_layer([&](DenseLayer& l) { g.push_back(&l); });
  if (state.weight.empty()) {
    state.weight.resize(g.size());
    state.bias.resize(g.size());
  }
  std::size_t i = 0;
  model.for_each_layer([&](DenseLayer& l) {
    adam_step(l.weight, g[i]->weight, state.weight[i], config);
    adam_step(l.bias, g[i]->bias, state.bias[i], config);
    ++i;
  });
}

TrainingSet subset(const TrainingSet& set, const std::vector<Eigen::Index>& idx) {
  TrainingSet out;
  out.inputs = set.inputs.gather(idx);
  out.target = set.target(Eigen::all, idx);
  if (set.physics.size() != 0) out.physics = set.physics(Eigen::all, idx);
  return out;
}

std::vector<EnvironmentRecord> pick(const std::vector<EnvironmentRecord>& rows, const std::vector<Eigen::Index>& idx) {
  std::vector<EnvironmentRecord> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(rows[static_cast<std::size_t>(i)]);
  return out;
}

TrainingSet make_set(const std::vector<EnvironmentRecord>& rows, const Standardizer& st,
                     const std::optional<ResistanceCoefficients>& ef) {
  TrainingSet s;
  s.inputs = st.transform(rows);
  s.target.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].shaft_power) throw SchemaError("row " + std::to_string(i) + ": missing shaft power");
    s.target[static_cast<Eigen::Index>(i)] = st.normalize_target(*rows[i].shaft_power);
  }
  if (ef) {
    const auto p = predict_ef(*ef, rows);
    s.physics.resize(s.target.size());
    for (std::size_t i = 0; i < p.size(); ++i) s.physics[static_cast<Eigen::Index>(i)] = st.normalize_target(p[i]);
  }
  return s;
}

bool uses_predicted_rpm(const FeatureGroups& g) {
  for (const auto* group : {&g.copernicus, &g.sensor, &g.external}) {
    if (std::find(group->begin(), group->end(), Field::predicted_rpm) != group->end()) return true;
  }
  return false;
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (max_epochs < 1) throw UsageError("max epochs must be >= 1");
  if (patience < 1) throw UsageError("patience must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw UsageError("validation fraction must lie strictly between 0 and 1");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw UsageError("lambda must be finite and >= 0");
  if (!(adam.learning_rate > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw UsageError("invalid Adam settings");
  }
  architecture.validate();
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw UsageError("patience must be >= 1");
}

bool EarlyStopping::update(int epoch, double monitored, const MlpModel& model) {
  if (!has_best_ || monitored < best_value_) {
    has_best_ = true;
    best_value_ = monitored;
    best_epoch_ = epoch;
    best_model_ = model;
  }
  return epoch - best_epoch_ >= patience_;
}

double evaluate_loss(const MlpModel& model, const TrainingSet& set, double lambda) {
  const Eigen::RowVectorXd pred = forward(model, set.inputs, false);
  return composite_loss(pred, set.target, set.physics, lambda);
}

FitResult fit_network(MlpModel model, const TrainingSet& train, const TrainingSet& validation,
                      const TrainConfig& config, std::mt19937_64& rng, const FitHooks& hooks) {
  config.validate();
  if (train.size() == 0 || validation.size() == 0) throw UsageError("training and validation sets must be non-empty");
  if (config.lambda > 0.0 && (train.physics.size() == 0 || validation.physics.size() == 0)) {
    throw UsageError("lambda > 0 needs physics targets");
  }

  const Eigen::Index n = train.size();
  const Eigen::Index batch = std::min<Eigen::Index>(config.batch_size, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  ModelAdam adam;
  EarlyStopping stopper(config.patience);
  FitResult result;
  ForwardCache cache;

  const TrainingSet monitor_set = [&] {
    TrainingSet s = validation;
    if (config.monitor == StoppingMonitor::data_only) s.physics.resize(0);
    return s;
  }();
  const double monitor_lambda = config.monitor == StoppingMonitor::data_only ? 0.0 : config.lambda;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    for (Eigen::Index start = 0; start < n; start += batch) {
      const Eigen::Index len = std::min(batch, n - start);
      const std::vector<Eigen::Index> idx(order.begin() + start, order.begin() + start + len);
      const TrainingSet b = subset(train, idx);
      const Eigen::RowVectorXd pred = forward(model, b.inputs, true, &rng, &cache);
      loss_sum += composite_loss(pred, b.target, b.physics, config.lambda) * static_cast<double>(len);
      MlpGradients g = backward(model, cache, composite_loss_gradient(pred, b.target, b.physics, config.lambda));
      adam_update(model, g, adam, config.adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(rec.train_loss) || !model.all_finite()) {
      throw DivergenceError("training diverged to a non-finite loss at epoch " + std::to_string(epoch));
    }
    rec.val_loss = evaluate_loss(model, monitor_set, monitor_lambda);
    rec.monitored = hooks.validation_override ? hooks.validation_override(epoch, rec.val_loss) : rec.val_loss;
    result.history.push_back(rec);
    if (stopper.update(epoch, rec.monitored, model)) break;
  }

  result.model = stopper.best_model();
  result.best_epoch = stopper.best_epoch();
  result.best_monitored = stopper.best_value();
  return result;
}

TrainedPredictor train(std::vector<EnvironmentRecord> records, const MultiplicativePolyModel& rpm,
                       const std::optional<ResistanceCoefficients>& ef, const FeatureGroups& groups,
                       const TrainConfig& config, const FitHooks& hooks) {
  config.validate();
  groups.validate();
  if (config.lambda > 0.0 && !ef) throw UsageError("lambda > 0 requires fitted EF coefficients");
  if (records.empty()) throw UsageError("no training rows");

  attach_predicted_rpm(rpm, records);

  const auto n = static_cast<Eigen::Index>(records.size());
  const auto n_val = static_cast<Eigen::Index>(std::llround(config.validation_fraction * static_cast<double>(n)));
  if (n_val < 1 || n - n_val < 1) {
    throw UsageError("validation split leaves an empty side (" + std::to_string(n) + " rows)");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  if (config.split == ValidationSplit::random) std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<Eigen::Index> fit_idx(idx.begin(), idx.end() - n_val);
  std::vector<Eigen::Index> val_idx(idx.end() - n_val, idx.end());
  if (config.split == ValidationSplit::random) {
    std::sort(fit_idx.begin(), fit_idx.end());
    std::sort(val_idx.begin(), val_idx.end());
  }
  const auto fit_rows = pick(records, fit_idx);
  const auto val_rows = pick(records, val_idx);

  TrainedPredictor out;
  out.groups = groups;
  out.config = config;
  out.standardizer = fit_standardizer(fit_rows, groups, config.direction_encoding);
  const TrainingSet fit_set = make_set(fit_rows, out.standardizer, ef);
  const TrainingSet val_set = make_set(val_rows, out.standardizer, ef);

  MlpArchitecture arch = config.architecture;
  arch.copernicus_inputs = static_cast<int>(fit_set.inputs.copernicus.rows());
  arch.sensor_inputs = static_cast<int>(fit_set.inputs.sensor.rows());
  arch.external_inputs = static_cast<int>(fit_set.inputs.external.rows());
  out.config.architecture = arch;

  MlpModel model = MlpModel::initialize(arch, rng);
  FitResult fit = fit_network(std::move(model), fit_set, val_set, out.config, rng, hooks);
  out.model = std::move(fit.model);
  out.history = std::move(fit.history);
  out.best_epoch = fit.best_epoch;
  return out;
}

std::vector<double> predict(const TrainedPredictor& predictor, const std::vector<EnvironmentRecord>& records) {
  if (records.empty()) return {};
  if (uses_predicted_rpm(predictor.groups)) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (!records[i].predicted_rpm) {
        throw SchemaError("row " + std::to_string(i) + ": predicted RPM not attached");
      }
    }
  }
  const Eigen::RowVectorXd y = forward(predictor.model, predictor.standardizer.transform(records), false);
  std::vector<double> out(records.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = predictor.standardizer.denormalize_target(y[static_cast<Eigen::Index>(i)]);
  }
  return out;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os << "epoch,train_loss,val_loss\n";
  for (const auto& h : history) {
    os << h.epoch << ',' << format_number(h.train_loss) << ',' << format_number(h.val_loss) << '\n';
  }
  return os.str();
}

void export_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write " + path.string());
  f << history_csv(history);
  if (!f) throw UsageError("failed writing " + path.string());
}

std::vector<LambdaCell> lambda_sweep(const std::vector<EnvironmentRecord>& train_records,
                                     const std::vector<EnvironmentRecord>& test_records, std::vector<double> grid,
                                     const MultiplicativePolyModel& rpm, const ResistanceCoefficients& ef,
                                     const FeatureGroups& groups, const TrainConfig& config) {
  if (grid.empty()) throw UsageError("lambda grid is empty");
  std::sort(grid.begin(), grid.end());
  std::vector<EnvironmentRecord> test = test_records;
  attach_predicted_rpm(rpm, test);
  const auto actual = column(test, Field::shaft_power);

  std::vector<LambdaCell> cells;
  for (double lambda : grid) {
    LambdaCell cell;
    cell.lambda = lambda;
    try {
      TrainConfig c = config;
      c.lambda = lambda;
      const auto predictor = train(train_records, rpm, ef, groups, c);
      const auto pred = predict(predictor, test);
      cell.metrics = evaluate(actual, pred);
      const MetricSet one[] = {*cell.metrics};
      cell.report = aggregate(one, "PGNN", "lambda=" + format_number(lambda));
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::optional<std::size_t> best_lambda_index(const std::vector<LambdaCell>& cells) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].metrics) continue;
    if (!best || cells[i].metrics->mape < cells[*best].metrics->mape) best = i;
  }
  return best;
}

}  // namespace shaftpower
