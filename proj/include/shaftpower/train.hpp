#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "shaftpower/adam.hpp"
#include "shaftpower/features.hpp"
#include "shaftpower/metrics.hpp"
#include "shaftpower/mlp.hpp"
#include "shaftpower/physics.hpp"
#include "shaftpower/rpm_poly.hpp"

namespace shaftpower {

enum class ValidationSplit { random, chronological };
enum class StoppingMonitor { composite, data_only };

struct TrainConfig {
  int batch_size = 16;
  int max_epochs = 200;
  int patience = 10;
  double validation_fraction = 0.2;
  double lambda = 0.0;
  AdamConfig adam;
  std::uint64_t seed = 0;
  ValidationSplit split = ValidationSplit::random;
  StoppingMonitor monitor = StoppingMonitor::composite;
  DirectionEncoding direction_encoding = DirectionEncoding::raw;
  // Layer widths; input widths are filled in from the feature groups.
  MlpArchitecture architecture;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;            // 1-based
  double train_loss = 0.0;  // mean composite loss over the epoch's batches (dropout on)
  double val_loss = 0.0;    // validation loss as computed (inference mode)
  double monitored = 0.0;   // value seen by early stopping
};

/// Tracks the best monitored value and the weights that produced it.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Records one epoch; returns true once `patience` epochs have passed
  /// without a strict improvement on the best value.
  bool update(int epoch, double monitored, const MlpModel& model);

  int best_epoch() const { return best_epoch_; }
  double best_value() const { return best_value_; }
  const MlpModel& best_model() const { return best_model_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_value_ = 0.0;
  bool has_best_ = false;
  MlpModel best_model_;
};

/// Normalised inputs and targets for one side of the split.
struct TrainingSet {
  GroupedInputs inputs;
  Eigen::RowVectorXd target;
  Eigen::RowVectorXd physics;  // empty when no EF coefficients were supplied

  Eigen::Index size() const { return target.size(); }
};

struct FitHooks {
  // Replaces the monitored validation value of an epoch (epoch, computed) -> monitored.
  std::function<double(int, double)> validation_override;
};

struct FitResult {
  MlpModel model;  // best-epoch weights
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_monitored = 0.0;
};

/// Loss of the model on a full set in inference mode.
double evaluate_loss(const MlpModel& model, const TrainingSet& set, double lambda);

/// Mini-batch Adam with per-epoch shuffling and early stopping. All
/// randomness (shuffles, dropout masks) comes from `rng`.
FitResult fit_network(MlpModel model, const TrainingSet& train, const TrainingSet& validation,
                      const TrainConfig& config, std::mt19937_64& rng, const FitHooks& hooks = {});

struct TrainedPredictor {
  MlpModel model;
  Standardizer standardizer;
  FeatureGroups groups;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  TrainConfig config;
};

/// Attaches predicted RPM, splits off validation rows, fits the standardizer
/// on the remaining rows, computes frozen physics targets from `ef` (needed
/// when lambda > 0) and trains. Same seed and data give identical weights.
TrainedPredictor train(std::vector<EnvironmentRecord> records, const MultiplicativePolyModel& rpm,
                       const std::optional<ResistanceCoefficients>& ef, const FeatureGroups& groups,
                       const TrainConfig& config, const FitHooks& hooks = {});

/// Shaft power in kW. Records must already carry predicted RPM when the
/// groups use it.
std::vector<double> predict(const TrainedPredictor& predictor, const std::vector<EnvironmentRecord>& records);

void export_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);
std::string history_csv(const std::vector<EpochRecord>& history);

struct LambdaCell {
  double lambda = 0.0;
  std::optional<MetricSet> metrics;
  std::optional<EvalReport> report;
  std::string error;  // non-empty when the cell failed
};

/// One predictor per lambda (same seed for every cell), evaluated on `test`.
/// Cells are returned in ascending lambda order; a failing cell keeps its error.
std::vector<LambdaCell> lambda_sweep(const std::vector<EnvironmentRecord>& train_records,
                                     const std::vector<EnvironmentRecord>& test_records, std::vector<double> grid,
                                     const MultiplicativePolyModel& rpm, const ResistanceCoefficients& ef,
                                     const FeatureGroups& groups, const TrainConfig& config);

/// Index of the cell with the lowest test MAPE, ignoring failed cells.
std::optional<std::size_t> best_lambda_index(const std::vector<LambdaCell>& cells);

}  // namespace shaftpower
