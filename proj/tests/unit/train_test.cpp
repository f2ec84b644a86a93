#include <gtest/gtest.h>

#include <cmath>

#include "shaftpower/ef_fit.hpp"
#include "shaftpower/error.hpp"
#include "shaftpower/synth.hpp"
#include "shaftpower/train.hpp"

namespace shaftpower {
namespace {

std::vector<EnvironmentRecord> synthetic(std::size_t n, std::uint64_t seed) {
  SynthConfig c;
  c.row_count = n;
  c.seed = seed;
  c.noise_rel_std = 0.02;
  c.fouling_drydock_gain = 0.1;
  return generate(c).rows;
}

TrainConfig quick(int epochs = 5) {
  TrainConfig c;
  c.max_epochs = epochs;
  c.seed = 4;
  return c;
}

TEST(EarlyStopping, StopsPatienceEpochsAfterBest) {
  EarlyStopping es(3);
  const MlpModel m;
  const double seq[] = {1.0, 0.8, 0.5, 0.5, 0.6, 0.7};
  std::vector<bool> stop;
  for (int e = 1; e <= 6; ++e) stop.push_back(es.update(e, seq[e - 1], m));
  EXPECT_EQ(stop, (std::vector<bool>{false, false, false, false, false, true}));
  EXPECT_EQ(es.best_epoch(), 3);
  EXPECT_EQ(es.best_value(), 0.5);
}

TEST(Train, HookDrivenEarlyStoppingRestoresBest) {
  const auto rows = synthetic(300, 1);
  auto cfg = quick(100);
  cfg.patience = 4;
  // monitored values: improve until epoch 3, then worsen
  FitHooks hooks{[](int epoch, double) { return epoch <= 3 ? 1.0 / epoch : 1.0 + epoch; }};
  const auto p = train(rows, default_true_rpm_model(), default_true_coefficients(), FeatureGroups::defaults(), cfg,
                       hooks);
  EXPECT_EQ(p.best_epoch, 3);
  ASSERT_EQ(p.history.size(), 7u);
  EXPECT_EQ(p.history[2].monitored, 1.0 / 3);
}

TEST(Train, RestoredWeightsReproduceBestValidationLoss) {
  const auto rows = synthetic(200, 2);
  std::mt19937_64 rng(3);
  auto cfg = quick(12);
  cfg.patience = 3;
  cfg.lambda = 0.1;
  auto with_rpm = rows;
  attach_predicted_rpm(default_true_rpm_model(), with_rpm);
  const auto s = fit_standardizer(with_rpm, FeatureGroups::defaults());
  auto make = [&](std::size_t lo, std::size_t hi) {
    std::vector<EnvironmentRecord> part(with_rpm.begin() + lo, with_rpm.begin() + hi);
    TrainingSet t{s.transform(part), Eigen::RowVectorXd(part.size()), Eigen::RowVectorXd(part.size())};
    const auto ef = predict_ef(default_true_coefficients(), part);
    for (std::size_t i = 0; i < part.size(); ++i) {
      t.target[i] = s.normalize_target(*part[i].shaft_power);
      t.physics[i] = s.normalize_target(ef[i]);
    }
    return t;
  };
  const auto fit_set = make(0, 160), val_set = make(160, 200);
  MlpArchitecture arch = cfg.architecture;
  arch.sensor_inputs = 5;
  const auto result = fit_network(MlpModel::initialize(arch, rng), fit_set, val_set, cfg, rng);
  ASSERT_GE(result.best_epoch, 1);
  const auto& best = result.history[static_cast<std::size_t>(result.best_epoch - 1)];
  EXPECT_EQ(evaluate_loss(result.model, val_set, cfg.lambda), best.val_loss);
  EXPECT_EQ(result.best_monitored, best.monitored);
  for (const auto& h : result.history) EXPECT_GE(h.monitored, result.best_monitored);
}

TEST(Train, DeterministicAndLambdaZeroEqualsBaseline) {
  const auto rows = synthetic(250, 3);
  const auto cfg = quick(4);
  const auto rpm = default_true_rpm_model();
  const auto a = train(rows, rpm, std::nullopt, FeatureGroups::defaults(), cfg);
  const auto b = train(rows, rpm, std::nullopt, FeatureGroups::defaults(), cfg);
  const auto c = train(rows, rpm, default_true_coefficients(), FeatureGroups::defaults(), cfg);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.model, c.model);
  auto other = cfg;
  other.seed = 5;
  EXPECT_FALSE(train(rows, rpm, std::nullopt, FeatureGroups::defaults(), other).model == a.model);
}

TEST(Predict, BatchEqualsPerRowAndRepeatable) {
  const auto rows = synthetic(200, 4);
  const auto p = train(rows, default_true_rpm_model(), std::nullopt, FeatureGroups::defaults(), quick(2));
  auto test = synthetic(30, 5);
  EXPECT_THROW(predict(p, test), SchemaError);
  attach_predicted_rpm(default_true_rpm_model(), test);
  const auto batch = predict(p, test);
  EXPECT_EQ(batch, predict(p, test));
  for (std::size_t i = 0; i < test.size(); ++i) {
    EXPECT_NEAR(predict(p, {test[i]})[0], batch[i], 1e-9 * std::abs(batch[i]));
  }
}

TEST(Train, ConfigValidation) {
  const auto rows = synthetic(100, 6);
  const auto rpm = default_true_rpm_model();
  auto cfg = quick(2);
  cfg.lambda = 0.1;
  EXPECT_THROW(train(rows, rpm, std::nullopt, FeatureGroups::defaults(), cfg), UsageError);
  for (auto mutate : std::vector<std::function<void(TrainConfig&)>>{
           [](TrainConfig& c) { c.batch_size = 0; }, [](TrainConfig& c) { c.max_epochs = 0; },
           [](TrainConfig& c) { c.patience = 0; }, [](TrainConfig& c) { c.validation_fraction = 1.0; },
           [](TrainConfig& c) { c.lambda = -0.1; }}) {
    auto bad = quick(2);
    mutate(bad);
    EXPECT_THROW(bad.validate(), UsageError);
  }
  auto tiny = quick(2);
  EXPECT_THROW(train(synthetic(2, 7), rpm, std::nullopt, FeatureGroups::defaults(), tiny), UsageError);
  for (double lambda : {0.1, 0.05, 0.4}) {
    auto ok = quick(1);
    ok.lambda = lambda;
    EXPECT_NO_THROW(ok.validate());
  }
}

TEST(History, Csv) {
  const std::vector<EpochRecord> h = {{1, 0.5, 0.25, 0.25}, {2, 0.125, 0.0625, 0.0625}};
  EXPECT_EQ(history_csv(h), "epoch,train_loss,val_loss\n1,0.5,0.25\n2,0.125,0.0625\n");
}

TEST(LambdaSweep, OrderedCellsAndBestIndex) {
  const auto train_rows = synthetic(200, 8);
  const auto test_rows = synthetic(60, 9);
  const auto rpm = default_true_rpm_model();
  const auto cells = lambda_sweep(train_rows, test_rows, {0.4, 0.0, 0.1}, rpm, default_true_coefficients(),
                                  FeatureGroups::defaults(), quick(2));
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_EQ(cells[0].lambda, 0.0);
  EXPECT_EQ(cells[2].lambda, 0.4);
  for (const auto& c : cells) ASSERT_TRUE(c.metrics.has_value()) << c.error;

  // the lambda = 0 cell equals the plain network
  const auto nn = train(train_rows, rpm, std::nullopt, FeatureGroups::defaults(), quick(2));
  auto test = test_rows;
  attach_predicted_rpm(rpm, test);
  std::vector<double> actual;
  for (const auto& r : test) actual.push_back(*r.shaft_power);
  EXPECT_EQ(evaluate(actual, predict(nn, test)).mape, cells[0].metrics->mape);

  std::size_t argmin = 0;
  for (std::size_t i = 1; i < cells.size(); ++i) {
    if (cells[i].metrics->mape < cells[argmin].metrics->mape) argmin = i;
  }
  EXPECT_EQ(best_lambda_index(cells), argmin);
  EXPECT_THROW(lambda_sweep(train_rows, test_rows, {}, rpm, default_true_coefficients(), FeatureGroups::defaults(),
                            quick(1)),
               UsageError);
}

}  // namespace
}  // namespace shaftpower
