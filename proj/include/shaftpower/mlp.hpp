#pragma once

// Branched dense network: each input group passes through two dense layers,
// the branch outputs are concatenated (copernicus, sensor, external) and fed
// to two more dense layers, dropout, and a single linear output unit.

#include <array>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "shaftpower/features.hpp"

namespace shaftpower {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out

  Eigen::Index inputs() const { return weight.cols(); }
  Eigen::Index outputs() const { return weight.rows(); }
  bool operator==(const DenseLayer& o) const { return weight == o.weight && bias == o.bias; }
};

struct MlpArchitecture {
  int copernicus_inputs = 6;
  int sensor_inputs = 5;
  int external_inputs = 2;
  std::array<int, 2> copernicus_widths = {128, 64};
  std::array<int, 2> sensor_widths = {64, 32};
  std::array<int, 2> external_widths = {64, 32};
  std::array<int, 2> trunk_widths = {128, 64};
  double dropout_rate = 0.2;

  int concat_width() const { return copernicus_widths[1] + sensor_widths[1] + external_widths[1]; }
  void validate() const;
  bool operator==(const MlpArchitecture&) const = default;
};

struct MlpModel {
  MlpArchitecture arch;
  std::array<DenseLayer, 2> copernicus;
  std::array<DenseLayer, 2> sensor;
  std::array<DenseLayer, 2> external;
  std::array<DenseLayer, 2> trunk;
  DenseLayer output;

  /// All parameters zero, shapes from `arch`.
  static MlpModel zeros(const MlpArchitecture& arch);
  /// Weights drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
  static MlpModel initialize(const MlpArchitecture& arch, std::mt19937_64& rng);

  /// Visits every layer in a fixed order (branches, trunk, output).
  template <typename F>
  void for_each_layer(F&& f) {
    for (auto* group : {&copernicus, &sensor, &external, &trunk}) {
      for (auto& layer : *group) f(layer);
    }
    f(output);
  }
  template <typename F>
  void for_each_layer(F&& f) const {
    for (const auto* group : {&copernicus, &sensor, &external, &trunk}) {
      for (const auto& layer : *group) f(layer);
    }
    f(output);
  }

  Eigen::Index parameter_count() const;
  bool all_finite() const;
  /// Parameters flattened in for_each_layer order (weights column-major, then bias).
  Eigen::VectorXd flatten() const;
  void unflatten(const Eigen::Ref<const Eigen::VectorXd>& params);

  bool operator==(const MlpModel&) const = default;
};

using MlpGradients = MlpModel;

/// Intermediate values of a forward pass, kept for backpropagation.
struct ForwardCache {
  struct Branch {
    Eigen::MatrixXd input, z1, a1, z2, a2;
  };
  std::array<Branch, 3> branches;
  Eigen::MatrixXd concat;
  Eigen::MatrixXd z1, a1, z2, a2;
  Eigen::ArrayXXd keep_mask;  // already divided by the keep probability; empty at inference
  Eigen::MatrixXd dropped;
  Eigen::RowVectorXd output;
};

/// Normalised power prediction per sample. Dropout (inverted scaling) is
/// applied only when `training` is true, drawing the mask from `rng`.
Eigen::RowVectorXd forward(const MlpModel& model, const GroupedInputs& inputs, bool training,
                           std::mt19937_64* rng = nullptr, ForwardCache* cache = nullptr);

/// Gradients of the loss with respect to every parameter given dL/d(output).
/// Rectifier subgradient at zero is taken as zero.
MlpGradients backward(const MlpModel& model, const ForwardCache& cache, const Eigen::RowVectorXd& output_grad);

/// mean|pred - target| + lambda * mean|pred - physics|. An empty `physics`
/// is only accepted with lambda == 0.
double composite_loss(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& target,
                      const Eigen::RowVectorXd& physics, double lambda);

/// d(composite_loss)/d(pred); the absolute-value subgradient at zero is zero.
Eigen::RowVectorXd composite_loss_gradient(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& target,
                                           const Eigen::RowVectorXd& physics, double lambda);

}  // namespace shaftpower
