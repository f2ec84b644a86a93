#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Core>

#include "shaftpower/error.hpp"

namespace shaftpower {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates for one parameter tensor.
struct AdamState {
  Eigen::ArrayXXd m;
  Eigen::ArrayXXd v;
  std::int64_t timestep = 0;
};

/// One bias-corrected Adam update of `params` in place. The moment buffers
/// are sized lazily on the first call.
template <typename DerivedP, typename DerivedG>
void adam_step(Eigen::DenseBase<DerivedP>& params, const Eigen::DenseBase<DerivedG>& grads, AdamState& state,
               const AdamConfig& config) {
  if (params.rows() != grads.rows() || params.cols() != grads.cols()) {
    throw UsageError("adam_step: parameter and gradient shapes differ");
  }
  if (state.timestep == 0 && state.m.size() == 0) {
    state.m = Eigen::ArrayXXd::Zero(params.rows(), params.cols());
    state.v = Eigen::ArrayXXd::Zero(params.rows(), params.cols());
  } else if (state.m.rows() != params.rows() || state.m.cols() != params.cols()) {
    throw UsageError("adam_step: state shape does not match parameters");
  }
  ++state.timestep;
  const auto g = grads.derived().array();
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * g;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * g.square();
  const double t = static_cast<double>(state.timestep);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  params.derived().array() -=
      config.learning_rate * (state.m / bias1) / ((state.v / bias2).sqrt() + config.epsilon);
}

}  // namespace shaftpower
