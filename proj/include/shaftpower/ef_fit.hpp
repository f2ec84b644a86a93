#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "shaftpower/physics.hpp"
#include "shaftpower/record.hpp"

namespace shaftpower {

struct EfFitConfig {
  int max_iterations = 5000;
  double learning_rate = 0.05;
  /// Relative MSE improvement over `convergence_window` iterations below which a run stops.
  double convergence_tol = 1e-10;
  int convergence_window = 20;
  int multistart_count = 8;
  std::uint64_t seed = 0;
  double gamma = kDefaultWaveExponent;
  double water_density = kDefaultWaterDensity;

  void validate() const;
};

struct EfFitResult {
  ResistanceCoefficients coefficients;
  double train_mse = 0.0;
  double initial_mse = 0.0;  ///< MSE at the winning restart's starting point
  int iterations_used = 0;
  bool converged = false;
  int restart_index = 0;
  int diverged_restarts = 0;
};

/// Least-squares fit of the seven resistance coefficients to measured shaft
/// power: full-batch Adam on an unconstrained reparameterisation
/// (softplus for c and f_g, logistic for f_c), restarted from
/// `multistart_count` seeded initial points. Returns the lowest-MSE run.
EfFitResult fit_ef(const std::vector<EnvironmentRecord>& train, const EfFitConfig& config = {});

/// Total physical power for each record. Domain errors carry the row index.
std::vector<double> predict_ef(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records);

/// measured - predicted, per record.
std::vector<double> ef_residuals(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records);

/// Mean squared error of the physical power against shaft_power together with
/// its analytic gradient with respect to (a, b, c, f_c, f_h, f_s, f_g).
struct EfObjective {
  double mse = 0.0;
  Eigen::Matrix<double, 7, 1> gradient = Eigen::Matrix<double, 7, 1>::Zero();
};
EfObjective ef_objective(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records);

}  // namespace shaftpower
