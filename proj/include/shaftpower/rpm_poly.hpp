#pragma once

#include <vector>

#include <Eigen/Core>

#include "shaftpower/record.hpp"

namespace shaftpower {

/// Univariate polynomial in the affinely scaled variable s = (u - shift) / scale,
/// coefficients in ascending powers of s.
struct ScaledPolynomial {
  Field feature = Field::speed_through_water;
  double shift = 0.0;
  double scale = 1.0;
  Eigen::VectorXd coefficients;

  double operator()(double u) const;
  bool operator==(const ScaledPolynomial& o) const {
    return feature == o.feature && shift == o.shift && scale == o.scale && coefficients == o.coefficients;
  }
};

/// RPM(u) = prod_i p_i(u_i). The first factor is always speed through water.
class MultiplicativePolyModel {
 public:
  MultiplicativePolyModel() = default;
  MultiplicativePolyModel(int order, std::vector<ScaledPolynomial> factors);

  int order() const { return order_; }
  const std::vector<ScaledPolynomial>& factors() const { return factors_; }
  std::vector<Field> features() const;

  bool operator==(const MultiplicativePolyModel&) const = default;

 private:
  int order_ = 3;
  std::vector<ScaledPolynomial> factors_;
};

inline const std::vector<Field>& default_rpm_features() {
  static const std::vector<Field> f = {Field::speed_through_water, Field::draught, Field::wind_speed,
                                       Field::swell_height};
  return f;
}

/// Product of the factor polynomials at the record (Horner evaluation).
/// Throws SchemaError if the record lacks one of the model features.
double rpm_evaluate(const MultiplicativePolyModel& model, const EnvironmentRecord& record);

std::vector<double> rpm_predict(const MultiplicativePolyModel& model, const std::vector<EnvironmentRecord>& records);

/// Sets predicted_rpm on every record.
void attach_predicted_rpm(const MultiplicativePolyModel& model, std::vector<EnvironmentRecord>& records);

struct RpmFitConfig {
  int max_sweeps = 100;
  double tolerance = 1e-8;  ///< relative MSE improvement per sweep
  double ridge = 1e-8;      ///< damping, as a fraction of trace(A^T A)
};

struct RpmFitResult {
  MultiplicativePolyModel model;
  std::vector<double> mse_history;  ///< after initialisation, then after each sweep
  int sweeps = 0;
  bool converged = false;
};

/// Alternating least squares: each factor in turn is refitted by linear least
/// squares with the remaining factors held fixed. Trailing factors are
/// normalised to unit mean over `train`.
RpmFitResult fit_rpm_als(const std::vector<EnvironmentRecord>& train, const std::vector<Field>& features,
                         int order = 3, const RpmFitConfig& config = {});

struct FeatureSelectionConfig {
  int order = 3;
  RpmFitConfig fit;
  /// Every `validation_stride`-th row is held out to score candidates.
  int validation_stride = 5;
  /// Stop once the best candidate improves validation MSE by less than this fraction.
  double min_relative_improvement = 0.01;
};

/// Greedy forward selection: starting from [V], repeatedly add the candidate
/// whose values correlate most (in absolute Pearson value) with the current
/// residuals, while validation MSE keeps improving.
std::vector<Field> greedy_feature_selection(const std::vector<EnvironmentRecord>& train,
                                            const std::vector<Field>& candidates,
                                            const FeatureSelectionConfig& config = {});

/// Pearson correlation; 0 when either side has zero variance.
double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

}  // namespace shaftpower
