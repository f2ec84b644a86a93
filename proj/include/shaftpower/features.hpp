#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "shaftpower/record.hpp"

namespace shaftpower {

enum class DirectionEncoding { raw, sin_cos };

/// Assignment of network inputs to the three input branches.
struct FeatureGroups {
  std::vector<Field> copernicus;
  std::vector<Field> sensor;
  std::vector<Field> external;

  static FeatureGroups defaults();
  /// Groups non-empty, pairwise disjoint, no repeats, no target columns.
  void validate() const;

  bool operator==(const FeatureGroups&) const = default;
};

/// One network input column derived from a record field.
struct InputColumn {
  enum class Transform { identity, sine, cosine };
  Field field;
  Transform transform = Transform::identity;

  std::string name() const;
  double extract(const EnvironmentRecord& r) const;
};

std::vector<InputColumn> input_columns(const std::vector<Field>& group, DirectionEncoding encoding);

/// Inputs of a batch, one column per sample, already standardised.
struct GroupedInputs {
  Eigen::MatrixXd copernicus;
  Eigen::MatrixXd sensor;
  Eigen::MatrixXd external;

  Eigen::Index samples() const { return copernicus.cols(); }
  GroupedInputs gather(const std::vector<Eigen::Index>& indices) const;
};

/// Input standardisation (z-score per column) and min-max target normalisation.
struct Standardizer {
  FeatureGroups groups;
  DirectionEncoding encoding = DirectionEncoding::raw;
  std::vector<std::string> column_names;  // copernicus, sensor, external order
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;
  double target_min = 0.0;
  double target_max = 1.0;

  GroupedInputs transform(const std::vector<EnvironmentRecord>& rows) const;
  double normalize_target(double kw) const { return (kw - target_min) / (target_max - target_min); }
  double denormalize_target(double y) const { return target_min + y * (target_max - target_min); }
};

/// Statistics from `train` only. Throws UsageError for an empty set and
/// SchemaError naming any zero-variance input column or a constant target.
Standardizer fit_standardizer(const std::vector<EnvironmentRecord>& train, const FeatureGroups& groups,
                              DirectionEncoding encoding = DirectionEncoding::raw);

}  // namespace shaftpower
