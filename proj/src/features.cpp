#include "shaftpower/features.hpp"

#include <algorithm>
#include <cmath>

#include "shaftpower/error.hpp"

namespace shaftpower {

FeatureGroups FeatureGroups::defaults() {
  return {
      .copernicus = {Field::wave_height, Field::swell_height, Field::wave_dir, Field::swell_dir,
                     Field::wind_dir, Field::wind_speed},
      .sensor = {Field::speed_through_water, Field::draught, Field::sea_depth, Field::sea_temp,
                 Field::predicted_rpm},
      .external = {Field::days_since_polish, Field::days_since_drydock},
  };
}

void FeatureGroups::validate() const {
  if (copernicus.empty() || sensor.empty() || external.empty()) {
    throw UsageError("feature groups must all be non-empty");
  }
  FieldMask seen;
  for (const auto* g : {&copernicus, &sensor, &external}) {
    for (Field f : *g) {
      if (f == Field::shaft_power || f == Field::shaft_rpm) {
        throw UsageError("ground-truth column '" + std::string(field_id(f)) + "' cannot be a network input");
      }
      const auto bit = static_cast<std::size_t>(f);
      if (seen.test(bit)) throw UsageError("feature '" + std::string(field_id(f)) + "' assigned twice");
      seen.set(bit);
    }
  }
}

std::string InputColumn::name() const {
  std::string n(field_id(field));
  if (transform == Transform::sine) n = "sin(" + n + ")";
  if (transform == Transform::cosine) n = "cos(" + n + ")";
  return n;
}

double InputColumn::extract(const EnvironmentRecord& r) const {
  const double v = r.require(field);
  switch (transform) {
    case Transform::sine: return std::sin(v);
    case Transform::cosine: return std::cos(v);
    default: return v;
  }
}

std::vector<InputColumn> input_columns(const std::vector<Field>& group, DirectionEncoding encoding) {
  std::vector<InputColumn> cols;
  for (Field f : group) {
    if (encoding == DirectionEncoding::sin_cos && is_direction(f)) {
      cols.push_back({f, InputColumn::Transform::sine});
      cols.push_back({f, InputColumn::Transform::cosine});
    } else {
      cols.push_back({f, InputColumn::Transform::identity});
    }
  }
  return cols;
}

GroupedInputs GroupedInputs::gather(const std::vector<Eigen::Index>& indices) const {
  return {copernicus(Eigen::all, indices), sensor(Eigen::all, indices), external(Eigen::all, indices)};
}

namespace {

Eigen::MatrixXd raw_matrix(const std::vector<EnvironmentRecord>& rows, const std::vector<InputColumn>& cols,
                           Eigen::Index row_offset, const Standardizer* s) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(cols.size()), static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto& r = rows[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double v;
      try {
        v = cols[static_cast<std::size_t>(i)].extract(r);
      } catch (const SchemaError& e) {
        throw SchemaError("row " + std::to_string(j) + ": " + e.what());
      }
      if (!std::isfinite(v)) {
        throw SchemaError("row " + std::to_string(j) + ": non-finite value for '" +
                          cols[static_cast<std::size_t>(i)].name() + "'");
      }
      m(i, j) = v;
    }
  }
  if (s != nullptr) {
    const auto n = m.rows();
    m = (m.colwise() - s->mean.segment(row_offset, n)).array().colwise() /
        s->stddev.segment(row_offset, n).array();
  }
  return m;
}

}  // namespace

GroupedInputs Standardizer::transform(const std::vector<EnvironmentRecord>& rows) const {
  const auto cop = input_columns(groups.copernicus, encoding);
  const auto sen = input_columns(groups.sensor, encoding);
  const auto ext = input_columns(groups.external, encoding);
  const auto n_cop = static_cast<Eigen::Index>(cop.size());
  const auto n_sen = static_cast<Eigen::Index>(sen.size());
  if (n_cop + n_sen + static_cast<Eigen::Index>(ext.size()) != mean.size()) {
    throw SchemaError("standardizer does not match its feature groups");
  }
  return {raw_matrix(rows, cop, 0, this), raw_matrix(rows, sen, n_cop, this),
          raw_matrix(rows, ext, n_cop + n_sen, this)};
}

Standardizer fit_standardizer(const std::vector<EnvironmentRecord>& train, const FeatureGroups& groups,
                              DirectionEncoding encoding) {
  if (train.empty()) throw UsageError("cannot fit a standardizer on an empty training set");
  groups.validate();
  Standardizer s;
  s.groups = groups;
  s.encoding = encoding;

  std::vector<InputColumn> cols;
  for (const auto* g : {&groups.copernicus, &groups.sensor, &groups.external}) {
    auto c = input_columns(*g, encoding);
    cols.insert(cols.end(), c.begin(), c.end());
  }
  const Eigen::MatrixXd x = raw_matrix(train, cols, 0, nullptr);
  s.mean = x.rowwise().mean();
  s.stddev = ((x.colwise() - s.mean).array().square().rowwise().mean()).sqrt();
  for (Eigen::Index i = 0; i < s.stddev.size(); ++i) {
    const auto& c = cols[static_cast<std::size_t>(i)];
    s.column_names.push_back(c.name());
    if (!(s.stddev[i] > 1e-12 * std::max(1.0, std::abs(s.mean[i])))) {
      throw SchemaError("input feature '" + c.name() + "' has zero variance in the training set");
    }
  }

  const auto power = [&] {
    std::vector<double> p;
    p.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (!train[i].shaft_power) throw SchemaError("row " + std::to_string(i) + ": missing shaft power");
      p.push_back(*train[i].shaft_power);
    }
    return p;
  }();
  const auto [lo, hi] = std::minmax_element(power.begin(), power.end());
  s.target_min = *lo;
  s.target_max = *hi;
  if (!(s.target_max > s.target_min)) throw SchemaError("target shaft power is constant in the training set");
  return s;
}

}  // namespace shaftpower
