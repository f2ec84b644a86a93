#include "shaftpower/rpm_poly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "shaftpower/error.hpp"

namespace shaftpower {

double ScaledPolynomial::operator()(double u) const {
  const double s = (u - shift) / scale;
  double acc = 0.0;
  for (Eigen::Index k = coefficients.size() - 1; k >= 0; --k) acc = acc * s + coefficients[k];
  return acc;
}

MultiplicativePolyModel::MultiplicativePolyModel(int order, std::vector<ScaledPolynomial> factors)
    : order_(order), factors_(std::move(factors)) {
  if (order_ < 0) throw UsageError("polynomial order must be >= 0");
  if (factors_.empty()) throw UsageError("RPM model needs at least one feature");
  if (factors_.front().feature != Field::speed_through_water) {
    throw UsageError("first RPM model feature must be speed through water");
  }
  FieldMask seen;
  for (const auto& f : factors_) {
    if (f.coefficients.size() != order_ + 1) {
      throw UsageError("RPM factor '" + std::string(field_id(f.feature)) + "' needs order+1 coefficients");
    }
    if (!(f.scale != 0.0) || !std::isfinite(f.scale) || !std::isfinite(f.shift) || !f.coefficients.allFinite()) {
      throw UsageError("RPM factor '" + std::string(field_id(f.feature)) + "' has non-finite parameters");
    }
    if (seen.test(static_cast<std::size_t>(f.feature))) throw UsageError("duplicate RPM feature");
    seen.set(static_cast<std::size_t>(f.feature));
  }
}

std::vector<Field> MultiplicativePolyModel::features() const {
  std::vector<Field> out;
  for (const auto& f : factors_) out.push_back(f.feature);
  return out;
}

double rpm_evaluate(const MultiplicativePolyModel& model, const EnvironmentRecord& record) {
  double rpm = 1.0;
  for (const auto& p : model.factors()) rpm *= p(record.require(p.feature));
  return rpm;
}

std::vector<double> rpm_predict(const MultiplicativePolyModel& model, const std::vector<EnvironmentRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(rpm_evaluate(model, records[i]));
    } catch (const SchemaError& e) {
      throw SchemaError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

void attach_predicted_rpm(const MultiplicativePolyModel& model, std::vector<EnvironmentRecord>& records) {
  const auto rpm = rpm_predict(model, records);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].predicted_rpm = rpm[i];
}

double pearson_correlation(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size() || x.size() < 2) return 0.0;
  const Eigen::ArrayXd dx = x.array() - x.mean();
  const Eigen::ArrayXd dy = y.array() - y.mean();
  const double sxx = dx.square().sum();
  const double syy = dy.square().sum();
  const double scale = std::max({1.0, x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff()});
  const double tiny = 1e-24 * scale * scale * static_cast<double>(x.size());
  if (!(sxx > tiny) || !(syy > tiny)) return 0.0;
  return (dx * dy).sum() / std::sqrt(sxx * syy);
}

namespace {

// Column-per-power design for one feature in scaled coordinates.
struct FeatureBasis {
  ScaledPolynomial poly;
  Eigen::MatrixXd vandermonde;  // n x (order + 1)

  Eigen::VectorXd values() const { return vandermonde * poly.coefficients; }
};

FeatureBasis make_basis(const std::vector<EnvironmentRecord>& rows, Field feature, int order) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      u[i] = rows[static_cast<std::size_t>(i)].require(feature);
    } catch (const SchemaError& e) {
      throw SchemaError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  FeatureBasis b;
  b.poly.feature = feature;
  const double lo = u.minCoeff(), hi = u.maxCoeff();
  b.poly.shift = 0.5 * (lo + hi);
  b.poly.scale = hi > lo ? 0.5 * (hi - lo) : 1.0;
  const Eigen::VectorXd s = (u.array() - b.poly.shift) / b.poly.scale;
  b.vandermonde.resize(n, order + 1);
  b.vandermonde.col(0).setOnes();
  for (int k = 1; k <= order; ++k) b.vandermonde.col(k) = b.vandermonde.col(k - 1).cwiseProduct(s);
  b.poly.coefficients = Eigen::VectorXd::Zero(order + 1);
  b.poly.coefficients[0] = 1.0;
  return b;
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& y, double ridge) {
  Eigen::MatrixXd ata = a.transpose() * a;
  const double damping = ridge * ata.trace();
  ata.diagonal().array() += damping > 0.0 ? damping : std::numeric_limits<double>::min();
  Eigen::VectorXd x = ata.ldlt().solve(a.transpose() * y);
  if (!x.allFinite()) {
    x = a.completeOrthogonalDecomposition().solve(y);
  }
  return x;
}

double mse_of(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

Eigen::VectorXd rpm_target(const std::vector<EnvironmentRecord>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].shaft_rpm) throw UsageError("row " + std::to_string(i) + ": record has no shaft RPM");
    y[static_cast<Eigen::Index>(i)] = *rows[i].shaft_rpm;
  }
  return y;
}

}  // namespace

RpmFitResult fit_rpm_als(const std::vector<EnvironmentRecord>& train, const std::vector<Field>& features, int order,
                         const RpmFitConfig& config) {
  if (train.empty()) throw UsageError("fit_rpm_als: training set is empty");
  if (features.empty() || features.front() != Field::speed_through_water) {
    throw UsageError("fit_rpm_als: features must start with speed through water");
  }
  if (order < 0) throw UsageError("fit_rpm_als: order must be >= 0");
  if (config.max_sweeps < 1) throw UsageError("fit_rpm_als: max_sweeps must be >= 1");
  const Eigen::VectorXd y = rpm_target(train);

  std::vector<FeatureBasis> bases;
  for (Field f : features) bases.push_back(make_basis(train, f, order));
  const std::size_t m = bases.size();

  // p_1 from a direct fit on V, all other factors identically one.
  bases[0].poly.coefficients = ridge_solve(bases[0].vandermonde, y, config.ridge);
  std::vector<Eigen::VectorXd> values;
  for (const auto& b : bases) values.push_back(b.values());

  auto product_except = [&](std::size_t skip) {
    Eigen::VectorXd q = Eigen::VectorXd::Ones(y.size());
    for (std::size_t j = 0; j < m; ++j) {
      if (j != skip) q.array() *= values[j].array();
    }
    return q;
  };

  RpmFitResult out;
  Eigen::VectorXd pred = product_except(m);
  double mse = mse_of(pred, y);
  out.mse_history.push_back(mse);

  if (m > 1) {
    for (int sweep = 0; sweep < config.max_sweeps; ++sweep) {
      const double before = mse;
      for (std::size_t i = 0; i < m; ++i) {
        const Eigen::VectorXd q = product_except(i);
        const Eigen::MatrixXd a = bases[i].vandermonde.array().colwise() * q.array();
        const Eigen::VectorXd coef = ridge_solve(a, y, config.ridge);
        const Eigen::VectorXd trial_values = bases[i].vandermonde * coef;
        const double trial = mse_of(trial_values.cwiseProduct(q), y);
        // The damping term can in principle cost a few ulps; never accept a worse fit.
        if (trial <= mse) {
          bases[i].poly.coefficients = coef;
          values[i] = trial_values;
          mse = trial;
        }
      }
      out.mse_history.push_back(mse);
      out.sweeps = sweep + 1;
      if (before <= 0.0 || (before - mse) / before < config.tolerance) {
        out.converged = true;
        break;
      }
    }
  } else {
    out.converged = true;
  }

  // Canonical form: trailing factors have unit mean over the training data.
  for (std::size_t j = 1; j < m; ++j) {
    const double mean = values[j].mean();
    if (mean == 0.0 || !std::isfinite(mean)) continue;
    bases[j].poly.coefficients /= mean;
    bases[0].poly.coefficients *= mean;
    values[j] /= mean;
  }

  std::vector<ScaledPolynomial> factors;
  for (auto& b : bases) factors.push_back(std::move(b.poly));
  out.model = MultiplicativePolyModel(order, std::move(factors));
  return out;
}

std::vector<Field> greedy_feature_selection(const std::vector<EnvironmentRecord>& train,
                                            const std::vector<Field>& candidates,
                                            const FeatureSelectionConfig& config) {
  if (train.empty()) throw UsageError("greedy_feature_selection: training set is empty");
  if (config.validation_stride < 2) throw UsageError("greedy_feature_selection: validation_stride must be >= 2");

  std::vector<EnvironmentRecord> fit_rows, val_rows;
  for (std::size_t i = 0; i < train.size(); ++i) {
    (i % static_cast<std::size_t>(config.validation_stride) == 0 ? val_rows : fit_rows).push_back(train[i]);
  }
  if (fit_rows.empty() || val_rows.empty()) throw UsageError("greedy_feature_selection: too few rows");
  const Eigen::VectorXd y_fit = rpm_target(fit_rows);
  const Eigen::VectorXd y_val = rpm_target(val_rows);

  auto score = [&](const std::vector<Field>& feats, Eigen::VectorXd* residual) {
    const auto fit = fit_rpm_als(fit_rows, feats, config.order, config.fit);
    if (residual != nullptr) {
      const auto p = rpm_predict(fit.model, fit_rows);
      *residual = y_fit - Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
    }
    const auto pv = rpm_predict(fit.model, val_rows);
    return mse_of(Eigen::Map<const Eigen::VectorXd>(pv.data(), static_cast<Eigen::Index>(pv.size())), y_val);
  };

  std::vector<Field> selected = {Field::speed_through_water};
  std::vector<Field> remaining;
  for (Field f : candidates) {
    if (f != Field::speed_through_water &&
        std::find(remaining.begin(), remaining.end(), f) == remaining.end()) {
      remaining.push_back(f);
    }
  }
  Eigen::VectorXd residual;
  double current = score(selected, &residual);
  const double floor = 1e-24 * std::max(1.0, y_val.squaredNorm() / static_cast<double>(y_val.size()));

  while (!remaining.empty() && current > floor) {
    std::size_t best = remaining.size();
    double best_corr = 0.0;
    for (std::size_t c = 0; c < remaining.size(); ++c) {
      Eigen::VectorXd x(static_cast<Eigen::Index>(fit_rows.size()));
      for (std::size_t i = 0; i < fit_rows.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = fit_rows[i].require(remaining[c]);
      }
      const double corr = std::abs(pearson_correlation(x, residual));
      if (corr > best_corr) {
        best_corr = corr;
        best = c;
      }
    }
    if (best == remaining.size()) break;  // every candidate degenerate

    auto trial = selected;
    trial.push_back(remaining[best]);
    Eigen::VectorXd trial_residual;
    const double next = score(trial, &trial_residual);
    if (!((current - next) / current >= config.min_relative_improvement)) break;
    selected = std::move(trial);
    residual = std::move(trial_residual);
    current = next;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return selected;
}

}  // namespace shaftpower
