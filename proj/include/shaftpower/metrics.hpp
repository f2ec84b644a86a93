#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace detail {

template <typename A, typename B>
void check_metric_inputs(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& yhat, const char* name) {
  if (y.size() == 0) throw UsageError(std::string(name) + ": empty input");
  if (y.size() != yhat.size()) throw UsageError(std::string(name) + ": length mismatch");
}

}  // namespace detail

/// (1/n) sum |y - yhat|
template <typename A, typename B>
typename A::Scalar mae(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& yhat) {
  detail::check_metric_inputs(y, yhat, "mae");
  return (y.derived().array() - yhat.derived().array()).abs().mean();
}

/// sqrt((1/n) sum (y - yhat)^2)
template <typename A, typename B>
typename A::Scalar rmse(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& yhat) {
  detail::check_metric_inputs(y, yhat, "rmse");
  using std::sqrt;
  return sqrt((y.derived().array() - yhat.derived().array()).square().mean());
}

/// Mean absolute percentage error, in percent. Throws DomainError if any |y| < 1e-9.
template <typename A, typename B>
typename A::Scalar mape(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& yhat) {
  detail::check_metric_inputs(y, yhat, "mape");
  if ((y.derived().array().abs() < 1e-9).any()) throw DomainError("mape: ground truth too close to zero");
  return 100.0 * ((y.derived().array() - yhat.derived().array()) / y.derived().array()).abs().mean();
}

/// Coefficient of determination; negative when worse than predicting the mean.
template <typename A, typename B>
typename A::Scalar r2(const Eigen::DenseBase<A>& y, const Eigen::DenseBase<B>& yhat) {
  detail::check_metric_inputs(y, yhat, "r2");
  const auto ya = y.derived().array();
  const auto ss_tot = (ya - ya.mean()).square().sum();
  if (!(ss_tot > 0)) throw DomainError("r2: ground truth has zero variance");
  return 1.0 - (ya - yhat.derived().array()).square().sum() / ss_tot;
}

struct MetricSet {
  double mae = 0.0;
  double rmse = 0.0;
  double mape = 0.0;
  double r2 = 0.0;
};

MetricSet evaluate(std::span<const double> actual, std::span<const double> predicted);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Metrics aggregated over seeded repeats. `std` is the sample (n-1)
/// standard deviation and is zero when repeat_count == 1.
struct EvalReport {
  std::string method;   // EF | NN | PGNN
  std::string dataset;  // vessel / dataset tag
  MeanStd mae, rmse, mape, r2;
  std::size_t repeat_count = 0;
  std::string std_kind = "sample";
};

EvalReport aggregate(std::span<const MetricSet> repeats, std::string method, std::string dataset);

/// Aligned text table: Vessel / Method / MAE / RMSE / R2 / MAPE (%).
std::string format_report_table(std::span<const EvalReport> reports);

}  // namespace shaftpower
