#include "shaftpower/metrics.hpp"

#include <algorithm>
#include <cstdio>

namespace shaftpower {

MetricSet evaluate(std::span<const double> actual, std::span<const double> predicted) {
  const Eigen::Map<const Eigen::VectorXd> y(actual.data(), static_cast<Eigen::Index>(actual.size()));
  const Eigen::Map<const Eigen::VectorXd> p(predicted.data(), static_cast<Eigen::Index>(predicted.size()));
  return {mae(y, p), rmse(y, p), mape(y, p), r2(y, p)};
}

EvalReport aggregate(std::span<const MetricSet> repeats, std::string method, std::string dataset) {
  if (repeats.empty()) throw UsageError("aggregate: no repeats");
  EvalReport r;
  r.method = std::move(method);
  r.dataset = std::move(dataset);
  r.repeat_count = repeats.size();
  const auto n = static_cast<double>(repeats.size());
  auto summarize = [&](double MetricSet::*field) {
    MeanStd ms;
    for (const auto& m : repeats) ms.mean += m.*field;
    ms.mean /= n;
    if (repeats.size() > 1) {
      double ss = 0.0;
      for (const auto& m : repeats) ss += (m.*field - ms.mean) * (m.*field - ms.mean);
      ms.std = std::sqrt(ss / (n - 1.0));
    }
    return ms;
  };
  r.mae = summarize(&MetricSet::mae);
  r.rmse = summarize(&MetricSet::rmse);
  r.mape = summarize(&MetricSet::mape);
  r.r2 = summarize(&MetricSet::r2);
  return r;
}

std::string format_report_table(std::span<const EvalReport> reports) {
  auto cell = [](const MeanStd& m, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", precision, m.mean, precision, m.std);
    return std::string(buf);
  };
  std::vector<std::array<std::string, 6>> rows;
  rows.push_back({"Vessel", "Method", "MAE", "RMSE", "R2", "MAPE (%)"});
  for (const auto& r : reports) {
    rows.push_back({r.dataset, r.method, cell(r.mae, 2), cell(r.rmse, 2), cell(r.r2, 3), cell(r.mape, 2)});
  }
  // "±" is two bytes but one column wide.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::array<std::size_t, 6> widths{};
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < 6; ++i) widths[i] = std::max(widths[i], width(row[i]));
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& s = rows[r][i];
      const std::string pad(widths[i] - width(s), ' ');
      out += i < 2 ? s + pad : pad + s;
      out += i + 1 < 6 ? "  " : "\n";
    }
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w + 2;
      out += std::string(total - 2, '-') + "\n";
    }
  }
  return out;
}

}  // namespace shaftpower
