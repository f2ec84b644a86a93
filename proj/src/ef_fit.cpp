#include "shaftpower/ef_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "shaftpower/adam.hpp"

namespace shaftpower {

namespace {

using Vector7 = Eigen::Matrix<double, 7, 1>;

enum Param { kA, kB, kC, kFc, kFh, kFs, kFg };

// Parameter-independent per-row quantities of the power model.
struct EfDesign {
  Eigen::ArrayXd speed;       // V
  Eigen::ArrayXd draught;     // T
  Eigen::ArrayXd wind_load;   // V * rho * v^2 * cos(d_wind)
  Eigen::ArrayXd abs_cos;     // |cos d_wind|
  Eigen::ArrayXd abs_sin;     // |sin d_wind|
  Eigen::ArrayXd wave_load;   // V * h^gamma * d_water * (0.667 + 0.333 cos d_wave)
  Eigen::ArrayXd measured;    // shaft power

  Eigen::Index size() const { return speed.size(); }
};

EfDesign make_design(const std::vector<EnvironmentRecord>& rows, double gamma, double water_density,
                     bool need_target) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  EfDesign d;
  d.speed.resize(n);
  d.draught.resize(n);
  d.wind_load.resize(n);
  d.abs_cos.resize(n);
  d.abs_sin.resize(n);
  d.wave_load.resize(n);
  d.measured.resize(need_target ? n : 0);
  // Unit coefficients purely to reuse the validated component formulas.
  const ResistanceCoefficients unit({.a = 0, .b = 0, .c = 1, .f_c = 1, .f_h = 1, .f_s = 0, .f_g = 1,
                                     .gamma = gamma, .water_density = water_density});
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    try {
      if (!(r.speed_through_water > 0.0)) throw DomainError("speed through water must be > 0");
      detail::require_finite(r.draught, "draught");
      d.speed[i] = r.speed_through_water;
      d.draught[i] = r.draught;
      // with f_c = f_h = 1 the drag coefficient reduces to rho
      d.wind_load[i] = r.speed_through_water * wind_resistance(unit, r.air_temp, r.wind_dir, r.wind_speed);
      d.abs_cos[i] = std::abs(std::cos(r.wind_dir));
      d.abs_sin[i] = std::abs(std::sin(r.wind_dir));
      d.wave_load[i] = r.speed_through_water * wave_resistance(unit, r.wave_height, r.wave_dir);
      if (need_target) {
        if (!r.shaft_power) throw UsageError("record has no shaft power");
        d.measured[i] = *r.shaft_power;
      }
    } catch (const DomainError& e) {
      throw DomainError("row " + std::to_string(i) + ": " + e.what());
    } catch (const UsageError& e) {
      throw UsageError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  return d;
}

Eigen::ArrayXd design_power(const EfDesign& d, const ResistanceCoefficients& k) {
  const Eigen::ArrayXd flow = k.b() + d.speed;
  const Eigen::ArrayXd calm = k.c() * (k.a() + d.draught) * flow.cube();
  const Eigen::ArrayXd drag = k.f_c() * k.f_h() + (1.0 - k.f_c()) * (k.f_h() * d.abs_cos + k.f_s() * d.abs_sin);
  return calm + d.wind_load * drag + k.f_g() * d.wave_load;
}

// MSE and its gradient with respect to the natural coefficients.
EfObjective design_objective(const EfDesign& d, const ResistanceCoefficients& k) {
  const double a = k.a(), b = k.b(), c = k.c(), fc = k.f_c(), fh = k.f_h(), fs = k.f_s(), fg = k.f_g();
  const Eigen::ArrayXd flow = b + d.speed;
  const Eigen::ArrayXd flow2 = flow.square();
  const Eigen::ArrayXd lever = a + d.draught;
  const Eigen::ArrayXd calm_shape = lever * flow2 * flow;
  const Eigen::ArrayXd mixed = fh * d.abs_cos + fs * d.abs_sin;
  const Eigen::ArrayXd drag = fc * fh + (1.0 - fc) * mixed;
  const Eigen::ArrayXd power = c * calm_shape + d.wind_load * drag + fg * d.wave_load;
  const Eigen::ArrayXd resid = power - d.measured;
  const double n = static_cast<double>(d.size());

  EfObjective out;
  out.mse = resid.square().sum() / n;
  const Eigen::ArrayXd w = (2.0 / n) * resid;
  out.gradient[kA] = (w * c * flow2 * flow).sum();
  out.gradient[kB] = (w * 3.0 * c * lever * flow2).sum();
  out.gradient[kC] = (w * calm_shape).sum();
  out.gradient[kFc] = (w * d.wind_load * (fh - mixed)).sum();
  out.gradient[kFh] = (w * d.wind_load * (fc + (1.0 - fc) * d.abs_cos)).sum();
  out.gradient[kFs] = (w * d.wind_load * (1.0 - fc) * d.abs_sin).sum();
  out.gradient[kFg] = (w * d.wave_load).sum();
  return out;
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_inverse(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }
double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

// Maps the unconstrained optimisation vector onto valid coefficients.
struct Reparameterization {
  double scale_c = 1.0;
  double scale_wind = 1.0;
  double scale_wave = 1.0;
  double gamma = kDefaultWaveExponent;
  double water_density = kDefaultWaterDensity;

  // softplus can underflow to exactly zero far in the negative tail
  static constexpr double kMinPositive = 1e-300;

  ResistanceCoefficients coefficients(const Vector7& t) const {
    return ResistanceCoefficients({.a = t[kA],
                                   .b = t[kB],
                                   .c = std::max(scale_c * softplus(t[kC]), kMinPositive),
                                   .f_c = logistic(t[kFc]),
                                   .f_h = scale_wind * t[kFh],
                                   .f_s = scale_wind * t[kFs],
                                   .f_g = scale_wave * softplus(t[kFg]),
                                   .gamma = gamma,
                                   .water_density = water_density});
  }

  // Chain rule from natural-coefficient gradient to optimisation-vector gradient.
  Vector7 pullback(const Vector7& t, const Vector7& g) const {
    Vector7 out = g;
    out[kC] *= scale_c * logistic(t[kC]);
    const double s = logistic(t[kFc]);
    out[kFc] *= s * (1.0 - s);
    out[kFh] *= scale_wind;
    out[kFs] *= scale_wind;
    out[kFg] *= scale_wave * logistic(t[kFg]);
    return out;
  }
};

struct RunResult {
  Vector7 theta;
  double mse = std::numeric_limits<double>::infinity();
  double initial_mse = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

RunResult run_adam(const EfDesign& design, const Reparameterization& rp, Vector7 theta,
                   const EfFitConfig& config) {
  // Work on MSE / mean(y^2) so the objective is O(1) regardless of power units.
  const double scale = 1.0 / std::max(design.measured.square().mean(), std::numeric_limits<double>::min());
  AdamState state;
  const AdamConfig adam{.learning_rate = config.learning_rate};
  // Learning rate decays geometrically to 1e-3 of its initial value.
  const double decay = std::pow(1e-3, 1.0 / std::max(1, config.max_iterations));

  RunResult out;
  std::vector<double> best_history;
  best_history.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
  AdamConfig step_cfg = adam;
  for (int it = 0; it <= config.max_iterations; ++it) {
    const auto k = rp.coefficients(theta);
    const auto obj = design_objective(design, k);
    if (!std::isfinite(obj.mse) || !obj.gradient.allFinite()) {
      out.diverged = true;
      out.iterations = it;
      return out;
    }
    if (it == 0) out.initial_mse = obj.mse;
    if (obj.mse < out.mse) {
      out.mse = obj.mse;
      out.theta = theta;
    }
    best_history.push_back(out.mse);
    out.iterations = it;
    const auto w = static_cast<std::size_t>(config.convergence_window);
    if (best_history.size() > w) {
      const double past = best_history[best_history.size() - 1 - w];
      if (past <= 0.0 || (past - out.mse) / past < config.convergence_tol) {
        out.converged = true;
        break;
      }
    }
    if (it == config.max_iterations) break;
    Vector7 grad = rp.pullback(theta, obj.gradient) * scale;
    adam_step(theta, grad, state, step_cfg);
    step_cfg.learning_rate *= decay;
  }
  return out;
}

}  // namespace

void EfFitConfig::validate() const {
  if (max_iterations < 1) throw UsageError("ef fit: max_iterations must be >= 1");
  if (!(learning_rate > 0.0)) throw UsageError("ef fit: learning_rate must be > 0");
  if (multistart_count < 1) throw UsageError("ef fit: multistart_count must be >= 1");
  if (convergence_window < 1) throw UsageError("ef fit: convergence_window must be >= 1");
  if (!(convergence_tol >= 0.0)) throw UsageError("ef fit: convergence_tol must be >= 0");
}

EfObjective ef_objective(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records) {
  if (records.empty()) throw UsageError("ef objective: no records");
  return design_objective(make_design(records, coeffs.gamma(), coeffs.water_density(), true), coeffs);
}

EfFitResult fit_ef(const std::vector<EnvironmentRecord>& train, const EfFitConfig& config) {
  config.validate();
  if (train.empty()) throw UsageError("fit_ef: training set is empty");
  const EfDesign design = make_design(train, config.gamma, config.water_density, true);

  const double mean_power = design.measured.mean();
  const double mean_t = design.draught.mean();
  const double mean_v = design.speed.mean();
  const double min_t = design.draught.minCoeff();
  const double min_v = design.speed.minCoeff();
  const double mean_wind = design.wind_load.abs().mean();
  const double mean_wave = design.wave_load.mean();

  Reparameterization rp;
  rp.gamma = config.gamma;
  rp.water_density = config.water_density;
  // Nominal magnitudes at which wind and waves each explain ~10% of mean power.
  rp.scale_wind = mean_wind > 0.0 ? 0.1 * std::abs(mean_power) / mean_wind : 1.0;
  rp.scale_wave = mean_wave > 0.0 ? 0.1 * std::abs(mean_power) / mean_wave : 1.0;

  RunResult best;
  Reparameterization best_rp = rp;
  int best_index = -1;
  int diverged = 0;
  for (int r = 0; r < config.multistart_count; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto log_uniform = [&](double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); };

    Vector7 theta;
    theta[kA] = uniform(-0.5 * min_t, mean_t);
    theta[kB] = uniform(-0.5 * min_v, mean_v);
    theta[kFc] = logit(uniform(0.1, 0.9));
    theta[kFh] = uniform(0.0, 2.0);
    theta[kFs] = uniform(0.0, 2.0);
    theta[kFg] = softplus_inverse(log_uniform(0.1, 2.0));

    // Scale c so that the model reproduces the mean measured power.
    Reparameterization trial = rp;
    trial.scale_c = 1.0;
    theta[kC] = softplus_inverse(1.0);
    const Eigen::ArrayXd calm_shape =
        (theta[kA] + design.draught) * (theta[kB] + design.speed).cube();
    const auto unit_c = trial.coefficients(theta);
    const double other = (design_power(design, unit_c) - calm_shape).mean();
    const double calm_mean = calm_shape.mean();
    double c0 = calm_mean > 0.0 ? (mean_power - other) / calm_mean : 0.0;
    if (!(c0 > 0.0) || !std::isfinite(c0)) {
      c0 = calm_mean > 0.0 ? mean_power / calm_mean : 1.0;
    }
    if (!(c0 > 0.0) || !std::isfinite(c0)) c0 = 1.0;
    Reparameterization run_rp = rp;
    run_rp.scale_c = c0;

    RunResult res = run_adam(design, run_rp, theta, config);
    if (res.diverged || !std::isfinite(res.mse)) {
      ++diverged;
      continue;
    }
    if (best_index < 0 || res.mse < best.mse) {
      best = res;
      best_rp = run_rp;
      best_index = r;
    }
  }
  if (best_index < 0) throw DivergenceError("fit_ef: all restarts produced a non-finite loss");

  return EfFitResult{best_rp.coefficients(best.theta), best.mse, best.initial_mse, best.iterations,
                     best.converged, best_index, diverged};
}

std::vector<double> predict_ef(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(physical_power(coeffs, records[i]).total_power);
    } catch (const DomainError& e) {
      throw DomainError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> ef_residuals(const ResistanceCoefficients& coeffs, const std::vector<EnvironmentRecord>& records) {
  auto pred = predict_ef(coeffs, records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!records[i].shaft_power) throw UsageError("row " + std::to_string(i) + ": record has no shaft power");
    pred[i] = *records[i].shaft_power - pred[i];
  }
  return pred;
}

}  // namespace shaftpower
