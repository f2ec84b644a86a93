#include "shaftpower/mlp.hpp"

#include <cmath>

#include "shaftpower/error.hpp"

namespace shaftpower {

namespace {

DenseLayer zero_layer(int in, int out) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), zero biases.
void fan_in_uniform(DenseLayer& layer, std::mt19937_64& rng) {
  const double limit = 1.0 / std::sqrt(static_cast<double>(layer.inputs()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
  }
  layer.bias.setZero();
}

Eigen::MatrixXd affine(const DenseLayer& layer, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd z = layer.weight * x;
  z.colwise() += layer.bias;
  return z;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// dL/dz for a rectifier layer given dL/da.
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& grad, const Eigen::MatrixXd& z) {
  return (z.array() > 0.0).select(grad, 0.0);
}

void accumulate(DenseLayer& g, const Eigen::MatrixXd& dz, const Eigen::MatrixXd& input) {
  g.weight.noalias() = dz * input.transpose();
  g.bias = dz.rowwise().sum();
}

ForwardCache::Branch run_branch(const std::array<DenseLayer, 2>& layers, const Eigen::MatrixXd& x) {
  ForwardCache::Branch b;
  b.input = x;
  b.z1 = affine(layers[0], x);
  b.a1 = relu(b.z1);
  b.z2 = affine(layers[1], b.a1);
  b.a2 = relu(b.z2);
  return b;
}

// Returns dL/d(input) of the branch.
void branch_backward(const std::array<DenseLayer, 2>& layers, const ForwardCache::Branch& b,
                     const Eigen::MatrixXd& grad_a2, std::array<DenseLayer, 2>& g) {
  const Eigen::MatrixXd dz2 = relu_backward(grad_a2, b.z2);
  accumulate(g[1], dz2, b.a1);
  const Eigen::MatrixXd dz1 = relu_backward(layers[1].weight.transpose() * dz2, b.z1);
  accumulate(g[0], dz1, b.input);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void check_loss_inputs(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& target,
                       const Eigen::RowVectorXd& physics, double lambda) {
  if (pred.size() == 0) throw UsageError("composite loss: empty batch");
  if (pred.size() != target.size()) throw UsageError("composite loss: prediction/target length mismatch");
  if (physics.size() == 0) {
    if (lambda != 0.0) throw UsageError("composite loss: physics targets required when lambda > 0");
  } else if (physics.size() != pred.size()) {
    throw UsageError("composite loss: physics target length mismatch");
  }
  if (!(lambda >= 0.0)) throw UsageError("composite loss: lambda must be >= 0");
}

}  // namespace

void MlpArchitecture::validate() const {
  for (int w : {copernicus_inputs, sensor_inputs, external_inputs, copernicus_widths[0], copernicus_widths[1],
                sensor_widths[0], sensor_widths[1], external_widths[0], external_widths[1], trunk_widths[0],
                trunk_widths[1]}) {
    if (w < 1) throw UsageError("network layer widths must be >= 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw UsageError("dropout rate must lie in [0, 1)");
}

MlpModel MlpModel::zeros(const MlpArchitecture& arch) {
  arch.validate();
  MlpModel m;
  m.arch = arch;
  auto branch = [](int in, const std::array<int, 2>& w) {
    return std::array<DenseLayer, 2>{zero_layer(in, w[0]), zero_layer(w[0], w[1])};
  };
  m.copernicus = branch(arch.copernicus_inputs, arch.copernicus_widths);
  m.sensor = branch(arch.sensor_inputs, arch.sensor_widths);
  m.external = branch(arch.external_inputs, arch.external_widths);
  m.trunk = branch(arch.concat_width(), arch.trunk_widths);
  m.output = zero_layer(arch.trunk_widths[1], 1);
  return m;
}

MlpModel MlpModel::initialize(const MlpArchitecture& arch, std::mt19937_64& rng) {
  MlpModel m = zeros(arch);
  m.for_each_layer([&](DenseLayer& l) { fan_in_uniform(l, rng); });
  return m;
}

Eigen::Index MlpModel::parameter_count() const {
  Eigen::Index n = 0;
  for_each_layer([&](const DenseLayer& l) { n += l.weight.size() + l.bias.size(); });
  return n;
}

bool MlpModel::all_finite() const {
  bool ok = true;
  for_each_layer([&](const DenseLayer& l) { ok = ok && l.weight.allFinite() && l.bias.allFinite(); });
  return ok;
}

Eigen::VectorXd MlpModel::flatten() const {
  Eigen::VectorXd out(parameter_count());
  Eigen::Index k = 0;
  for_each_layer([&](const DenseLayer& l) {
    out.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    out.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  });
  return out;
}

void MlpModel::unflatten(const Eigen::Ref<const Eigen::VectorXd>& params) {
  if (params.size() != parameter_count()) throw UsageError("unflatten: parameter count mismatch");
  Eigen::Index k = 0;
  for_each_layer([&](DenseLayer& l) {
    l.weight.reshaped() = params.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = params.segment(k, l.bias.size());
    k += l.bias.size();
  });
}

Eigen::RowVectorXd forward(const MlpModel& model, const GroupedInputs& inputs, bool training, std::mt19937_64* rng,
                           ForwardCache* cache) {
  const auto& arch = model.arch;
  if (inputs.copernicus.rows() != arch.copernicus_inputs || inputs.sensor.rows() != arch.sensor_inputs ||
      inputs.external.rows() != arch.external_inputs) {
    throw SchemaError("network input widths do not match the feature groups");
  }
  const auto n = inputs.samples();
  if (inputs.sensor.cols() != n || inputs.external.cols() != n) {
    throw SchemaError("network input groups have different sample counts");
  }
  if (training && arch.dropout_rate > 0.0 && rng == nullptr) {
    throw UsageError("forward: training mode needs a random generator for dropout");
  }

  ForwardCache local;
  ForwardCache& c = cache != nullptr ? *cache : local;
  c.branches[0] = run_branch(model.copernicus, inputs.copernicus);
  c.branches[1] = run_branch(model.sensor, inputs.sensor);
  c.branches[2] = run_branch(model.external, inputs.external);

  c.concat.resize(arch.concat_width(), n);
  Eigen::Index row = 0;
  for (const auto& b : c.branches) {
    c.concat.middleRows(row, b.a2.rows()) = b.a2;
    row += b.a2.rows();
  }
  c.z1 = affine(model.trunk[0], c.concat);
  c.a1 = relu(c.z1);
  c.z2 = affine(model.trunk[1], c.a1);
  c.a2 = relu(c.z2);

  if (training && arch.dropout_rate > 0.0) {
    const double keep = 1.0 - arch.dropout_rate;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    c.keep_mask.resize(c.a2.rows(), c.a2.cols());
    for (Eigen::Index j = 0; j < c.keep_mask.cols(); ++j) {
      for (Eigen::Index i = 0; i < c.keep_mask.rows(); ++i) c.keep_mask(i, j) = u(*rng) < keep ? 1.0 / keep : 0.0;
    }
    c.dropped = (c.a2.array() * c.keep_mask).matrix();
  } else {
    c.keep_mask.resize(0, 0);
    c.dropped = c.a2;
  }
  c.output = affine(model.output, c.dropped);
  return c.output;
}

MlpGradients backward(const MlpModel& model, const ForwardCache& cache, const Eigen::RowVectorXd& output_grad) {
  if (output_grad.size() != cache.output.size()) throw UsageError("backward: gradient/batch size mismatch");
  MlpGradients g = MlpModel::zeros(model.arch);

  const Eigen::MatrixXd dy = output_grad;
  accumulate(g.output, dy, cache.dropped);
  Eigen::MatrixXd grad = model.output.weight.transpose() * dy;
  if (cache.keep_mask.size() != 0) grad.array() *= cache.keep_mask;

  const Eigen::MatrixXd dz2 = relu_backward(grad, cache.z2);
  accumulate(g.trunk[1], dz2, cache.a1);
  const Eigen::MatrixXd dz1 = relu_backward(model.trunk[1].weight.transpose() * dz2, cache.z1);
  accumulate(g.trunk[0], dz1, cache.concat);
  const Eigen::MatrixXd dconcat = model.trunk[0].weight.transpose() * dz1;

  const std::array<const std::array<DenseLayer, 2>*, 3> layers = {&model.copernicus, &model.sensor, &model.external};
  const std::array<std::array<DenseLayer, 2>*, 3> grads = {&g.copernicus, &g.sensor, &g.external};
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < 3; ++b) {
    const auto width = cache.branches[b].a2.rows();
    branch_backward(*layers[b], cache.branches[b], dconcat.middleRows(row, width), *grads[b]);
    row += width;
  }
  return g;
}

double composite_loss(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& target,
                      const Eigen::RowVectorXd& physics, double lambda) {
  check_loss_inputs(pred, target, physics, lambda);
  const double data = (pred - target).cwiseAbs().mean();
  if (physics.size() == 0) return data;
  return data + lambda * (pred - physics).cwiseAbs().mean();
}

Eigen::RowVectorXd composite_loss_gradient(const Eigen::RowVectorXd& pred, const Eigen::RowVectorXd& target,
                                           const Eigen::RowVectorXd& physics, double lambda) {
  check_loss_inputs(pred, target, physics, lambda);
  const double n = static_cast<double>(pred.size());
  Eigen::RowVectorXd g(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    double s = sign(pred[i] - target[i]);
    if (physics.size() != 0) s += lambda * sign(pred[i] - physics[i]);
    g[i] = s / n;
  }
  return g;
}

}  // namespace shaftpower
