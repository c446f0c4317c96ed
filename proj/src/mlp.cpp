#include "ddcl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"

namespace ddcl {

namespace {

void fill_uniform(std::span<double> values, double scale, Rng& rng) {
  for (double& v : values) v = rng.uniform(-scale, scale);
}

void add_bias(Matrix& m, const Vector& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
}

Matrix relu(const Matrix& m) {
  Matrix out = m;
  for (double& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

void check_batch(const MlpClassifier& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) {
    throw ShapeError("batch has " + std::to_string(batch.cols()) + " columns, model expects " +
                     std::to_string(model.input_dim()));
  }
}

}  // namespace

MlpClassifier::MlpClassifier(std::vector<std::size_t> layer_dims, std::uint64_t seed) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) throw InputError("an MLP needs at least input and output dims");
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    if (dims_[i] == 0 || dims_[i + 1] == 0) throw InputError("layer dims must be positive");
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims_[i]));
    Matrix w(dims_[i], dims_[i + 1]);
    fill_uniform(w.values(), scale, rng);
    Vector b(dims_[i + 1]);
    fill_uniform(b, scale, rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
  }
}

MlpClassifier MlpClassifier::zeros(std::vector<std::size_t> layer_dims) {
  if (layer_dims.size() < 2) throw InputError("an MLP needs at least input and output dims");
  MlpClassifier m;
  m.dims_ = std::move(layer_dims);
  for (std::size_t i = 0; i + 1 < m.dims_.size(); ++i) {
    m.weights_.emplace_back(m.dims_[i], m.dims_[i + 1]);
    m.biases_.emplace_back(m.dims_[i + 1], 0.0);
  }
  return m;
}

MlpClassifier MlpClassifier::from_parameters(std::vector<std::size_t> layer_dims, std::vector<Matrix> weights,
                                             std::vector<Vector> biases) {
  MlpClassifier m;
  m.dims_ = std::move(layer_dims);
  m.weights_ = std::move(weights);
  m.biases_ = std::move(biases);
  m.check_invariants();
  return m;
}

void MlpClassifier::check_invariants() const {
  if (dims_.size() < 2) throw ShapeError("an MLP needs at least input and output dims");
  if (weights_.size() + 1 != dims_.size() || biases_.size() + 1 != dims_.size()) {
    throw ShapeError("layer count does not match layer_dims");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i].rows() != dims_[i] || weights_[i].cols() != dims_[i + 1]) {
      throw ShapeError("weights[" + std::to_string(i) + "] has wrong shape");
    }
    if (biases_[i].size() != dims_[i + 1]) throw ShapeError("biases[" + std::to_string(i) + "] has wrong length");
  }
}

bool MlpClassifier::all_finite() const noexcept {
  for (const auto& w : weights_) {
    if (!w.all_finite()) return false;
  }
  for (const auto& b : biases_) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

Gradients Gradients::zeros_like(const MlpClassifier& model) {
  Gradients g;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    g.weights.emplace_back(model.weights(i).rows(), model.weights(i).cols());
    g.biases.emplace_back(model.bias(i).size(), 0.0);
  }
  return g;
}

void Gradients::add_scaled(const Gradients& other, double scale) {
  if (other.weights.size() != weights.size()) throw ShapeError("gradient layer count mismatch");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (other.weights[i].size() != weights[i].size() || other.biases[i].size() != biases[i].size()) {
      throw ShapeError("gradient shape mismatch");
    }
    auto dst = weights[i].values();
    auto src = other.weights[i].values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * src[k];
    for (std::size_t k = 0; k < biases[i].size(); ++k) biases[i][k] += scale * other.biases[i][k];
  }
}

ForwardTrace forward(const MlpClassifier& model, const Matrix& batch) {
  check_batch(model, batch);
  ForwardTrace trace;
  trace.layer_dims = model.layer_dims();
  trace.activations.push_back(batch);
  const std::size_t last = model.layer_count() - 1;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    Matrix z = matmul(trace.activations.back(), model.weights(i));
    add_bias(z, model.bias(i));
    if (i == last) {
      trace.logits = z;
      trace.pre_activations.push_back(std::move(z));
    } else {
      trace.activations.push_back(relu(z));
      trace.pre_activations.push_back(std::move(z));
    }
  }
  return trace;
}

Matrix predict_logits(const MlpClassifier& model, const Matrix& batch) {
  check_batch(model, batch);
  Matrix a = batch;
  const std::size_t last = model.layer_count() - 1;
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    Matrix z = matmul(a, model.weights(i));
    add_bias(z, model.bias(i));
    a = i == last ? std::move(z) : relu(z);
  }
  return a;
}

Matrix features(const MlpClassifier& model, const Matrix& batch) {
  check_batch(model, batch);
  Matrix a = batch;
  for (std::size_t i = 0; i + 1 < model.layer_count(); ++i) {
    Matrix z = matmul(a, model.weights(i));
    add_bias(z, model.bias(i));
    a = relu(z);
  }
  return a;
}

Gradients backward(const MlpClassifier& model, const ForwardTrace& trace, const Matrix& dloss_dlogits) {
  if (trace.layer_dims != model.layer_dims() || trace.pre_activations.size() != model.layer_count() ||
      trace.activations.size() != model.layer_count()) {
    throw StateError("forward trace was not produced by this model");
  }
  const std::size_t n = trace.activations.front().rows();
  if (dloss_dlogits.rows() != n || dloss_dlogits.cols() != model.output_dim()) {
    throw ShapeError("upstream gradient must be " + std::to_string(n) + "x" + std::to_string(model.output_dim()));
  }

  Gradients g = Gradients::zeros_like(model);
  Matrix delta = dloss_dlogits;
  for (std::size_t layer = model.layer_count(); layer-- > 0;) {
    g.weights[layer] = matmul_tn(trace.activations[layer], delta);
    auto& gb = g.biases[layer];
    for (std::size_t i = 0; i < delta.rows(); ++i) {
      auto r = delta.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) gb[j] += r[j];
    }
    if (layer == 0) break;
    Matrix upstream = matmul_nt(delta, model.weights(layer));
    const Matrix& pre = trace.pre_activations[layer - 1];
    for (std::size_t k = 0; k < upstream.size(); ++k) {
      if (pre.values()[k] <= 0.0) upstream.values()[k] = 0.0;
    }
    delta = std::move(upstream);
  }
  return g;
}

void sgd_step(MlpClassifier& model, const Gradients& grads, double lr) {
  if (grads.weights.size() != model.layer_count() || grads.biases.size() != model.layer_count()) {
    throw ShapeError("gradient layer count mismatch");
  }
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    auto w = model.weights(i).values();
    auto gw = grads.weights[i].values();
    auto& b = model.bias(i);
    if (gw.size() != w.size() || grads.biases[i].size() != b.size() ||
        grads.weights[i].rows() != model.weights(i).rows()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(i));
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * gw[k];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] -= lr * grads.biases[i][k];
  }
}

MlpClassifier expand_head(const MlpClassifier& model, std::size_t extra_outputs, double init_scale,
                          std::uint64_t seed) {
  if (extra_outputs == 0) throw InputError("expand_head needs at least one extra output");
  if (!(init_scale >= 0.0)) throw InputError("init_scale must be non-negative");
  Rng rng(seed);
  std::vector<std::size_t> dims = model.layer_dims();
  const std::size_t old_out = dims.back();
  const std::size_t new_out = old_out + extra_outputs;
  dims.back() = new_out;

  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t i = 0; i + 1 < model.layer_count(); ++i) {
    weights.push_back(model.weights(i));
    biases.push_back(model.bias(i));
  }
  const Matrix& head = model.weights(model.layer_count() - 1);
  Matrix grown(head.rows(), new_out);
  for (std::size_t r = 0; r < head.rows(); ++r) {
    for (std::size_t c = 0; c < old_out; ++c) grown(r, c) = head(r, c);
    for (std::size_t c = old_out; c < new_out; ++c) grown(r, c) = rng.uniform(-init_scale, init_scale);
  }
  Vector bias = model.bias(model.layer_count() - 1);
  for (std::size_t c = old_out; c < new_out; ++c) bias.push_back(rng.uniform(-init_scale, init_scale));
  weights.push_back(std::move(grown));
  biases.push_back(std::move(bias));
  return MlpClassifier::from_parameters(std::move(dims), std::move(weights), std::move(biases));
}

MlpClassifier replace_head(const MlpClassifier& model, std::size_t outputs, std::uint64_t seed) {
  if (outputs == 0) throw InputError("replace_head needs at least one output");
  Rng rng(seed);
  std::vector<std::size_t> dims = model.layer_dims();
  dims.back() = outputs;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  for (std::size_t i = 0; i + 1 < model.layer_count(); ++i) {
    weights.push_back(model.weights(i));
    biases.push_back(model.bias(i));
  }
  const std::size_t fan_in = model.feature_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Matrix head(fan_in, outputs);
  fill_uniform(head.values(), scale, rng);
  Vector bias(outputs);
  fill_uniform(bias, scale, rng);
  weights.push_back(std::move(head));
  biases.push_back(std::move(bias));
  return MlpClassifier::from_parameters(std::move(dims), std::move(weights), std::move(biases));
}

double Schedule::lr_at(std::size_t epoch) const {
  double rate = lr;
  for (double f : decay_at) {
    const auto boundary = static_cast<std::size_t>(std::floor(f * static_cast<double>(epochs)));
    if (epoch >= boundary) rate *= decay_factor;
  }
  return rate;
}

std::vector<std::vector<std::size_t>> make_minibatches(std::size_t n, std::size_t batch_size, Rng& rng) {
  if (batch_size == 0) throw InputError("batch_size must be positive");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace ddcl
