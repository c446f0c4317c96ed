#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ddcl/matrix.hpp"

namespace ddcl {

class Rng;

// Feed-forward classifier: affine layers with ReLU between them, no activation
// on the output (the output is the logit vector). weights[i] is
// layer_dims[i] x layer_dims[i+1] so a batch maps as X * W + b.
class MlpClassifier {
 public:
  // Scaled uniform init: every weight and bias of layer i drawn from
  // uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  MlpClassifier(std::vector<std::size_t> layer_dims, std::uint64_t seed);

  static MlpClassifier zeros(std::vector<std::size_t> layer_dims);
  static MlpClassifier from_parameters(std::vector<std::size_t> layer_dims, std::vector<Matrix> weights,
                                       std::vector<Vector> biases);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t layer_count() const noexcept { return weights_.size(); }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  // Width of the penultimate representation (input_dim for a linear model).
  std::size_t feature_dim() const noexcept { return dims_[dims_.size() - 2]; }

  const Matrix& weights(std::size_t layer) const { return weights_.at(layer); }
  Matrix& weights(std::size_t layer) { return weights_.at(layer); }
  const Vector& bias(std::size_t layer) const { return biases_.at(layer); }
  Vector& bias(std::size_t layer) { return biases_.at(layer); }

  bool all_finite() const noexcept;
  bool operator==(const MlpClassifier&) const = default;

 private:
  MlpClassifier() = default;
  void check_invariants() const;

  std::vector<std::size_t> dims_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

// Everything backward() needs: the input batch and every layer's
// pre-activation and activation. activations[i] is the input to layer i
// (activations[0] is the batch itself).
struct ForwardTrace {
  std::vector<std::size_t> layer_dims;
  std::vector<Matrix> pre_activations;
  std::vector<Matrix> activations;
  Matrix logits;

  const Matrix& last_hidden() const { return activations.back(); }
};

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const MlpClassifier& model);
  // this += scale * other
  void add_scaled(const Gradients& other, double scale);
};

ForwardTrace forward(const MlpClassifier& model, const Matrix& batch);
// Logits only, no trace retained.
Matrix predict_logits(const MlpClassifier& model, const Matrix& batch);
// Penultimate-layer activations.
Matrix features(const MlpClassifier& model, const Matrix& batch);

Gradients backward(const MlpClassifier& model, const ForwardTrace& trace, const Matrix& dloss_dlogits);

// p <- p - lr * g for every parameter.
void sgd_step(MlpClassifier& model, const Gradients& grads, double lr);

// Copy of `model` with `extra_outputs` more logits. Existing parameters are
// copied unchanged; the new head columns and bias entries are drawn from
// uniform(-init_scale, init_scale).
MlpClassifier expand_head(const MlpClassifier& model, std::size_t extra_outputs, double init_scale,
                          std::uint64_t seed);

// Keeps every hidden layer of `model` and replaces the output layer by a freshly
// initialized one with `outputs` logits (fan-in scaled uniform).
MlpClassifier replace_head(const MlpClassifier& model, std::size_t outputs, std::uint64_t seed);

// Minibatch SGD schedule. The learning rate is multiplied by decay_factor each
// time the epoch index passes floor(f * epochs) for f in decay_at.
struct Schedule {
  std::size_t epochs = 100;
  std::size_t batch_size = 128;
  double lr = 0.1;
  std::vector<double> decay_at;
  double decay_factor = 0.1;

  double lr_at(std::size_t epoch) const;
};

// Shuffled partition of 0..n-1 into consecutive minibatches of `batch_size`
// (last one possibly shorter).
std::vector<std::vector<std::size_t>> make_minibatches(std::size_t n, std::size_t batch_size, Rng& rng);

}  // namespace ddcl
