#include "ddcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddcl/error.hpp"

namespace ddcl {

namespace {

// log softmax(v / T) written into `out`; returns nothing, out.size() == v.size().
void log_softmax(std::span<const double> v, double temperature, std::span<double> out) {
  double peak = -INFINITY;
  for (double x : v) peak = std::max(peak, x / temperature);
  double sum = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = v[j] / temperature - peak;
    sum += std::exp(out[j]);
  }
  const double log_sum = std::log(sum);
  for (double& x : out) x -= log_sum;
}

}  // namespace

void DistillSpec::validate(std::size_t batch_rows, std::size_t student_width) const {
  if (!(temperature >= 1.0) || !std::isfinite(temperature)) {
    throw InputError("distillation temperature must be finite and >= 1");
  }
  if (index_map.size() != teacher_logits.cols()) {
    throw ShapeError("index_map has " + std::to_string(index_map.size()) + " entries for " +
                     std::to_string(teacher_logits.cols()) + " teacher outputs");
  }
  if (teacher_logits.rows() != batch_rows) {
    throw ShapeError("teacher batch has " + std::to_string(teacher_logits.rows()) + " rows, student has " +
                     std::to_string(batch_rows));
  }
  std::vector<bool> used(student_width, false);
  for (std::size_t pos : index_map) {
    if (pos >= student_width) throw InputError("index_map entry " + std::to_string(pos) + " out of student range");
    if (used[pos]) throw InputError("index_map entry " + std::to_string(pos) + " repeated");
    used[pos] = true;
  }
}

void LossWeights::validate() const {
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2) || lambda1 < 0.0 || lambda2 < 0.0) {
    throw InputError("loss weights must be finite and non-negative");
  }
}

Vector temperature_softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InputError("softmax temperature must be positive");
  Vector out(logits.size());
  if (logits.empty()) return out;
  double peak = -INFINITY;
  for (double x : logits) peak = std::max(peak, x / temperature);
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] / temperature - peak);
    sum += out[j];
  }
  for (double& p : out) p /= sum;
  return out;
}

LossResult cross_entropy(const Matrix& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.rows()) throw ShapeError("cross_entropy: one label per row required");
  if (logits.rows() == 0) throw InputError("cross_entropy: empty batch");
  const double n = static_cast<double>(logits.rows());
  LossResult result{0.0, Matrix(logits.rows(), logits.cols())};
  Vector logp(logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (labels[i] >= logits.cols()) {
      throw InputError("label " + std::to_string(labels[i]) + " outside " + std::to_string(logits.cols()) +
                       " outputs");
    }
    log_softmax(logits.row(i), 1.0, logp);
    result.loss -= logp[labels[i]];
    auto g = result.grad.row(i);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = std::exp(logp[j]) / n;
    g[labels[i]] -= 1.0 / n;
  }
  result.loss /= n;
  return result;
}

LossResult distillation_loss(const Matrix& student_logits, const DistillSpec& spec) {
  spec.validate(student_logits.rows(), student_logits.cols());
  if (student_logits.rows() == 0) throw InputError("distillation_loss: empty batch");
  const double n = static_cast<double>(student_logits.rows());
  const double temp = spec.temperature;
  const std::size_t t = spec.index_map.size();
  LossResult result{0.0, Matrix(student_logits.rows(), student_logits.cols())};
  Vector selected(t);
  Vector student_logp(t);
  for (std::size_t i = 0; i < student_logits.rows(); ++i) {
    auto srow = student_logits.row(i);
    for (std::size_t j = 0; j < t; ++j) selected[j] = srow[spec.index_map[j]];
    const Vector p = temperature_softmax(spec.teacher_logits.row(i), temp);
    log_softmax(selected, temp, student_logp);
    auto g = result.grad.row(i);
    for (std::size_t j = 0; j < t; ++j) {
      result.loss -= p[j] * student_logp[j];
      g[spec.index_map[j]] = (std::exp(student_logp[j]) - p[j]) / (n * temp);
    }
  }
  result.loss /= n;
  return result;
}

LossResult combined_loss(const Matrix& student_logits, std::span<const std::size_t> labels,
                         const DistillSpec* old_spec, const DistillSpec* expert_spec, const LossWeights& weights) {
  weights.validate();
  LossResult total = cross_entropy(student_logits, labels);
  auto accumulate = [&](const DistillSpec* spec, double lambda) {
    if (spec == nullptr) return;
    const LossResult part = distillation_loss(student_logits, *spec);
    total.loss += lambda * part.loss;
    auto dst = total.grad.values();
    auto src = part.grad.values();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += lambda * src[k];
  };
  accumulate(old_spec, weights.lambda1);
  accumulate(expert_spec, weights.lambda2);
  return total;
}

}  // namespace ddcl
