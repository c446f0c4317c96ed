#include "ddcl/trainer.hpp"

#include <cmath>
#include <numeric>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"

namespace ddcl {

DistillSpec teacher_spec(const Teacher& teacher, const Matrix& batch) {
  if (teacher.model == nullptr) throw StateError("teacher has no model");
  return DistillSpec{predict_logits(*teacher.model, batch), teacher.index_map, teacher.temperature};
}

EpochStats train_epoch(MlpClassifier& student, const Matrix& inputs, std::span<const std::size_t> labels,
                       std::span<const std::size_t> subset, std::size_t batch_size, double lr,
                       const Teacher* old_teacher, const Teacher* expert_teacher, const LossWeights& weights,
                       Rng& rng, const std::string& context) {
  if (labels.size() != inputs.rows()) throw ShapeError("train_epoch: one label per input row required");
  EpochStats stats;
  const auto batches = make_minibatches(subset.size(), batch_size, rng);
  double weighted = 0.0;
  std::vector<std::size_t> rows;
  std::vector<std::size_t> batch_labels;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    rows.clear();
    batch_labels.clear();
    for (std::size_t k : batches[b]) {
      rows.push_back(subset[k]);
      batch_labels.push_back(labels[subset[k]]);
    }
    const Matrix batch = gather_rows(inputs, rows);
    const ForwardTrace trace = forward(student, batch);

    DistillSpec old_spec;
    DistillSpec expert_spec;
    if (old_teacher != nullptr) old_spec = teacher_spec(*old_teacher, batch);
    if (expert_teacher != nullptr) expert_spec = teacher_spec(*expert_teacher, batch);
    const LossResult loss = combined_loss(trace.logits, batch_labels, old_teacher ? &old_spec : nullptr,
                                          expert_teacher ? &expert_spec : nullptr, weights);
    if (!std::isfinite(loss.loss)) {
      throw NumericError(context + ", minibatch " + std::to_string(b) + ": loss is " + std::to_string(loss.loss) +
                         " (lr " + std::to_string(lr) + ")");
    }
    sgd_step(student, backward(student, trace, loss.grad), lr);
    if (!student.all_finite()) {
      throw NumericError(context + ", minibatch " + std::to_string(b) + ": parameters diverged (lr " +
                         std::to_string(lr) + ", loss " + std::to_string(loss.loss) + ")");
    }
    stats.minibatch_losses.push_back(loss.loss);
    weighted += loss.loss * static_cast<double>(rows.size());
  }
  if (!subset.empty()) stats.mean_loss = weighted / static_cast<double>(subset.size());
  return stats;
}

}  // namespace ddcl
