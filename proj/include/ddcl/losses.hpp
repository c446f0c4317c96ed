#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ddcl/matrix.hpp"

namespace ddcl {

// Loss value together with its gradient w.r.t. the student logits.
struct LossResult {
  double loss = 0.0;
  Matrix grad;
};

// Teacher side of a distillation term. Row i of teacher_logits is the teacher's
// logit vector for sample i; teacher output j is matched against student
// output index_map[j].
struct DistillSpec {
  Matrix teacher_logits;
  std::vector<std::size_t> index_map;
  double temperature = 2.0;

  // Throws InputError / ShapeError if the spec cannot be applied to a student
  // batch of `batch_rows` rows and `student_width` outputs.
  void validate(std::size_t batch_rows, std::size_t student_width) const;
};

struct LossWeights {
  double lambda1 = 1.0;  // old-classifier distillation
  double lambda2 = 1.0;  // expert distillation

  void validate() const;
};

// softmax(logits / T), max-subtracted.
Vector temperature_softmax(std::span<const double> logits, double temperature);

// Mean over rows of -log softmax(logits)[label]. `labels` are output positions.
LossResult cross_entropy(const Matrix& logits, std::span<const std::size_t> labels);

// -(1/N) sum_i sum_j p_ij log q_ij with p from the teacher logits and q from the
// student logits selected by index_map, both softened by the spec's temperature.
// The gradient is (q - p) / (N T) at mapped positions and zero elsewhere.
LossResult distillation_loss(const Matrix& student_logits, const DistillSpec& spec);

// L_c + lambda1 * L_old + lambda2 * L_expert. A null spec contributes nothing.
LossResult combined_loss(const Matrix& student_logits, std::span<const std::size_t> labels,
                         const DistillSpec* old_spec, const DistillSpec* expert_spec, const LossWeights& weights);

}  // namespace ddcl
