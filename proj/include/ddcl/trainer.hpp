#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ddcl/losses.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/mlp.hpp"

namespace ddcl {

class Rng;

// A frozen teacher: its logits on each minibatch are distilled into the
// student outputs listed in index_map.
struct Teacher {
  const MlpClassifier* model = nullptr;
  std::vector<std::size_t> index_map;
  double temperature = 2.0;
};

struct EpochStats {
  double mean_loss = 0.0;  // sample-weighted mean of minibatch losses
  std::vector<double> minibatch_losses;
};

// One pass over `subset` (indices into the rows of `inputs`) in shuffled
// minibatches, minimizing cross-entropy plus the weighted distillation terms of
// whichever teachers are non-null. Teacher logits are recomputed on every
// minibatch. `context` is attached to the NumericError thrown when the loss or
// the parameters stop being finite.
EpochStats train_epoch(MlpClassifier& student, const Matrix& inputs, std::span<const std::size_t> labels,
                       std::span<const std::size_t> subset, std::size_t batch_size, double lr,
                       const Teacher* old_teacher, const Teacher* expert_teacher, const LossWeights& weights,
                       Rng& rng, const std::string& context);

// The DistillSpec a teacher contributes for one minibatch.
DistillSpec teacher_spec(const Teacher& teacher, const Matrix& batch);

}  // namespace ddcl
