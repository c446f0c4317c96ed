#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "ddcl/losses.hpp"
#include "ddcl/matrix.hpp"
#include "ddcl/mlp.hpp"
#include "ddcl/types.hpp"

namespace ddcl {

class Rng;

// Two-phase schedule: `full_epochs` over all available data, then
// `balanced_epochs` on per-epoch class-balanced down-samples. The learning
// rate decays over the combined epoch count.
struct ExpertSchedule {
  std::size_t full_epochs = 80;
  std::size_t balanced_epochs = 40;
  std::size_t batch_size = 128;
  double lr = 0.1;
  std::vector<double> decay_at;
  double decay_factor = 0.1;

  Schedule sgd() const { return {full_epochs + balanced_epochs, batch_size, lr, decay_at, decay_factor}; }
};

// Where the expert's hidden layers come from: copied from `warm_start` when it
// is set, otherwise freshly initialized with `hidden` widths.
struct ExpertInit {
  const MlpClassifier* warm_start = nullptr;
  std::vector<std::size_t> hidden;
};

// Temporary classifier over new classes plus their confusable old classes.
// Output j of `model` is class `class_list[j]`.
struct ExpertBundle {
  MlpClassifier model;
  std::vector<ClassId> class_list;
  std::size_t full_epochs = 0;
  std::size_t balanced_epochs = 0;
  std::vector<double> epoch_losses;
};

// Positions of every class of each label: returns for every class the same
// number of sample positions (the smallest class count), drawn without
// replacement. Result is grouped by class in ascending label order.
std::vector<std::size_t> balanced_subset(std::span<const std::size_t> labels, std::size_t num_classes, Rng& rng);

// class_list is new-class ids ascending, then the old ids ascending.
ExpertBundle train_expert(const std::map<ClassId, Matrix>& new_data, const std::map<ClassId, Matrix>& old_exemplars,
                          const ExpertInit& init, const ExpertSchedule& schedule, std::uint64_t seed);

// index_map[j] = position of class_list[j] in student_order.
std::vector<std::size_t> expert_index_map(std::span<const ClassId> class_list, std::span<const ClassId> student_order);

// Distillation target for one student minibatch.
DistillSpec expert_teacher_spec(const ExpertBundle& bundle, std::span<const ClassId> student_order,
                                double temperature, const Matrix& batch);

}  // namespace ddcl
