#include "ddcl/expert.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "ddcl/error.hpp"
#include "ddcl/rng.hpp"
#include "ddcl/trainer.hpp"

namespace ddcl {

std::vector<std::size_t> balanced_subset(std::span<const std::size_t> labels, std::size_t num_classes, Rng& rng) {
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes) throw InputError("balanced_subset: label out of range");
    by_class[labels[i]].push_back(i);
  }
  std::size_t floor_count = std::numeric_limits<std::size_t>::max();
  for (const auto& members : by_class) floor_count = std::min(floor_count, members.size());
  if (num_classes == 0) floor_count = 0;

  std::vector<std::size_t> subset;
  subset.reserve(floor_count * num_classes);
  for (auto& members : by_class) {
    rng.shuffle(members);
    subset.insert(subset.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(floor_count));
  }
  return subset;
}

ExpertBundle train_expert(const std::map<ClassId, Matrix>& new_data, const std::map<ClassId, Matrix>& old_exemplars,
                          const ExpertInit& init, const ExpertSchedule& schedule, std::uint64_t seed) {
  if (new_data.empty()) throw InputError("train_expert: no new classes");
  std::vector<ClassId> class_list;
  std::size_t rows = 0;
  std::size_t dim = 0;
  for (const auto* group : {&new_data, &old_exemplars}) {
    for (const auto& [id, x] : *group) {
      if (x.rows() == 0) throw InputError("train_expert: class " + std::to_string(id) + " has no samples");
      if (dim == 0) dim = x.cols();
      if (x.cols() != dim) throw ShapeError("train_expert: inconsistent input width");
      if (std::find(class_list.begin(), class_list.end(), id) != class_list.end()) {
        throw InputError("train_expert: class " + std::to_string(id) + " listed twice");
      }
      class_list.push_back(id);
      rows += x.rows();
    }
  }

  Matrix inputs(rows, dim);
  std::vector<std::size_t> labels;
  labels.reserve(rows);
  std::size_t r = 0;
  for (std::size_t label = 0; label < class_list.size(); ++label) {
    const ClassId id = class_list[label];
    const Matrix& x = new_data.contains(id) ? new_data.at(id) : old_exemplars.at(id);
    for (std::size_t i = 0; i < x.rows(); ++i, ++r) {
      std::copy(x.row(i).begin(), x.row(i).end(), inputs.row(r).begin());
      labels.push_back(label);
    }
  }

  const std::size_t t = class_list.size();
  MlpClassifier model = [&] {
    if (init.warm_start != nullptr) {
      if (init.warm_start->input_dim() != dim) throw ShapeError("train_expert: warm start has wrong input width");
      return replace_head(*init.warm_start, t, derive_seed(seed, 0));
    }
    std::vector<std::size_t> dims{dim};
    dims.insert(dims.end(), init.hidden.begin(), init.hidden.end());
    dims.push_back(t);
    return MlpClassifier(dims, derive_seed(seed, 0));
  }();

  ExpertBundle bundle{std::move(model), std::move(class_list), schedule.full_epochs, schedule.balanced_epochs, {}};
  const Schedule sgd = schedule.sgd();
  Rng rng(derive_seed(seed, 1));
  std::vector<std::size_t> everything(rows);
  std::iota(everything.begin(), everything.end(), std::size_t{0});
  const LossWeights ce_only{0.0, 0.0};
  for (std::size_t epoch = 0; epoch < sgd.epochs; ++epoch) {
    const bool balanced = epoch >= schedule.full_epochs;
    const std::vector<std::size_t> subset = balanced ? balanced_subset(labels, t, rng) : everything;
    const auto stats = train_epoch(bundle.model, inputs, labels, subset, sgd.batch_size, sgd.lr_at(epoch), nullptr,
                                   nullptr, ce_only, rng, "expert epoch " + std::to_string(epoch));
    bundle.epoch_losses.push_back(stats.mean_loss);
  }
  return bundle;
}

std::vector<std::size_t> expert_index_map(std::span<const ClassId> class_list, std::span<const ClassId> student_order) {
  std::vector<std::size_t> map;
  map.reserve(class_list.size());
  for (ClassId id : class_list) {
    auto it = std::find(student_order.begin(), student_order.end(), id);
    if (it == student_order.end()) throw StateError("expert class " + std::to_string(id) + " unknown to the student");
    map.push_back(static_cast<std::size_t>(it - student_order.begin()));
  }
  return map;
}

DistillSpec expert_teacher_spec(const ExpertBundle& bundle, std::span<const ClassId> student_order,
                                double temperature, const Matrix& batch) {
  return DistillSpec{predict_logits(bundle.model, batch), expert_index_map(bundle.class_list, student_order),
                     temperature};
}

}  // namespace ddcl
