#include "ddcl/metrics.hpp"

#include <string>

#include "ddcl/error.hpp"

namespace ddcl {

namespace {

ClassId meta_of(const MetaClassMap& meta, ClassId id) {
  auto it = meta.find(id);
  if (it == meta.end()) throw InputError("class " + std::to_string(id) + " has no meta-class");
  return it->second;
}

}  // namespace

ErrorSplit decompose_errors(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                            const MetaClassMap& meta) {
  if (truth.size() != predicted.size()) throw ShapeError("decompose_errors: label count mismatch");
  ErrorSplit split;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const ClassId t = meta_of(meta, truth[i]);
    const ClassId p = meta_of(meta, predicted[i]);
    if (truth[i] == predicted[i]) continue;
    if (t == p) {
      ++split.confusion;
    } else {
      ++split.forgetting;
    }
  }
  return split;
}

std::map<ClassId, double> per_class_accuracy(std::span<const ClassId> truth, std::span<const ClassId> predicted) {
  if (truth.size() != predicted.size()) throw ShapeError("per_class_accuracy: label count mismatch");
  std::map<ClassId, std::pair<std::size_t, std::size_t>> counts;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    auto& [correct, seen] = counts[truth[i]];
    ++seen;
    if (truth[i] == predicted[i]) ++correct;
  }
  std::map<ClassId, double> acc;
  for (const auto& [id, c] : counts) acc[id] = static_cast<double>(c.first) / static_cast<double>(c.second);
  return acc;
}

double mean_accuracy(std::span<const double> per_class) {
  if (per_class.empty()) throw InputError("mean_accuracy needs at least one class");
  double sum = 0.0;
  for (double a : per_class) sum += a;
  return sum / static_cast<double>(per_class.size());
}

double mean_accuracy(const std::map<ClassId, double>& per_class) {
  std::vector<double> values;
  values.reserve(per_class.size());
  for (const auto& [id, a] : per_class) values.push_back(a);
  return mean_accuracy(values);
}

double RoundReport::accuracy_over(std::span<const ClassId> classes) const {
  std::vector<double> values;
  for (ClassId id : classes) {
    auto it = per_class_accuracy.find(id);
    if (it != per_class_accuracy.end()) values.push_back(it->second);
  }
  return ddcl::mean_accuracy(values);
}

}  // namespace ddcl
