#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "ddcl/matrix.hpp"
#include "ddcl/types.hpp"

namespace ddcl {

struct LabeledSample {
  Vector features;
  ClassId class_id = 0;
  ClassId meta_class_id = 0;

  bool operator==(const LabeledSample&) const = default;
};

struct Dataset {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  // Generating class centres, filled only by generate().
  std::map<ClassId, Vector> centres;

  std::size_t dim() const;
  // Class -> meta-class over both splits.
  MetaClassMap meta_classes() const;
  // Class -> indices into `train`, ascending.
  std::map<ClassId, std::vector<std::size_t>> train_indices_by_class() const;
};

// Stack the feature vectors of `samples[indices[k]]` into rows.
Matrix gather_features(std::span<const LabeledSample> samples, std::span<const std::size_t> indices);
Matrix gather_features(std::span<const LabeledSample> samples);

// Confusable-class benchmark. `meta_classes` groups of `classes_per_meta`
// nearby classes, plus `background_classes` classes that each form their own
// meta-class. Meta centres are uniform in [0, inter_meta_spread]^dim, each
// class centre sits within intra_meta_spread of its meta centre, and samples
// are Gaussian around the class centre with std within_class_std.
// Class ids: grouped classes first (meta id = id / classes_per_meta), then
// background classes.
struct SyntheticSpec {
  std::size_t meta_classes = 2;
  std::size_t classes_per_meta = 5;
  std::size_t background_classes = 10;
  std::size_t dim = 16;
  double intra_meta_spread = 1.0;
  double inter_meta_spread = 10.0;
  double within_class_std = 1.0;
  std::size_t train_per_class = 100;
  std::size_t test_per_class = 50;
  std::uint64_t seed = 0;

  std::size_t total_classes() const { return meta_classes * classes_per_meta + background_classes; }
  void validate() const;
};

Dataset generate(const SyntheticSpec& spec);

// CSV with header f0,...,f{d-1},label,meta and one sample per row.
std::vector<LabeledSample> load_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, std::span<const LabeledSample> samples);

enum class SchedulePolicy { id_order, split_similar };

// Order in which classes are introduced. id_order: ascending ids.
// split_similar: round-robin over meta-classes (ascending meta id, ascending
// class id within a meta-class) so that similar classes land in different rounds.
std::vector<ClassId> class_order(const MetaClassMap& meta, SchedulePolicy policy);

struct RoundSpec {
  std::size_t index = 0;  // 1-based
  std::vector<ClassId> new_classes;
  // Class -> indices into Dataset::train.
  std::map<ClassId, std::vector<std::size_t>> train_indices;
};

std::vector<RoundSpec> schedule_rounds(const Dataset& dataset, std::size_t classes_per_round, SchedulePolicy policy);

}  // namespace ddcl
