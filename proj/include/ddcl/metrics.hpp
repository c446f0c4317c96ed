#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "ddcl/types.hpp"

namespace ddcl {

struct ErrorSplit {
  std::size_t confusion = 0;   // wrong class, same meta-class
  std::size_t forgetting = 0;  // wrong class, different meta-class

  std::size_t total() const noexcept { return confusion + forgetting; }
  bool operator==(const ErrorSplit&) const = default;
};

ErrorSplit decompose_errors(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                            const MetaClassMap& meta);

// Fraction correct per true class that occurs in `truth`.
std::map<ClassId, double> per_class_accuracy(std::span<const ClassId> truth, std::span<const ClassId> predicted);

// Unweighted mean over classes.
double mean_accuracy(std::span<const double> per_class);
double mean_accuracy(const std::map<ClassId, double>& per_class);

// Evaluation of one round of one run.
struct RoundReport {
  std::size_t round = 0;
  std::vector<ClassId> new_classes;
  std::map<ClassId, double> per_class_accuracy;
  double mean_accuracy = 0.0;
  std::size_t confusion_errors = 0;
  std::size_t forgetting_errors = 0;
  std::size_t test_samples = 0;
  SimilarAssignment similar_pairs;
  std::vector<ClassId> expert_classes;
  double expert_final_loss = 0.0;
  double train_final_loss = 0.0;
  std::map<ClassId, std::vector<std::size_t>> memory;
  double wall_seconds = 0.0;

  // Mean accuracy restricted to `classes` (those present in the report).
  double accuracy_over(std::span<const ClassId> classes) const;
};

}  // namespace ddcl
